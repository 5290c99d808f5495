"""Structural solvers: factor-pair enumeration, discriminant analysis,
separation of variables, the FLT eliminator, binomial power equations and
isolated-linear families."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import islice, product
from math import ceil, floor, gcd, isqrt, lcm
from typing import Iterator, Mapping, Sequence

import sympy

from src.components.errors import NotApplicable, ZeroTarget
from src.components.expr import (
    CONSTANT,
    AffineForm,
    Domain,
    Monomial,
    NormalizedEquation,
    complete_square_reduce,
)
from src.components.linear import AffineLatticeFamily, solve_linear, solve_linear_system
from src.components.modular import satisfying_states
from src.components.pell import BackMap, PellForm, Recovery, back_transform, reduce_to_pell, solve_pell
from src.components.verdict import (
    DISCRIMINANT_RANGE,
    DIVISOR_CANDIDATES,
    FACTOR_ENUMERATION,
    ZERO_CASES,
    Certificate,
    Status,
    Verdict,
)
from src.utils.numtheory import (
    FACTOR_LIMIT,
    exact_root,
    integer_roots,
    is_square,
    ordered_factorizations,
    poly_eval,
    signed_divisors,
)

logger = logging.getLogger(__name__)

AUX = "_k"
MATERIALIZE_CAP = 10_000
PARAMETER_NAMES = ("k", "s", "t", "u", "w", "m", "n", "p", "q", "r")


# --------------------------------------------------------------------------- #
# Indexed families
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class Parameter:
    name: str
    lower: int | None = 0
    upper: int | None = None

    @property
    def domain(self) -> str:
        if self.lower is None and self.upper is None:
            return "Z"
        return Domain(self.lower, self.upper).name

    def values(self, limit: int) -> list[int]:
        if self.lower is None:
            values = [0]
            for k in range(1, limit + 1):
                values += [k, -k]
            return [v for v in values if self.upper is None or v <= self.upper]
        top = self.lower + limit if self.upper is None else min(self.upper, self.lower + limit)
        return list(range(self.lower, top + 1))


@dataclass(frozen=True)
class IndexedFamily:
    """Closed-form expressions over integer parameters."""

    params: tuple[Parameter, ...]
    exprs: tuple[tuple[str, sympy.Expr], ...]
    note: str = ""
    domains: Mapping[str, Domain] = field(default_factory=dict, compare=False)
    nonvanishing: frozenset[str] = field(default=frozenset(), compare=False)
    kind: str = field(default="indexed", init=False)

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.exprs)

    def parameters(self) -> list[tuple[str, str]]:
        return [(p.name, p.domain) for p in self.params]

    def expressions(self) -> dict[str, str]:
        return {v: str(e) for v, e in self.exprs}

    def constraints(self) -> list[str]:
        notes = [self.note] if self.note else []
        notes += [f"{v} in {d.name}" for v, d in sorted(self.domains.items()) if v in self.variables and d != Domain()]
        notes += [f"{v} != 0" for v in sorted(self.nonvanishing) if v in self.variables]
        return notes

    def evaluate(self, values: Mapping[str, int]) -> dict[str, int | Fraction]:
        subs = {sympy.Symbol(p.name, integer=True): values[p.name] for p in self.params}
        point: dict[str, int | Fraction] = {}
        for var, expr in self.exprs:
            value = sympy.nsimplify(expr.subs(subs)) if subs else expr
            rational = Fraction(int(value.p), int(value.q))
            point[var] = int(rational) if rational.denominator == 1 else rational
        return point

    def materialize(self, limit: int = 20) -> Iterator[dict[str, int | Fraction]]:
        grid = product(*(p.values(limit) for p in self.params))
        for combo in islice(grid, MATERIALIZE_CAP):
            point = self.evaluate(dict(zip((p.name for p in self.params), combo)))
            if any(isinstance(x, int) and x == 0 for v, x in point.items() if v in self.nonvanishing):
                continue
            if all(
                not isinstance(x, int) or self.domains.get(v, Domain()).contains(x) for v, x in point.items()
            ):
                yield point

    def fix(self, variable: str, value: int) -> "IndexedFamily":
        exprs = tuple(sorted((*self.exprs, (variable, sympy.Integer(value)))))
        return IndexedFamily(self.params, exprs, self.note, self.domains, self.nonvanishing)


def _symbol(name: str) -> sympy.Symbol:
    return sympy.Symbol(name, integer=True)


def _parameter_names(taken: Sequence[str], count: int) -> list[str]:
    names = [n for n in PARAMETER_NAMES if n not in taken]
    return names[:count]


def _term_expr(term: Monomial, values: Mapping[str, sympy.Expr]) -> sympy.Expr:
    expr = sympy.Integer(term.coefficient)
    for var, k in term.powers:
        expr *= values[var] ** k
    for var, base in term.exponentials:
        expr *= sympy.Integer(base) ** values[var]
    for var in term.factorials:
        expr *= sympy.factorial(values[var])
    return expr


def to_sympy(eq: NormalizedEquation, values: Mapping[str, sympy.Expr] | None = None) -> sympy.Expr:
    values = values or {v: _symbol(v) for v in eq.variables}
    return sum((_term_expr(t, values) for t in eq.terms), sympy.Integer(eq.constant))


def _parameter_for(domain: Domain, name: str, offset: int = 0, step: int = 1, floor_at: int | None = None) -> Parameter:
    """Parameter ``t`` for ``v = offset + step*t`` respecting ``domain`` and ``v >= floor_at``."""
    lo = domain.lo
    if floor_at is not None:
        lo = floor_at if lo is None else max(lo, floor_at)
    lower = None if lo is None else -((offset - lo) // step)
    upper = None if domain.hi is None else (domain.hi - offset) // step
    return Parameter(name, lower, upper)


# --------------------------------------------------------------------------- #
# Product forms
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class ProductForm:
    """``prod(forms) - target == scale * source``."""

    forms: tuple[AffineForm, ...]
    target: int
    scale: int = 1
    origin: str = ""

    def reduced(self) -> "ProductForm | None":
        """Divide out form contents; ``None`` when their product does not divide the target."""
        contents = [f.content() or 1 for f in self.forms]
        total = 1
        for c in contents:
            total *= c
        if self.target % total:
            return None
        return ProductForm(
            tuple(f.scaled_down(c) for f, c in zip(self.forms, contents)), self.target // total, self.scale, self.origin
        )

    def render(self) -> str:
        return "*".join(f"({f.render()})" for f in self.forms) + f" = {self.target}"

    def to_dict(self) -> dict:
        return {
            "forms": [[dict(f.coefficients), f.constant] for f in self.forms],
            "target": self.target,
            "scale": self.scale,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ProductForm":
        forms = tuple(AffineForm.of(dict(coefs), const) for coefs, const in data["forms"])
        return cls(forms, int(data["target"]), int(data.get("scale", 1)))


def product_identity_holds(eq: NormalizedEquation, pf: ProductForm) -> bool:
    symbols = {v: _symbol(v) for v in {*eq.variables, *(v for f in pf.forms for v in f.variables)}}
    prod_expr = sympy.Integer(1)
    for f in pf.forms:
        prod_expr *= sum((c * symbols[v] for v, c in f.coefficients), sympy.Integer(f.constant))
    return sympy.expand(prod_expr - pf.target - pf.scale * to_sympy(eq, symbols)) == 0


def factor_pair_solve(
    pf: ProductForm,
    variables: Sequence[str],
    domains: Mapping[str, Domain] | None = None,
    nonvanishing: frozenset[str] = frozenset(),
    factor_limit: int = FACTOR_LIMIT,
) -> Verdict:
    """Enumerate ordered factorizations of the target and solve each linear system.

    Raises:
        ZeroTarget: the target is zero.
        BudgetExceeded: the target is beyond the factorization ceiling.
    """
    if pf.target == 0:
        raise ZeroTarget("product equals zero")
    names = tuple(variables)
    domains = domains or {}
    certificate = Certificate("factor-enumeration", pf.to_dict())
    reduced = pf.reduced()
    if reduced is None:
        return Verdict.no_solution(names, certificate)
    matrix = [[f.coefficient(v) for v in names] for f in reduced.forms]
    points: set[tuple[int, ...]] = set()
    families = []
    for combo in ordered_factorizations(reduced.target, len(reduced.forms), factor_limit):
        rhs = [value - f.constant for value, f in zip(combo, reduced.forms)]
        verdict = solve_linear_system(matrix, rhs, names, domains, nonvanishing)
        if verdict.status is Status.FINITE:
            for point in verdict.solutions:
                assignment = dict(zip(names, point))
                if _admissible(assignment, domains, nonvanishing):
                    points.add(point)
        elif verdict.status is Status.FAMILY:
            families.extend(verdict.families)
    if families:
        return Verdict.family(names, families, sorted(points))
    if not points:
        return Verdict.no_solution(names, certificate)
    return Verdict.finite(names, sorted(points), FACTOR_ENUMERATION)


def zero_form_families(
    pf: ProductForm,
    variables: Sequence[str],
    domains: Mapping[str, Domain] | None = None,
    nonvanishing: frozenset[str] = frozenset(),
) -> Verdict:
    """``prod(forms) = 0``: the union over forms of ``form = 0``."""
    names = tuple(variables)
    points: set[tuple[int, ...]] = set()
    families = []
    for form in pf.forms:
        verdict = solve_linear([form.coefficient(v) for v in names], -form.constant, names, domains, nonvanishing)
        if verdict.status is Status.FAMILY:
            families.extend(f for f in verdict.families if f.dimension)
            points.update(f.particular for f in verdict.families if not f.dimension)
        elif verdict.status is Status.FINITE:
            points.update(p for p in verdict.solutions if _admissible(dict(zip(names, p)), domains or {}, nonvanishing))
    if families:
        return Verdict.family(names, families, sorted(points))
    if points:
        return Verdict.finite(names, sorted(points), ZERO_CASES)
    return Verdict.no_solution(names, Certificate("factor-enumeration", pf.to_dict()))


def bilinear_product_form(eq: NormalizedEquation) -> ProductForm | None:
    """``a xy + b x + c y + d = 0`` as ``(a x + c)(a y + b) = bc - ad``."""
    if len(eq.variables) != 2 or not eq.is_polynomial:
        return None
    x, y = eq.variables
    coefs = {}
    for term in eq.terms:
        key = tuple(sorted(v for v, k in term.powers if k == 1))
        if term.degree != len(key) or key not in ((x, y), (x,), (y,)):
            return None
        coefs[key] = term.coefficient
    a = coefs.get((x, y), 0)
    if not a:
        return None
    sign = 1 if a > 0 else -1
    a, b, c, d = a * sign, coefs.get((x,), 0) * sign, coefs.get((y,), 0) * sign, eq.constant * sign
    return ProductForm((AffineForm.of({x: a}, c), AffineForm.of({y: a}, b)), b * c - a * d, a * sign, "bilinear")


def square_difference_product_form(eq: NormalizedEquation) -> ProductForm | None:
    """Completed squares ``k1 P^2 - k2 Q^2 = N`` with ``k1*k2`` a square factor as a difference of squares."""
    try:
        centered = complete_square_reduce(eq)
    except NotApplicable:
        return None
    if len(centered.components) != 2:
        return None
    p, q = sorted(centered.components, key=lambda c: -c.weight)
    if p.weight <= 0 or q.weight >= 0:
        return None
    root = exact_root(-p.weight * q.weight, 2)
    if root is None:
        return None
    left = {p.variable: p.weight * p.alpha}
    plus = AffineForm.of({**left, q.variable: root * q.alpha}, p.weight * p.beta + root * q.beta)
    minus = AffineForm.of({**left, q.variable: -root * q.alpha}, p.weight * p.beta - root * q.beta)
    return ProductForm((minus, plus), p.weight * centered.target, centered.scale * p.weight, "difference of squares")


def hint_product_form(eq: NormalizedEquation) -> ProductForm | None:
    hint = eq.hints.product
    if hint is None:
        return None
    candidate = ProductForm(hint.forms, hint.target, 1, "as written")
    if product_identity_holds(eq, candidate):
        return candidate
    flipped = ProductForm(hint.forms, hint.target, -1, "as written")
    return flipped if product_identity_holds(eq, flipped) else None


def product_forms(eq: NormalizedEquation) -> list[ProductForm]:
    found = []
    for discover in (hint_product_form, bilinear_product_form, square_difference_product_form):
        pf = discover(eq)
        if pf is not None:
            found.append(pf)
    return found


# --------------------------------------------------------------------------- #
# Helpers shared by the solvers below
# --------------------------------------------------------------------------- #


def _admissible(point: Mapping[str, int], domains: Mapping[str, Domain], nonvanishing: frozenset[str]) -> bool:
    if any(point.get(v) == 0 for v in nonvanishing):
        return False
    return all(domains.get(v, Domain()).contains(x) for v, x in point.items())


def _univariate_coefficients(eq: NormalizedEquation, variable: str) -> list[int]:
    degree = eq.degree_in(variable)
    coefs = [0] * (degree + 1)
    coefs[0] = eq.constant
    for term in eq.terms:
        if term.variables != {variable} or not term.is_polynomial:
            raise NotApplicable("not a univariate polynomial")
        coefs[term.power_of(variable)] += term.coefficient
    return coefs


def _rational_line_families(
    slope: Fraction,
    intercept: Fraction,
    free: str,
    dependent: str,
    domains: Mapping[str, Domain],
    nonvanishing: frozenset[str],
    note: str,
) -> list[IndexedFamily]:
    """``dependent = slope*free + intercept`` restricted to integral points."""
    modulus = lcm(slope.denominator, intercept.denominator)
    families = []
    (name,) = _parameter_names((free, dependent), 1)
    t = _symbol(name)
    for r in range(modulus):
        value = slope * r + intercept
        if value.denominator != 1:
            continue
        free_expr = r + modulus * t
        dep_expr = sympy.Rational(slope.numerator, slope.denominator) * free_expr + sympy.Rational(
            intercept.numerator, intercept.denominator
        )
        param = _parameter_for(domains.get(free, Domain()), name, r, modulus)
        families.append(
            IndexedFamily(
                (param,),
                tuple(sorted(((free, sympy.expand(free_expr)), (dependent, sympy.expand(dep_expr))))),
                note,
                dict(domains),
                nonvanishing,
            )
        )
    return families


# --------------------------------------------------------------------------- #
# Discriminant analysis
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class DiscriminantAnalysis:
    """``a x^2 + (b1 y + b0) x + (c2 y^2 + c1 y + c0) = 0`` with ``Delta = A y^2 + B y + C``."""

    pivot: str
    other: str
    a: int
    b1: int
    b0: int
    c2: int
    c1: int
    c0: int

    @property
    def A(self) -> int:
        return self.b1 * self.b1 - 4 * self.a * self.c2

    @property
    def B(self) -> int:
        return 2 * self.b1 * self.b0 - 4 * self.a * self.c1

    @property
    def C(self) -> int:
        return self.b0 * self.b0 - 4 * self.a * self.c0

    def delta(self, y: int) -> int:
        return self.A * y * y + self.B * y + self.C

    def roots(self, y: int, k: int) -> list[int]:
        b = self.b1 * y + self.b0
        xs = set()
        for root in (k, -k):
            q, r = divmod(-b + root, 2 * self.a)
            if not r:
                xs.add(q)
        return sorted(xs)

    @property
    def route(self) -> str:
        if self.A < 0:
            return "range"
        if self.A == 0:
            return "constant" if self.B == 0 else "linear"
        return "product" if is_square(self.A) else "pell"


def discriminant_analysis(eq: NormalizedEquation, pivot: str) -> DiscriminantAnalysis:
    if len(eq.variables) != 2 or pivot not in eq.variables or not eq.is_polynomial:
        raise NotApplicable("discriminant analysis needs a two-variable polynomial")
    (other,) = [v for v in eq.variables if v != pivot]
    coefs: dict[tuple[int, int], int] = {}
    for term in eq.terms:
        i, j = term.power_of(pivot), term.power_of(other)
        if i > 2 or (i == 2 and j) or (i == 1 and j > 1) or (i == 0 and j > 2):
            raise NotApplicable("not quadratic in the pivot with low-degree coefficients")
        coefs[(i, j)] = term.coefficient
    a = coefs.get((2, 0), 0)
    if not a:
        raise NotApplicable(f"{pivot} is not squared")
    return DiscriminantAnalysis(
        pivot,
        other,
        a,
        coefs.get((1, 1), 0),
        coefs.get((1, 0), 0),
        coefs.get((0, 2), 0),
        coefs.get((0, 1), 0),
        eq.constant,
    )


def discriminant_y_range(da: DiscriminantAnalysis) -> tuple[int, int] | None:
    """Integer interval containing every ``y`` with ``Delta(y) >= 0`` when ``A < 0``."""
    disc = da.B * da.B - 4 * da.A * da.C
    if disc < 0:
        return None
    center = Fraction(-da.B, 2 * da.A)
    half = Fraction(isqrt(disc) + 1, 2 * abs(da.A))
    return floor(center - half), ceil(center + half)


def discriminant_equation(da: DiscriminantAnalysis) -> NormalizedEquation:
    """``k^2 - A y^2 - B y - C = 0`` in the auxiliary ``k`` and the other variable."""
    return NormalizedEquation.from_expansion(
        {
            (((AUX, 2),), (), ()): Fraction(1),
            (((da.other, 2),), (), ()): Fraction(-da.A),
            (((da.other, 1),), (), ()): Fraction(-da.B),
            CONSTANT: Fraction(-da.C),
        }
    )


def discriminant_solve(
    eq: NormalizedEquation,
    pivot: str,
    domains: Mapping[str, Domain] | None = None,
    nonvanishing: frozenset[str] = frozenset(),
    factor_limit: int = FACTOR_LIMIT,
    pell_options: Mapping[str, int] | None = None,
) -> Verdict:
    """Treat ``eq`` as a quadratic in ``pivot`` whose discriminant must be a square."""
    da = discriminant_analysis(eq, pivot)
    domains = domains or {}
    names = eq.variables
    certificate = Certificate("discriminant", {"pivot": pivot, "route": da.route, "A": da.A, "B": da.B, "C": da.C})

    def record(points: set, y: int, k: int) -> None:
        for x in da.roots(y, k):
            point = {pivot: x, da.other: y}
            if _admissible(point, domains, nonvanishing):
                points.add(tuple(point[v] for v in names))

    route = da.route
    if route == "range":
        span = discriminant_y_range(da)
        points: set[tuple[int, ...]] = set()
        if span is not None:
            certificate = Certificate("discriminant", {**certificate.data, "lo": span[0], "hi": span[1]})
            for y in range(span[0], span[1] + 1):
                value = da.delta(y)
                if value >= 0 and is_square(value):
                    record(points, y, isqrt(value))
        if not points:
            return Verdict.no_solution(names, certificate)
        return Verdict.finite(names, sorted(points), DISCRIMINANT_RANGE)

    if route == "constant":
        if da.C < 0 or not is_square(da.C):
            return Verdict.no_solution(names, certificate)
        k = isqrt(da.C)
        families = []
        for sign in sorted({1, -1} if k else {1}):
            slope = Fraction(-da.b1, 2 * da.a)
            intercept = Fraction(-da.b0 + sign * k, 2 * da.a)
            families += _rational_line_families(
                slope, intercept, da.other, pivot, domains, nonvanishing, f"discriminant constant {da.C}"
            )
        if not families:
            return Verdict.no_solution(names, certificate)
        return Verdict.family(names, families)

    if route == "linear":
        raise NotApplicable("discriminant linear in the other variable")

    if route == "product":
        s = isqrt(da.A)
        disc = da.B * da.B - 4 * da.A * da.C
        if disc == 0:
            families = []
            for sign in (1, -1):
                # k = sign * (2A y + B) / (2s)
                slope = Fraction(-da.b1, 2 * da.a) + Fraction(sign * 2 * da.A, 4 * s * da.a)
                intercept = Fraction(-da.b0, 2 * da.a) + Fraction(sign * da.B, 4 * s * da.a)
                families += _rational_line_families(
                    slope, intercept, da.other, pivot, domains, nonvanishing, "discriminant is a perfect square"
                )
            if not families:
                return Verdict.no_solution(names, certificate)
            return Verdict.family(names, families)
        y = da.other
        forms = (
            AffineForm.of({y: 2 * da.A, AUX: -2 * s}, da.B),
            AffineForm.of({y: 2 * da.A, AUX: 2 * s}, da.B),
        )
        pf = ProductForm(forms, disc, 1, "discriminant")
        inner = factor_pair_solve(pf, (AUX, y), {y: domains.get(y, Domain())}, frozenset(), factor_limit)
        points = set()
        for k, yv in inner.solutions:
            record(points, yv, k)
        if not points:
            return Verdict.no_solution(names, Certificate("discriminant", {**certificate.data, **pf.to_dict()}))
        return Verdict.finite(names, sorted(points), FACTOR_ENUMERATION)

    reduction = reduce_to_pell(discriminant_equation(da))
    pell = solve_pell(reduction.form, **(pell_options or {}))
    if pell.status is Status.NO_SOLUTION:
        return Verdict.no_solution(names, pell.certificate)
    if pell.status is not Status.FAMILY:
        return Verdict.inconclusive(names)
    (k_var, k_alpha, k_beta), (y_var, y_alpha, y_beta) = reduction.map.components
    if k_var != AUX:
        raise NotApplicable("unexpected Pell orientation")
    two_a = 2 * da.a
    x_rec = Recovery.of(
        pivot,
        Fraction(1, two_a * k_alpha),
        Fraction(-da.b1, two_a * y_alpha),
        (Fraction(da.b1 * y_beta, y_alpha) - da.b0 - Fraction(k_beta, k_alpha)) / two_a,
    )
    y_rec = Recovery.of(da.other, Fraction(0), Fraction(1, y_alpha), Fraction(-y_beta, y_alpha))
    result = back_transform(pell.families[0], BackMap((x_rec, y_rec)), 10, domains, nonvanishing)
    if result.classification == "none":
        return Verdict.no_solution(names, result.certificate)
    return Verdict.family(names, [result.family])


def discriminant_pivots(eq: NormalizedEquation) -> list[str]:
    """Variables usable as a pivot, best route first."""
    order = {"range": 0, "constant": 1, "product": 2, "pell": 3}
    ranked = []
    for var in eq.variables:
        try:
            route = discriminant_analysis(eq, var).route
        except NotApplicable:
            continue
        if route in order:
            ranked.append((order[route], var))
    return [v for _, v in sorted(ranked)]


# --------------------------------------------------------------------------- #
# Separation of variables
# --------------------------------------------------------------------------- #


def separation_solve(
    eq: NormalizedEquation,
    domains: Mapping[str, Domain] | None = None,
    nonvanishing: frozenset[str] = frozenset(),
    factor_limit: int = FACTOR_LIMIT,
) -> Verdict:
    """Solve ``q(x) y + n(x) = 0`` through divisibility of a constant remainder."""
    if len(eq.variables) != 2 or not eq.is_polynomial:
        raise NotApplicable("separation needs a two-variable polynomial")
    domains = domains or {}
    names = eq.variables
    for y in names:
        (x,) = [v for v in names if v != y]
        if any(t.power_of(y) > 1 for t in eq.terms):
            continue
        q = [0] * (eq.degree_in(x) + 1)
        n = [0] * (eq.degree_in(x) + 1)
        n[0] = eq.constant
        for term in eq.terms:
            (q if term.power_of(y) else n)[term.power_of(x)] += term.coefficient
        while len(q) > 1 and q[-1] == 0:
            q.pop()
        if len(q) == 1:
            continue
        try:
            return _separate(x, y, q, n, names, domains, nonvanishing, factor_limit)
        except NotApplicable:
            continue
    raise NotApplicable("no variable separates")


def _separate(x, y, q, n, names, domains, nonvanishing, factor_limit) -> Verdict:
    symbol = _symbol(x)
    q_poly = sympy.Poly(list(reversed(q)), symbol)
    n_poly = sympy.Poly(list(reversed(n)), symbol)
    remainder = sympy.prem(n_poly, q_poly)

    families = []
    q_roots = integer_roots(q, factor_limit)
    for root in q_roots:
        if poly_eval(n, root) == 0:
            (name,) = _parameter_names(names, 1)
            param = _parameter_for(domains.get(y, Domain()), name)
            if domains.get(x, Domain()).contains(root) and not (x in nonvanishing and root == 0):
                exprs = tuple(sorted(((x, sympy.Integer(root)), (y, _symbol(name)))))
                note = f"{x} = {root} annihilates the equation"
                families.append(IndexedFamily((param,), exprs, note, dict(domains), nonvanishing))

    if remainder.is_zero:
        raise NotApplicable("exact polynomial quotient")
    if remainder.degree() <= 0:
        r = int(remainder.as_expr())
        candidates = set()
        for d in signed_divisors(r, factor_limit):
            shifted = list(q)
            shifted[0] -= d
            candidates.update(integer_roots(shifted, factor_limit))
    else:
        best = None
        for root in q_roots:
            value = poly_eval(n, root)
            if value:
                options = {root + d for d in signed_divisors(value, factor_limit)}
                if best is None or len(options) < len(best):
                    best = options
        if best is None:
            raise NotApplicable("nonconstant remainder without a linear factor")
        candidates = best

    points = set()
    for cand in sorted(candidates):
        qv = poly_eval(q, cand)
        if qv == 0:
            continue
        num = -poly_eval(n, cand)
        if num % qv:
            continue
        point = {x: cand, y: num // qv}
        if _admissible(point, domains, nonvanishing):
            points.add(tuple(point[v] for v in names))
    if families:
        return Verdict.family(names, families, sorted(points))
    if not points:
        return Verdict.no_solution(
            names, Certificate("divisor-candidates", {"variable": y, "candidates": sorted(candidates)})
        )
    return Verdict.finite(names, sorted(points), DIVISOR_CANDIDATES)


# --------------------------------------------------------------------------- #
# Power equations and the FLT eliminator
# --------------------------------------------------------------------------- #


def binomial_solve(
    eq: NormalizedEquation,
    domains: Mapping[str, Domain] | None = None,
    nonvanishing: frozenset[str] = frozenset(),
) -> Verdict:
    """``c u^a + c0 = 0`` or ``c1 u^a + c2 w^b = 0`` over the integers."""
    domains = domains or {}
    names = eq.variables
    if not eq.is_polynomial or any(len(t.powers) != 1 for t in eq.terms):
        raise NotApplicable("not a binomial power equation")
    if not eq.terms:
        raise NotApplicable("no variable terms")

    if len(eq.terms) == 1:
        (term,) = eq.terms
        (var, a), = term.powers
        if eq.constant % term.coefficient:
            data = {"divisor": abs(term.coefficient), "constant": eq.constant}
            return Verdict.no_solution(names, Certificate("content", data))
        root = exact_root(-eq.constant // term.coefficient, a)
        values = set() if root is None else ({root, -root} if a % 2 == 0 else {root})
        points = [(v,) for v in sorted(values) if _admissible({var: v}, domains, nonvanishing)]
        if not points:
            data = {"argument": "power", "equation": eq.render()}
            return Verdict.no_solution(names, Certificate("sign-magnitude", data))
        return Verdict.finite(names, points, ZERO_CASES)

    if len(eq.terms) != 2 or eq.constant:
        raise NotApplicable("not a binomial power equation")
    t1, t2 = eq.terms
    (u, a), = t1.powers
    (w, b), = t2.powers
    if u == w:
        raise NotApplicable("single variable")
    c1, c2 = t1.coefficient, t2.coefficient
    families = []
    points = {tuple(0 for _ in names)} if _admissible({u: 0, w: 0}, domains, nonvanishing) else set()

    if a == b:
        ratio = Fraction(-c2, c1)
        p = exact_root(ratio.numerator, a)
        q = exact_root(ratio.denominator, a)
        if p is not None and q is not None:
            (name,) = _parameter_names(names, 1)
            t = _symbol(name)
            for sign in ({1, -1} if a % 2 == 0 and p else {1}):
                exprs = tuple(sorted(((u, sign * p * t), (w, q * t))))
                note = f"{u}/{w} = {sign * p}/{q}"
                families.append(IndexedFamily((Parameter(name, None),), exprs, note, dict(domains), nonvanishing))
    else:
        if abs(c1) != abs(c2):
            raise NotApplicable("unequal exponents need coefficients of equal magnitude")
        epsilon = -c2 // c1
        g = gcd(a, b)
        a1, b1 = a // g, b // g
        (name,) = _parameter_names(names, 1)
        s = _symbol(name)
        for sigma, tau in product((1, -1), repeat=2):
            if sigma**a != epsilon * tau**b:
                continue
            exprs = tuple(sorted(((u, sigma * s**b1), (w, tau * s**a1))))
            families.append(
                IndexedFamily((Parameter(name, 0),), exprs, f"|{u}|^{a} = |{w}|^{b}", dict(domains), nonvanishing)
            )
    if families:
        return Verdict.family(names, families, sorted(points))
    if points:
        return Verdict.finite(names, sorted(points), ZERO_CASES)
    return Verdict.no_solution(names, Certificate("sign-magnitude", {"argument": "power", "equation": eq.render()}))


@dataclass(frozen=True)
class FltSlot:
    coefficient_root: int
    sign: int
    variable: str | None
    exponent: int


def flt_check(
    eq: NormalizedEquation,
    domains: Mapping[str, Domain] | None = None,
    nonvanishing: frozenset[str] = frozenset(),
) -> tuple[Certificate, Verdict]:
    """Recognize ``A^n + B^n = C^n`` with ``n >= 3``; solve the cases where one slot vanishes."""
    domains = domains or {}
    if not eq.is_polynomial or any(len(t.powers) != 1 for t in eq.terms):
        raise NotApplicable("terms are not single-variable powers")
    slot_count = len(eq.terms) + (1 if eq.constant else 0)
    if slot_count != 3 or len({t.powers[0][0] for t in eq.terms}) != len(eq.terms):
        raise NotApplicable("not a three-slot power equation")
    exponents = [t.powers[0][1] for t in eq.terms]
    g = 0
    for k in exponents:
        g = gcd(g, k)
    for n in range(3, g + 1):
        if g % n:
            continue
        slots = []
        for term in eq.terms:
            root = exact_root(abs(term.coefficient), n)
            if root is None:
                break
            (var, k), = term.powers
            slots.append(FltSlot(root, 1 if term.coefficient > 0 else -1, var, k // n))
        else:
            if eq.constant:
                root = exact_root(abs(eq.constant), n)
                if root is None:
                    continue
                slots.append(FltSlot(root, 1 if eq.constant > 0 else -1, None, 0))
            break
    else:
        raise NotApplicable("no common exponent n >= 3 with n-th power coefficients")

    certificate = Certificate(
        "flt",
        {
            "n": n,
            "rewrite": [[s.sign, s.coefficient_root, s.variable, s.exponent] for s in slots],
            "claim": "every solution makes one slot vanish",
        },
    )
    names = eq.variables
    points: set[tuple[int, ...]] = set()
    families = []
    for slot in slots:
        if slot.variable is None or not _admissible({slot.variable: 0}, domains, nonvanishing):
            continue
        reduced = eq.substitute({slot.variable: 0})
        if not reduced.terms:
            if reduced.constant == 0:
                verdict = Verdict.finite((), [()], ZERO_CASES)
            else:
                verdict = Verdict.no_solution((), certificate)
        else:
            verdict = binomial_solve(reduced, domains, nonvanishing)
        lifted = lift_fixed(verdict, slot.variable, 0, names)
        points.update(lifted.solutions)
        families.extend(lifted.families)
    if families:
        return certificate, Verdict.family(names, families, sorted(points), certificate)
    if points:
        return certificate, Verdict.finite(names, sorted(points), ZERO_CASES, certificate)
    return certificate, Verdict.no_solution(names, certificate)


def lift_fixed(
    verdict: Verdict,
    variable: str,
    value: int,
    names: Sequence[str],
    domains: Mapping[str, Domain] | None = None,
    nonvanishing: frozenset[str] = frozenset(),
) -> Verdict:
    """Re-express a verdict on a substituted equation over the full variable list.

    Variables absent from both the substituted equation and the fixed one are
    free, so their points become lattice families.
    """
    names = tuple(names)
    points = []
    families = [f.fix(variable, value) for f in verdict.families]
    for sol in verdict.solutions:
        point = dict(zip(verdict.variables, sol))
        point[variable] = value
        free = [v for v in names if v not in point]
        if not free:
            points.append(tuple(point[v] for v in names))
            continue
        particular = tuple(point.get(v, 0) for v in names)
        basis = tuple(tuple(int(v == f) for v in names) for f in free)
        families.append(AffineLatticeFamily(names, particular, basis, dict(domains or {}), nonvanishing))
    status = Status.FAMILY if families and verdict.status is not Status.INCONCLUSIVE else verdict.status
    solutions = tuple(sorted(set(points)))
    return Verdict(status, names, verdict.certificate, solutions, verdict.completeness, tuple(families))


# --------------------------------------------------------------------------- #
# Isolated linear variables
# --------------------------------------------------------------------------- #


def isolated_variable(eq: NormalizedEquation) -> tuple[str, int] | None:
    """Variable occurring once, linearly and alone, with the smallest coefficient."""
    best = None
    for var in eq.variables:
        terms = eq.terms_with(var)
        if len(terms) != 1:
            continue
        (term,) = terms
        if term.variables != {var} or term.signature != (((var, 1),), (), ()):
            continue
        key = (abs(term.coefficient), var)
        if best is None or key < best[0]:
            best = (key, (var, term.coefficient))
    return None if best is None else best[1]


def isolated_linear_solve(
    eq: NormalizedEquation,
    domains: Mapping[str, Domain] | None = None,
    nonvanishing: frozenset[str] = frozenset(),
    state_budget: int = 10**7,
    family_limit: int = 64,
) -> Verdict:
    """``A z + g = 0`` with ``z`` isolated: ``z = -g / A`` on the residue classes where ``A | g``."""
    found = isolated_variable(eq)
    if found is None:
        raise NotApplicable("no isolated linear variable")
    z, coef = found
    domains = domains or {}
    if domains.get(z, Domain()) != Domain():
        raise NotApplicable(f"{z} has a restricted domain")
    g = NormalizedEquation(tuple(t for t in eq.terms if t.variables != {z}), eq.constant, eq.nonvanishing - {z})
    others = g.variables
    if not others:
        raise NotApplicable("remaining part is constant")
    names = eq.variables
    modulus = abs(coef)
    symbols = dict(zip(others, (_symbol(n) for n in _parameter_names(names, len(others)))))

    if modulus == 1:
        params = tuple(
            _parameter_for(domains.get(v, _natural_if_needed(eq, v)), symbols[v].name) for v in others
        )
        values = {v: symbols[v] for v in others}
        exprs = {**values, z: sympy.expand(-to_sympy(g, values) / coef)}
        note = f"{z} = -({_render_rest(g)})/{coef}"
        family = IndexedFamily(params, tuple(sorted(exprs.items())), note, dict(domains), nonvanishing)
        return Verdict.family(names, [family])

    states = satisfying_states(g, modulus, {v: domains.get(v, _natural_if_needed(eq, v)) for v in others}, state_budget)
    if not states.states:
        data = {
            "modulus": modulus,
            "states": states.checked,
            "claim": f"no state tuple satisfies f = 0 (mod {modulus})",
        }
        return Verdict.no_solution(names, Certificate("modular", data))
    if len(states.states) > family_limit:
        raise NotApplicable(f"{len(states.states)} residue classes")

    families = []
    for state in sorted(states.states):
        params = []
        values: dict[str, sympy.Expr] = {}
        notes = []
        for var, rep in zip(states.variables, state):
            profile = states.profiles[var]
            notes.append(profile.describe(rep))
            if profile.is_exact(rep):
                values[var] = sympy.Integer(rep)
                continue
            symbol = symbols[var]
            values[var] = rep + profile.period * symbol
            floor_at = None if profile.signed else profile.preperiod
            domain = domains.get(var, _natural_if_needed(eq, var))
            params.append(_parameter_for(domain, symbol.name, rep, profile.period, floor_at))
        z_expr = -to_sympy(g, values) / coef
        exprs = {**{v: sympy.expand(e) for v, e in values.items()}, z: z_expr}
        note = f"{_render_rest(g)} = 0 (mod {modulus}) when " + ", ".join(notes)
        families.append(IndexedFamily(tuple(params), tuple(sorted(exprs.items())), note, dict(domains), nonvanishing))
    return Verdict.family(names, families)


def _natural_if_needed(eq: NormalizedEquation, var: str) -> Domain:
    if var in eq.exponential_variables() or var in eq.factorial_variables():
        return Domain.natural()
    return Domain()


def _render_rest(g: NormalizedEquation) -> str:
    return g.render()[: -len(" = 0")]


# --------------------------------------------------------------------------- #
# Ordered magnitude
# --------------------------------------------------------------------------- #


def ordered_magnitude_solve(
    eq: NormalizedEquation,
    domains: Mapping[str, Domain] | None = None,
    nonvanishing: frozenset[str] = frozenset(),
) -> Verdict:
    """``c * prod(v) + sum(a_v v) + b = 0`` with every variable nonzero.

    With ``v_p`` of largest magnitude, ``|c| * prod(|v_i|, i != p) <= sum|a| + |b|``,
    so the remaining variables range over a finite set.
    """
    domains = domains or {}
    names = eq.variables
    if len(names) < 2 or not eq.is_polynomial:
        raise NotApplicable("needs a polynomial in at least two variables")
    full = [t for t in eq.terms if t.variables == set(names) and all(k == 1 for _, k in t.powers)]
    linear = {t.powers[0][0]: t.coefficient for t in eq.terms if t.degree == 1}
    if len(full) != 1 or len(eq.terms) != 1 + len(linear):
        raise NotApplicable("not a product-plus-linear form")
    if not all(v in nonvanishing or (domains.get(v, Domain()).lo or 0) >= 1 for v in names):
        raise NotApplicable("variables may vanish")
    c = full[0].coefficient
    budget = (sum(abs(a) for a in linear.values()) + abs(eq.constant)) // abs(c)

    def tuples(count: int, cap: int) -> Iterator[tuple[int, ...]]:
        if count == 0:
            yield ()
            return
        for magnitude in range(1, cap + 1):
            for rest in tuples(count - 1, cap // magnitude):
                for sign in (1, -1):
                    yield (sign * magnitude, *rest)

    points = set()
    for pivot in names:
        rest = [v for v in names if v != pivot]
        for combo in tuples(len(rest), budget):
            assign = dict(zip(rest, combo))
            prod_value = 1
            for value in combo:
                prod_value *= value
            denom = c * prod_value + linear.get(pivot, 0)
            numer = -(sum(linear.get(v, 0) * assign[v] for v in rest) + eq.constant)
            if denom == 0:
                if numer == 0:
                    raise NotApplicable(f"{pivot} free once the others are fixed")
                continue
            if numer % denom:
                continue
            assign[pivot] = numer // denom
            if _admissible(assign, domains, nonvanishing) and eq.evaluate(assign) == 0:
                points.add(tuple(assign[v] for v in names))
    if not points:
        data = {"argument": "ordered-magnitude", "budget": budget}
        return Verdict.no_solution(names, Certificate("sign-magnitude", data))
    return Verdict.finite(names, sorted(points), "ordered-magnitude")


# --------------------------------------------------------------------------- #
# Univariate equations and common factors
# --------------------------------------------------------------------------- #


def univariate_polynomial_solve(
    eq: NormalizedEquation,
    domains: Mapping[str, Domain] | None = None,
    nonvanishing: frozenset[str] = frozenset(),
    factor_limit: int = FACTOR_LIMIT,
) -> Verdict:
    if len(eq.variables) != 1:
        raise NotApplicable("not univariate")
    (var,) = eq.variables
    coefs = _univariate_coefficients(eq, var)
    roots = integer_roots(coefs, factor_limit)
    points = [(r,) for r in roots if _admissible({var: r}, domains or {}, nonvanishing)]
    if not points:
        return Verdict.no_solution(
            (var,), Certificate("divisor-candidates", {"variable": var, "candidates": roots, "constant": coefs[0]})
        )
    return Verdict.finite((var,), points, DIVISOR_CANDIDATES)


def common_factor(eq: NormalizedEquation) -> tuple[str, int] | None:
    """Variable ``v`` dividing every term as a polynomial factor (constant must be 0)."""
    if eq.constant or not eq.terms:
        return None
    for var in eq.variables:
        k = min(t.power_of(var) for t in eq.terms)
        if k >= 1:
            return var, k
    return None


def divide_out(eq: NormalizedEquation, var: str, k: int) -> NormalizedEquation:
    expansion = {}
    for term in eq.terms:
        powers = tuple((v, e - (k if v == var else 0)) for v, e in term.powers)
        powers = tuple((v, e) for v, e in powers if e)
        expansion[(powers, term.exponentials, term.factorials)] = Fraction(term.coefficient)
    return NormalizedEquation.from_expansion(expansion, eq.nonvanishing)
