"""Expression model: monomials, normalized equations, problems and the
canonical rewrites applied to them (normalization, denominator clearing and
completing the square).

Polynomial arithmetic during normalization works on *expansions*: plain dicts
mapping a monomial signature to a ``Fraction`` coefficient.  Only the final
result is converted to integer ``Monomial`` terms.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, gcd, lcm
from typing import Iterable, Mapping, Union

from src.components.errors import (
    DomainViolation,
    NestedFraction,
    NotApplicable,
    UnsupportedTerm,
    ZeroDenominatorConstant,
)

logger = logging.getLogger(__name__)

Powers = tuple[tuple[str, int], ...]
Exponentials = tuple[tuple[str, int], ...]
Factorials = tuple[str, ...]
Signature = tuple[Powers, Exponentials, Factorials]
Expansion = dict[Signature, Fraction]

CONSTANT: Signature = ((), (), ())


# --------------------------------------------------------------------------- #
# Raw expression tree produced by the parser
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Power:
    operand: "Node"
    exponent: int


@dataclass(frozen=True)
class Exponential:
    base: int
    variable: str


@dataclass(frozen=True)
class Factorial:
    variable: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


Node = Union[Num, Var, Power, Exponential, Factorial, Neg, BinOp]


@dataclass(frozen=True)
class RawEquation:
    lhs: Node
    rhs: Node


# --------------------------------------------------------------------------- #
# Domains
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class Domain:
    """Integer range ``[lo, hi]``; ``None`` marks an unbounded side."""

    lo: int | None = None
    hi: int | None = None

    @classmethod
    def integers(cls) -> "Domain":
        return cls()

    @classmethod
    def positive(cls) -> "Domain":
        return cls(1, None)

    @classmethod
    def natural(cls) -> "Domain":
        return cls(0, None)

    @classmethod
    def interval(cls, lo: int, hi: int) -> "Domain":
        return cls(lo, hi)

    @property
    def name(self) -> str:
        if self.lo is None and self.hi is None:
            return "Z"
        if self.hi is None and self.lo == 1:
            return "N"
        if self.hi is None and self.lo == 0:
            return "N0"
        lo = "" if self.lo is None else str(self.lo)
        hi = "" if self.hi is None else str(self.hi)
        return f"[{lo},{hi}]"

    @property
    def is_finite(self) -> bool:
        return self.lo is not None and self.hi is not None

    @property
    def is_empty(self) -> bool:
        return self.is_finite and self.lo > self.hi

    @property
    def admits_negative(self) -> bool:
        return self.lo is None or self.lo < 0

    @property
    def is_symmetric(self) -> bool:
        if self.lo is None and self.hi is None:
            return True
        return self.is_finite and self.lo == -self.hi

    def contains(self, value: int) -> bool:
        if self.lo is not None and value < self.lo:
            return False
        return self.hi is None or value <= self.hi

    def intersect(self, lo: int | None, hi: int | None) -> "Domain":
        new_lo = self.lo if lo is None else (lo if self.lo is None else max(lo, self.lo))
        new_hi = self.hi if hi is None else (hi if self.hi is None else min(hi, self.hi))
        return Domain(new_lo, new_hi)

    def values(self) -> range:
        if not self.is_finite:
            raise ValueError(f"domain {self.name} is unbounded")
        return range(self.lo, self.hi + 1)

    def size(self) -> int | None:
        if not self.is_finite:
            return None
        return max(0, self.hi - self.lo + 1)


# --------------------------------------------------------------------------- #
# Monomials and affine forms
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class Monomial:
    """``coefficient * prod(v^k) * prod(b^v) * prod(v!)`` with sorted parts."""

    coefficient: int
    powers: Powers = ()
    exponentials: Exponentials = ()
    factorials: Factorials = ()

    @property
    def signature(self) -> Signature:
        return (self.powers, self.exponentials, self.factorials)

    @property
    def variables(self) -> frozenset[str]:
        names = {v for v, _ in self.powers}
        names.update(v for v, _ in self.exponentials)
        names.update(self.factorials)
        return frozenset(names)

    @property
    def degree(self) -> int:
        return sum(k for _, k in self.powers)

    @property
    def is_polynomial(self) -> bool:
        return not self.exponentials and not self.factorials

    def power_of(self, variable: str) -> int:
        return dict(self.powers).get(variable, 0)

    def base_of(self, variable: str) -> int | None:
        return dict(self.exponentials).get(variable)

    def has_factorial(self, variable: str) -> bool:
        return variable in self.factorials

    def evaluate(self, assignment: Mapping[str, int]) -> int:
        value = self.coefficient
        for var, k in self.powers:
            value *= assignment[var] ** k
        for var, base in self.exponentials:
            exponent = assignment[var]
            if exponent < 0:
                raise DomainViolation(f"negative exponent {var}={exponent}")
            value *= base**exponent
        for var in self.factorials:
            arg = assignment[var]
            if arg < 0:
                raise DomainViolation(f"negative factorial argument {var}={arg}")
            value *= factorial(arg)
        return value

    def sort_key(self) -> tuple:
        return (
            -self.degree,
            tuple((v, -k) for v, k in self.powers),
            self.exponentials,
            self.factorials,
        )

    def render_factors(self) -> str:
        parts = [v if k == 1 else f"{v}^{k}" for v, k in self.powers]
        parts += [f"{b}^{v}" if b > 0 else f"({b})^{v}" for v, b in self.exponentials]
        parts += [f"{v}!" for v in self.factorials]
        return "*".join(parts)

    def render(self) -> str:
        factors = self.render_factors()
        if not factors:
            return str(self.coefficient)
        if self.coefficient == 1:
            return factors
        if self.coefficient == -1:
            return f"-{factors}"
        return f"{self.coefficient}*{factors}"


@dataclass(frozen=True)
class AffineForm:
    """``sum(c_v * v) + constant`` over integers."""

    coefficients: tuple[tuple[str, int], ...]
    constant: int = 0

    @classmethod
    def of(cls, coefficients: Mapping[str, int], constant: int = 0) -> "AffineForm":
        return cls(tuple(sorted((v, c) for v, c in coefficients.items() if c)), constant)

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.coefficients)

    def coefficient(self, variable: str) -> int:
        return dict(self.coefficients).get(variable, 0)

    def content(self) -> int:
        g = 0
        for _, c in self.coefficients:
            g = gcd(g, c)
        return gcd(g, self.constant)

    def scaled_down(self, divisor: int) -> "AffineForm":
        return AffineForm(
            tuple((v, c // divisor) for v, c in self.coefficients),
            self.constant // divisor,
        )

    def evaluate(self, assignment: Mapping[str, int]) -> int:
        return sum(c * assignment[v] for v, c in self.coefficients) + self.constant

    def render(self) -> str:
        terms = [Monomial(c, ((v, 1),)) for v, c in self.coefficients]
        if self.constant or not terms:
            terms.append(Monomial(self.constant))
        return _join_terms(terms)


@dataclass(frozen=True)
class AffineMap:
    """Per-variable change of variables ``X = alpha * v + beta``."""

    components: tuple[tuple[str, int, int], ...]

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for v, _, _ in self.components)

    def apply(self, assignment: Mapping[str, int]) -> tuple[int, ...]:
        return tuple(a * assignment[v] + b for v, a, b in self.components)

    def invert(self, values: Iterable[int]) -> dict[str, int] | None:
        result: dict[str, int] = {}
        for (var, alpha, beta), value in zip(self.components, values):
            q, r = divmod(value - beta, alpha)
            if r:
                return None
            result[var] = q
        return result


# --------------------------------------------------------------------------- #
# Equation hints recovered from the raw tree
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class ReciprocalHint:
    """``sum(c_i / D_i) + polynomial = 0`` before clearing denominators."""

    reciprocals: tuple[tuple[Fraction, Powers], ...]
    polynomial: tuple[tuple[Signature, Fraction], ...]


@dataclass(frozen=True)
class ProductHint:
    """``prod(forms) = target`` as written by the user."""

    forms: tuple[AffineForm, ...]
    target: int


@dataclass(frozen=True)
class EquationHints:
    reciprocal: ReciprocalHint | None = None
    product: ProductHint | None = None


# --------------------------------------------------------------------------- #
# Normalized equations and problems
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class NormalizedEquation:
    """``sum(terms) + constant = 0`` with distinct signatures in canonical order."""

    terms: tuple[Monomial, ...]
    constant: int = 0
    nonvanishing: frozenset[str] = field(default=frozenset(), compare=False)
    hints: EquationHints = field(default_factory=EquationHints, compare=False, repr=False)

    @classmethod
    def from_expansion(
        cls,
        expansion: Mapping[Signature, Fraction | int],
        nonvanishing: Iterable[str] = (),
        hints: EquationHints | None = None,
    ) -> "NormalizedEquation":
        terms = []
        constant = 0
        for sig, coef in expansion.items():
            if coef == 0:
                continue
            if Fraction(coef).denominator != 1:
                raise ValueError(f"non-integral coefficient {coef}")
            if sig == CONSTANT:
                constant = int(coef)
            else:
                terms.append(Monomial(int(coef), *sig))
        terms.sort(key=Monomial.sort_key)
        return cls(tuple(terms), constant, frozenset(nonvanishing), hints or EquationHints())

    @property
    def variables(self) -> tuple[str, ...]:
        names: set[str] = set()
        for term in self.terms:
            names |= term.variables
        return tuple(sorted(names))

    @property
    def is_linear(self) -> bool:
        return all(t.is_polynomial and t.degree == 1 for t in self.terms)

    @property
    def is_polynomial(self) -> bool:
        return all(t.is_polynomial for t in self.terms)

    def exponential_variables(self) -> frozenset[str]:
        return frozenset(v for t in self.terms for v, _ in t.exponentials)

    def factorial_variables(self) -> frozenset[str]:
        return frozenset(v for t in self.terms for v in t.factorials)

    def degree_in(self, variable: str) -> int:
        return max((t.power_of(variable) for t in self.terms), default=0)

    def terms_with(self, variable: str) -> tuple[Monomial, ...]:
        return tuple(t for t in self.terms if variable in t.variables)

    def content(self) -> int:
        g = self.constant
        for term in self.terms:
            g = gcd(g, term.coefficient)
        return abs(g)

    def expansion(self) -> Expansion:
        result: Expansion = {t.signature: Fraction(t.coefficient) for t in self.terms}
        if self.constant:
            result[CONSTANT] = Fraction(self.constant)
        return result

    def evaluate(self, assignment: Mapping[str, int]) -> int:
        return sum(t.evaluate(assignment) for t in self.terms) + self.constant

    def negated(self) -> "NormalizedEquation":
        return NormalizedEquation(
            tuple(Monomial(-t.coefficient, *t.signature) for t in self.terms),
            -self.constant,
            self.nonvanishing,
        )

    def substitute(self, values: Mapping[str, int]) -> "NormalizedEquation":
        """Fix some variables to integers and re-collect the remaining terms."""
        result: Expansion = {}
        for term in self.terms:
            coef = term.coefficient
            powers, exps, facts = [], [], []
            for var, k in term.powers:
                if var in values:
                    coef *= values[var] ** k
                else:
                    powers.append((var, k))
            for var, base in term.exponentials:
                if var in values:
                    if values[var] < 0:
                        raise DomainViolation(f"negative exponent {var}={values[var]}")
                    coef *= base ** values[var]
                else:
                    exps.append((var, base))
            for var in term.factorials:
                if var in values:
                    if values[var] < 0:
                        raise DomainViolation(f"negative factorial argument {var}={values[var]}")
                    coef *= factorial(values[var])
                else:
                    facts.append(var)
            _accumulate(result, (tuple(powers), tuple(exps), tuple(facts)), Fraction(coef))
        _accumulate(result, CONSTANT, Fraction(self.constant))
        kept = self.nonvanishing - set(values)
        return NormalizedEquation.from_expansion(result, kept)

    def rename(self, mapping: Mapping[str, str]) -> "NormalizedEquation":
        result: Expansion = {}
        for term in self.terms:
            powers = tuple(sorted((mapping.get(v, v), k) for v, k in term.powers))
            exps = tuple(sorted((mapping.get(v, v), b) for v, b in term.exponentials))
            facts = tuple(sorted(mapping.get(v, v) for v in term.factorials))
            _accumulate(result, (powers, exps, facts), Fraction(term.coefficient))
        _accumulate(result, CONSTANT, Fraction(self.constant))
        return NormalizedEquation.from_expansion(
            result, {mapping.get(v, v) for v in self.nonvanishing}
        )

    def render(self) -> str:
        terms = list(self.terms)
        if self.constant or not terms:
            terms.append(Monomial(self.constant))
        return f"{_join_terms(terms)} = 0"


@dataclass(frozen=True)
class Problem:
    """One or more equations over shared variables with declared domains."""

    equations: tuple[NormalizedEquation, ...]
    domains: Mapping[str, Domain]
    constraints: tuple[frozenset[str], ...] = ()

    @property
    def equation(self) -> NormalizedEquation:
        return self.equations[0]

    @property
    def is_system(self) -> bool:
        return len(self.equations) > 1

    @property
    def variables(self) -> tuple[str, ...]:
        names = set(self.domains)
        for eq in self.equations:
            names.update(eq.variables)
        return tuple(sorted(names))

    @property
    def nonvanishing(self) -> frozenset[str]:
        names: set[str] = set()
        for group in self.constraints:
            names |= group
        for eq in self.equations:
            names |= eq.nonvanishing
        return frozenset(names)

    def domain(self, variable: str) -> Domain:
        return self.domains.get(variable, Domain())

    def admits(self, assignment: Mapping[str, int]) -> bool:
        if any(assignment[v] == 0 for v in self.nonvanishing if v in assignment):
            return False
        return all(self.domain(v).contains(value) for v, value in assignment.items())

    def single(self, index: int) -> "Problem":
        eq = self.equations[index]
        names = set(eq.variables)
        return Problem(
            (eq,),
            {v: d for v, d in self.domains.items() if v in names},
            tuple(g for g in self.constraints if g & names),
        )

    def render(self) -> str:
        body = " and ".join(eq.render() for eq in self.equations)
        groups: dict[str, list[str]] = {}
        for var in self.variables:
            groups.setdefault(self.domain(var).name, []).append(var)
        clauses = [f"{', '.join(names)} in {name}" for name, names in groups.items()]
        clauses += ["*".join(sorted(group)) + " != 0" for group in self.constraints]
        return f"{body} ; {', '.join(clauses)}"


# --------------------------------------------------------------------------- #
# Expansion arithmetic
# --------------------------------------------------------------------------- #


def _accumulate(target: Expansion, sig: Signature, coef: Fraction) -> None:
    value = target.get(sig, Fraction(0)) + coef
    if value:
        target[sig] = value
    else:
        target.pop(sig, None)


def _merge(a: Signature, b: Signature) -> Signature:
    powers = dict(a[0])
    for var, k in b[0]:
        powers[var] = powers.get(var, 0) + k
    bases = dict(a[1])
    for var, base in b[1]:
        bases[var] = bases.get(var, 1) * base
    if set(a[2]) & set(b[2]):
        raise UnsupportedTerm("product of a factorial with itself")
    facts = tuple(sorted(set(a[2]) | set(b[2])))
    return tuple(sorted(powers.items())), tuple(sorted(bases.items())), facts


def _multiply(a: Expansion, b: Expansion) -> Expansion:
    result: Expansion = {}
    for sa, ca in a.items():
        for sb, cb in b.items():
            _accumulate(result, _merge(sa, sb), ca * cb)
    return result


def _add(a: Expansion, b: Expansion, sign: int = 1) -> Expansion:
    result = dict(a)
    for sig, coef in b.items():
        _accumulate(result, sig, sign * coef)
    return result


def _monomial_expansion(powers: Mapping[str, int]) -> Expansion:
    return {(tuple(sorted((v, k) for v, k in powers.items() if k)), (), ()): Fraction(1)}


# A rational expression is (numerator expansion, monomial denominator).
_Rational = tuple[Expansion, dict[str, int]]


def _rational(node: Node) -> _Rational:
    if isinstance(node, Num):
        return ({CONSTANT: Fraction(node.value)} if node.value else {}), {}
    if isinstance(node, Var):
        return {(((node.name, 1),), (), ()): Fraction(1)}, {}
    if isinstance(node, Exponential):
        if node.base == 0:
            raise UnsupportedTerm(f"0^{node.variable}")
        if node.base == 1:
            return {CONSTANT: Fraction(1)}, {}
        if node.base == -1:
            raise UnsupportedTerm(f"(-1)^{node.variable}")
        return {((), ((node.variable, node.base),), ()): Fraction(1)}, {}
    if isinstance(node, Factorial):
        return {((), (), (node.variable,)): Fraction(1)}, {}
    if isinstance(node, Neg):
        num, den = _rational(node.operand)
        return {s: -c for s, c in num.items()}, den
    if isinstance(node, Power):
        if node.exponent < 0:
            raise UnsupportedTerm("negative exponent")
        num, den = _rational(node.operand)
        result: Expansion = {CONSTANT: Fraction(1)}
        for _ in range(node.exponent):
            result = _multiply(result, num)
        return result, {v: k * node.exponent for v, k in den.items()}
    if isinstance(node, BinOp):
        left_num, left_den = _rational(node.left)
        right_num, right_den = _rational(node.right)
        if node.op in "+-":
            common = {v: max(left_den.get(v, 0), right_den.get(v, 0)) for v in {*left_den, *right_den}}
            lhs = _multiply(left_num, _monomial_expansion({v: k - left_den.get(v, 0) for v, k in common.items()}))
            rhs = _multiply(right_num, _monomial_expansion({v: k - right_den.get(v, 0) for v, k in common.items()}))
            return _add(lhs, rhs, 1 if node.op == "+" else -1), common
        if node.op == "*":
            den = dict(left_den)
            for v, k in right_den.items():
                den[v] = den.get(v, 0) + k
            return _multiply(left_num, right_num), den
        if node.op == "/":
            if not right_num:
                raise ZeroDenominatorConstant("division by zero")
            if len(right_num) != 1:
                raise NestedFraction("denominator is a sum")
            (sig, coef), = right_num.items()
            if sig[1] or sig[2]:
                raise UnsupportedTerm("exponential or factorial in a denominator")
            num = _multiply(left_num, _monomial_expansion(right_den))
            num = {s: c / coef for s, c in num.items()}
            den = dict(left_den)
            for v, k in sig[0]:
                den[v] = den.get(v, 0) + k
            return num, den
    raise UnsupportedTerm(f"unsupported node {node!r}")


def _summands(node: Node, sign: int = 1) -> list[tuple[int, Node]]:
    if isinstance(node, BinOp) and node.op in "+-":
        return _summands(node.left, sign) + _summands(node.right, sign if node.op == "+" else -sign)
    if isinstance(node, Neg):
        return _summands(node.operand, -sign)
    return [(sign, node)]


def _factors(node: Node) -> list[Node]:
    if isinstance(node, BinOp) and node.op == "*":
        return _factors(node.left) + _factors(node.right)
    if isinstance(node, Power) and node.exponent >= 1 and not isinstance(node.operand, Var):
        return _factors(node.operand) * node.exponent
    return [node]


def _affine(node: Node) -> AffineForm | None:
    num, den = _rational(node)
    if den:
        return None
    coefs: dict[str, int] = {}
    constant = 0
    for (powers, exps, facts), coef in num.items():
        if exps or facts or coef.denominator != 1:
            return None
        if not powers:
            constant = int(coef)
        elif len(powers) == 1 and powers[0][1] == 1:
            coefs[powers[0][0]] = int(coef)
        else:
            return None
    if not coefs:
        return None
    return AffineForm.of(coefs, constant)


def _constant_value(node: Node) -> int | None:
    num, den = _rational(node)
    if den or any(sig != CONSTANT for sig in num):
        return None
    value = num.get(CONSTANT, Fraction(0))
    return int(value) if value.denominator == 1 else None


def _hints(raw: RawEquation) -> EquationHints:
    reciprocal = None
    reciprocals: list[tuple[Fraction, Powers]] = []
    polynomial: Expansion = {}
    eligible = True
    for sign, node in _summands(raw.lhs) + _summands(raw.rhs, -1):
        num, den = _rational(node)
        if not den:
            polynomial = _add(polynomial, num, sign)
        elif set(num) <= {CONSTANT}:
            if num:
                reciprocals.append((sign * num[CONSTANT], tuple(sorted(den.items()))))
        else:
            eligible = False
            break
    if eligible and reciprocals:
        reciprocal = ReciprocalHint(tuple(reciprocals), tuple(polynomial.items()))

    product = None
    for side, other in ((raw.lhs, raw.rhs), (raw.rhs, raw.lhs)):
        factors = _factors(side)
        target = _constant_value(other)
        if len(factors) < 2 or target is None:
            continue
        forms = [_affine(f) for f in factors]
        if all(f is not None for f in forms):
            product = ProductHint(tuple(forms), target)
            break
    return EquationHints(reciprocal, product)


# --------------------------------------------------------------------------- #
# Public rewrites
# --------------------------------------------------------------------------- #


def clear_denominators(raw: RawEquation) -> tuple[NormalizedEquation, frozenset[str]]:
    """Multiply through by the least monomial clearing every denominator."""
    num, den = _rational(BinOp("-", raw.lhs, raw.rhs))
    scale = 1
    for coef in num.values():
        scale = lcm(scale, coef.denominator)
    cleared = {sig: coef * scale for sig, coef in num.items()}
    nonvanishing = frozenset(v for v, k in den.items() if k)
    try:
        hints = _hints(raw)
    except (UnsupportedTerm, NestedFraction, ZeroDenominatorConstant):
        hints = EquationHints()
    eq = NormalizedEquation.from_expansion(cleared, nonvanishing, hints)
    if nonvanishing:
        logger.debug("cleared denominators %s: %s", sorted(nonvanishing), eq.render())
    return eq, nonvanishing


def normalize(raw: RawEquation) -> NormalizedEquation:
    return clear_denominators(raw)[0]


def evaluate(eq: NormalizedEquation, assignment: Mapping[str, int]) -> int:
    return eq.evaluate(assignment)


@dataclass(frozen=True)
class SquareComponent:
    variable: str
    weight: int
    alpha: int
    beta: int

    def render(self) -> str:
        inner = AffineForm.of({self.variable: self.alpha}, self.beta)
        square = f"{self.variable}^2" if self.alpha == 1 and self.beta == 0 else f"({inner.render()})^2"
        return square if self.weight == 1 else f"{self.weight}*{square}"


@dataclass(frozen=True)
class CenteredForm:
    """``sum(k_i * (alpha_i * v_i + beta_i)^2) = target`` equal to ``scale`` times the source."""

    components: tuple[SquareComponent, ...]
    target: int
    scale: int

    def affine_map(self) -> AffineMap:
        return AffineMap(tuple((c.variable, c.alpha, c.beta) for c in self.components))

    def render(self) -> str:
        terms = " + ".join(c.render() for c in self.components).replace("+ -", "- ")
        return f"{terms} = {self.target}"


def complete_square_reduce(eq: NormalizedEquation) -> CenteredForm:
    """Rewrite a separable quadratic as a weighted sum of squares.

    Every variable must occur as ``a*v^2 + b*v`` with no cross terms.  The
    smallest scale ``S`` is chosen for which each variable admits integers
    ``alpha, beta, k`` with ``S*(a v^2 + b v) = k (alpha v + beta)^2 - k beta^2``.
    """
    quadratic: dict[str, int] = {}
    linear: dict[str, int] = {}
    for term in eq.terms:
        if not term.is_polynomial or len(term.powers) != 1:
            raise NotApplicable("not a separable quadratic")
        (var, k), = term.powers
        if k == 2:
            quadratic[var] = term.coefficient
        elif k == 1:
            linear[var] = term.coefficient
        else:
            raise NotApplicable(f"degree {k} in {var}")
    if not quadratic or set(linear) - set(quadratic):
        raise NotApplicable("variable without a square term")

    limit = 1
    for a in quadratic.values():
        limit = lcm(limit, 4 * abs(a))
    for scale in range(1, limit + 1):
        components = []
        for var in sorted(quadratic):
            sa, sb = scale * quadratic[var], scale * linear.get(var, 0)
            found = None
            alpha = 1
            while alpha * alpha <= abs(sa):
                if sa % (alpha * alpha) == 0 and sb % (2 * sa // alpha) == 0:
                    found = alpha
                    break
                alpha += 1
            if found is None:
                break
            weight = sa // (found * found)
            components.append(SquareComponent(var, weight, found, sb // (2 * weight * found)))
        else:
            target = sum(c.weight * c.beta * c.beta for c in components) - scale * eq.constant
            return CenteredForm(tuple(components), target, scale)
    raise NotApplicable("no integral completion of squares")


def _join_terms(terms: list[Monomial]) -> str:
    text = ""
    for i, term in enumerate(terms):
        rendered = term.render()
        if i == 0:
            text = rendered
        elif rendered.startswith("-"):
            text += f" - {rendered[1:]}"
        else:
            text += f" + {rendered}"
    return text
