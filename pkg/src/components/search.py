"""Bound inference, symmetry detection, exhaustive enumeration and probing."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement, permutations, product
from math import factorial, isqrt
from typing import Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from src.components.errors import BudgetExceeded, NotApplicable, Timeout
from src.components.expr import Domain, Monomial, NormalizedEquation, complete_square_reduce
from src.components.verdict import Certificate
from src.utils.numtheory import floor_root, signed_divisors

logger = logging.getLogger(__name__)

INF = float("inf")
Bound = float | int

DEFAULT_BOX = (-100, 100)

MAGNITUDE_CAP = 10**100
"""Finite bounds saturate here: upper bounds beyond it become unbounded, lower bounds clip to it."""


def _factorial_cap() -> int:
    n, value = 0, 1
    while value <= MAGNITUDE_CAP:
        n += 1
        value *= n
    return n


FACTORIAL_CAP = _factorial_cap()


# --------------------------------------------------------------------------- #
# Interval arithmetic over Z plus infinities, saturating at MAGNITUDE_CAP
# --------------------------------------------------------------------------- #


def _saturate(lo: Bound, hi: Bound) -> tuple[Bound, Bound]:
    """Widen an interval so every finite end lies within the cap."""
    if lo == INF:
        lo = MAGNITUDE_CAP
    elif lo != -INF:
        if lo < -MAGNITUDE_CAP:
            lo = -INF
        elif lo > MAGNITUDE_CAP:
            lo = MAGNITUDE_CAP
    if hi == -INF:
        hi = -MAGNITUDE_CAP
    elif hi != INF:
        if hi > MAGNITUDE_CAP:
            hi = INF
        elif hi < -MAGNITUDE_CAP:
            hi = -MAGNITUDE_CAP
    return lo, hi


def _sum_range(ranges: Iterable[tuple[Bound, Bound]], constant: int = 0) -> tuple[Bound, Bound]:
    """Interval sum with exact integer arithmetic on the finite ends."""
    los, his = [constant], [constant]
    for lo, hi in ranges:
        los.append(lo)
        his.append(hi)
    lo = -INF if -INF in los else sum(los)
    hi = INF if INF in his else sum(his)
    return _saturate(lo, hi)


def _mul(a: Bound, b: Bound) -> Bound:
    if a == 0 or b == 0:
        return 0
    return a * b


def _interval_mul(x: tuple[Bound, Bound], y: tuple[Bound, Bound]) -> tuple[Bound, Bound]:
    corners = [_mul(a, b) for a in x for b in y]
    return _saturate(min(corners), max(corners))


def _bounds(domain: Domain) -> tuple[Bound, Bound]:
    return _saturate(-INF if domain.lo is None else domain.lo, INF if domain.hi is None else domain.hi)


def _capped_pow(base: int, exponent: int) -> Bound:
    """``|base| ** exponent``, or INF once it certainly passes the cap."""
    base = abs(base)
    if base > 1 and exponent * (base.bit_length() - 1) > MAGNITUDE_CAP.bit_length():
        return INF
    return base**exponent


def _power_range(lo: Bound, hi: Bound, k: int) -> tuple[Bound, Bound]:
    def odd(v: Bound) -> Bound:
        if v in (INF, -INF):
            return v
        magnitude = _capped_pow(v, k)
        return magnitude if v >= 0 else -magnitude

    if k % 2:
        return _saturate(odd(lo), odd(hi))
    if lo <= 0 <= hi:
        top = max(-lo, hi)
        return 0, (top if top == INF else _saturate(0, _capped_pow(top, k))[1])
    near, far = (lo, hi) if lo > 0 else (-hi, -lo)
    return _saturate(_capped_pow(near, k), far if far == INF else _capped_pow(far, k))


def _exponential_range(base: int, lo: Bound, hi: Bound) -> tuple[Bound, Bound]:
    lo = max(lo, 0)
    top = INF if hi == INF else _capped_pow(base, hi)
    if base > 0:
        return _saturate(_capped_pow(base, lo), top)
    if top == INF:
        return -INF, INF
    return -top, top


def _factorial_range(lo: Bound, hi: Bound) -> tuple[Bound, Bound]:
    lo = max(lo, 0)
    bottom = MAGNITUDE_CAP if lo > FACTORIAL_CAP else factorial(int(lo))
    top = INF if hi == INF or hi > FACTORIAL_CAP else factorial(int(hi))
    return _saturate(bottom, top)


def term_range(term: Monomial, intervals: Mapping[str, Domain]) -> tuple[Bound, Bound]:
    """Range of a monomial's value when each variable lies in its interval."""
    result: tuple[Bound, Bound] = _saturate(term.coefficient, term.coefficient)
    for var in sorted(term.variables):
        lo, hi = _bounds(intervals[var])
        factor: tuple[Bound, Bound] = (1, 1)
        k = term.power_of(var)
        if k:
            factor = _power_range(lo, hi, k)
        base = term.base_of(var)
        if base is not None:
            factor = _interval_mul(factor, _exponential_range(base, lo, hi))
        if term.has_factorial(var):
            factor = _interval_mul(factor, _factorial_range(lo, hi))
        result = _interval_mul(result, factor)
    return result


# --------------------------------------------------------------------------- #
# Bound inference
# --------------------------------------------------------------------------- #


@dataclass
class BoundSet:
    """Per-variable intervals with the rule that proved each finite side."""

    intervals: dict[str, Domain]
    provenance: dict[str, str] = field(default_factory=dict)
    infeasible: Certificate | None = None
    candidates: dict[str, tuple[int, ...]] = field(default_factory=dict)
    """Finite value sets from modular tail cuts or divisibility of the constant."""
    sources: dict[str, str] = field(default_factory=dict)
    """Rule behind each candidate set."""

    @property
    def complete(self) -> bool:
        return all(d.is_finite for d in self.intervals.values())

    @property
    def proved(self) -> bool:
        """Finite everywhere with no interval resting on the user box."""
        return self.complete and "user-box" not in self.provenance.values()

    def box_size(self) -> int | None:
        total = 1
        for var, domain in self.intervals.items():
            size = len(self.candidates[var]) if var in self.candidates else domain.size()
            if size is None:
                return None
            total *= size
        return total

    def values(self, variable: str) -> list[int]:
        if variable in self.candidates:
            domain = self.intervals[variable]
            return [v for v in self.candidates[variable] if domain.contains(v)]
        return list(self.intervals[variable].values())

    def restrict(self, variable: str, values: Iterable[int], rule: str) -> None:
        """Confine ``variable`` to a finite value set, intersecting any set already held."""
        known = self.candidates.get(variable)
        kept = tuple(sorted(v for v in set(values) if known is None or v in known))
        self.candidates[variable] = kept
        self.sources.setdefault(variable, rule)
        if kept:
            self.tighten(variable, kept[0], kept[-1], rule)
        else:
            self.tighten(variable, 1, 0, rule)

    def tighten(self, variable: str, lo: int | None, hi: int | None, rule: str) -> bool:
        old = self.intervals[variable]
        new = old.intersect(lo, hi)
        if new == old:
            return False
        self.intervals[variable] = new
        if rule == "user-box":
            self.provenance[variable] = rule
        elif new.is_finite:
            self.provenance.setdefault(variable, rule)
        return True


def _invert_power(lo: Bound, hi: Bound, k: int) -> tuple[int | None, int | None]:
    """Integer ``v`` range with ``v^k`` in ``[lo, hi]``."""
    if k % 2 == 0:
        if hi == INF:
            return None, None
        if hi < 0:
            return 1, 0
        r = floor_root(int(hi), k)
        return -r, r
    upper = None if hi == INF else (floor_root(int(hi), k) if hi >= 0 else -_ceil_root(int(-hi), k))
    lower = None if lo == -INF else (-floor_root(int(-lo), k) if lo <= 0 else _ceil_root(int(lo), k))
    return lower, upper


def _ceil_root(n: int, k: int) -> int:
    r = floor_root(n, k)
    return r if r**k == n else r + 1


def _invert_exponential(base: int, lo: Bound, hi: Bound) -> tuple[int | None, int | None]:
    if base < 0 or hi == INF:
        return None, None
    if hi < 1:
        return 1, 0
    upper, value = 0, base
    while value <= hi:
        upper += 1
        value *= base
    lower = 0
    if lo != -INF and lo > 1:
        value = 1
        while value < lo:
            lower += 1
            value *= base
    return lower, upper


def _invert_factorial(lo: Bound, hi: Bound) -> tuple[int | None, int | None]:
    if hi == INF:
        return None, None
    if hi < 1:
        return 1, 0
    upper, value = 0, 1
    while value * (upper + 1) <= hi:
        upper += 1
        value *= upper
    # 0! = 1! so the bound is on the argument, not a strict inverse
    return 0, max(upper, 1)


def _single_rule(term: Monomial) -> str | None:
    var = next(iter(term.variables))
    if term.power_of(var) and term.is_polynomial:
        return "proved-even-power" if term.power_of(var) % 2 == 0 else "proved-odd-power"
    if term.base_of(var) is not None and not term.powers and not term.factorials:
        return "proved-exponential-log"
    if term.has_factorial(var) and not term.powers and not term.exponentials:
        return "proved-factorial"
    return None


def _sign_certificate(argument: str, lo: Bound, hi: Bound) -> Certificate:
    return Certificate(
        "sign-magnitude",
        {"argument": argument, "lo": None if lo == -INF else lo, "hi": None if hi == INF else hi},
    )


def _propagate(eq: NormalizedEquation, bounds: BoundSet, rounds: int, check: Callable[[], None] | None) -> None:
    for _ in range(rounds):
        if check is not None:
            check()
        if any(d.is_empty for d in bounds.intervals.values()):
            bounds.infeasible = _sign_certificate("empty-interval", 1, 0)
            return
        ranges = [term_range(t, bounds.intervals) for t in eq.terms]
        lo, hi = _sum_range(ranges, eq.constant)
        if lo > 0 or hi < 0:
            bounds.infeasible = _sign_certificate("term-range", lo, hi)
            return
        changed = False
        for i, term in enumerate(eq.terms):
            if len(term.variables) != 1:
                continue
            rule = _single_rule(term)
            if rule is None:
                continue
            rest_lo, rest_hi = _sum_range((r for j, r in enumerate(ranges) if j != i), eq.constant)
            # the term equals minus the rest; divide through by its coefficient
            f_lo, f_hi = _divide_interval(-rest_hi, -rest_lo, term.coefficient)
            var = next(iter(term.variables))
            if term.is_polynomial:
                new = _invert_power(f_lo, f_hi, term.power_of(var))
            elif term.exponentials:
                new = _invert_exponential(term.base_of(var), f_lo, f_hi)
            else:
                new = _invert_factorial(f_lo, f_hi)
            changed |= bounds.tighten(var, new[0], new[1], rule)
        if not changed:
            break
    if bounds.infeasible is None and any(d.is_empty for d in bounds.intervals.values()):
        bounds.infeasible = _sign_certificate("empty-interval", 1, 0)


def _divide_interval(lo: Bound, hi: Bound, c: int) -> tuple[Bound, Bound]:
    """Integers ``f`` with ``c * f`` in ``[lo, hi]``, as a closed interval."""
    if c < 0:
        lo, hi, c = -hi, -lo, -c
    new_lo = lo if lo == -INF else -((-int(lo)) // c)
    new_hi = hi if hi == INF else int(hi) // c
    return new_lo, new_hi


def _divisor_rule(eq: NormalizedEquation, bounds: BoundSet) -> None:
    """A variable dividing every term must divide the constant."""
    if not eq.constant or not eq.terms:
        return
    for var in eq.variables:
        if not all(t.power_of(var) for t in eq.terms):
            continue
        try:
            values = signed_divisors(eq.constant)
        except BudgetExceeded:
            return
        bounds.restrict(var, values, "proved-divisor")


def _reciprocal_rule(eq: NormalizedEquation, bounds: BoundSet) -> None:
    hint = eq.hints.reciprocal
    if hint is None:
        return
    total_lo: Bound = 0
    total_hi: Bound = 0
    for coef, powers in hint.reciprocals:
        variables = [v for v, _ in powers]
        positive = all((bounds.intervals[v].lo or 0) >= 1 for v in variables if v in bounds.intervals)
        if positive:
            total_lo += min(coef, 0)
            total_hi += max(coef, 0)
        else:
            total_lo -= abs(coef)
            total_hi += abs(coef)
    linear = [(sig, c) for sig, c in hint.polynomial if sig != ((), (), ())]
    constant = sum((c for sig, c in hint.polynomial if sig == ((), (), ())), 0)
    # polynomial part = -(reciprocal sum), so it lies in [-total_hi, -total_lo]
    if not linear:
        if constant < -total_hi or constant > -total_lo:
            bounds.infeasible = Certificate(
                "sign-magnitude",
                {"argument": "reciprocal", "constant": str(constant), "lo": str(total_lo), "hi": str(total_hi)},
            )
        return
    if len(linear) != 1:
        return
    (powers, exps, facts), a = linear[0]
    if exps or facts or len(powers) != 1 or powers[0][1] != 1:
        return
    var = powers[0][0]
    lo_val = (-total_hi - constant) / a
    hi_val = (-total_lo - constant) / a
    lo_val, hi_val = min(lo_val, hi_val), max(lo_val, hi_val)
    lo_int = -int((-lo_val) // 1)
    hi_int = int(hi_val // 1)
    bounds.tighten(var, lo_int, hi_int, "proved-reciprocal")


def _completed_square_rule(eq: NormalizedEquation, bounds: BoundSet) -> None:
    try:
        centered = complete_square_reduce(eq)
    except NotApplicable:
        return
    if any(c.weight <= 0 for c in centered.components):
        return
    if centered.target < 0:
        bounds.infeasible = Certificate(
            "sign-magnitude", {"argument": "completed-square", "target": centered.target, "form": centered.render()}
        )
        return
    for comp in centered.components:
        r = isqrt(centered.target // comp.weight)
        lo, hi = sorted(((-r - comp.beta), (r - comp.beta)))
        a = abs(comp.alpha)
        if comp.alpha < 0:
            lo, hi = -hi, -lo
        bounds.tighten(comp.variable, -((-lo) // a), hi // a, "proved-completed-square")


def _discriminant_rule(eq: NormalizedEquation, bounds: BoundSet) -> None:
    from src.components.algebraic import discriminant_analysis, discriminant_y_range

    if len(eq.variables) != 2:
        return
    for pivot in eq.variables:
        try:
            da = discriminant_analysis(eq, pivot)
        except NotApplicable:
            continue
        if da.A >= 0:
            continue
        span = discriminant_y_range(da)
        if span is None:
            bounds.infeasible = Certificate(
                "discriminant", {"pivot": pivot, "route": "range", "A": da.A, "B": da.B, "C": da.C}
            )
            return
        bounds.tighten(da.other, span[0], span[1], "proved-discriminant")


def effective_domains(eq: NormalizedEquation, domains: Mapping[str, Domain]) -> dict[str, Domain]:
    """Declared domains, with exponential and factorial variables clipped to N0."""
    result = {}
    restricted = eq.exponential_variables() | eq.factorial_variables()
    for var in eq.variables:
        domain = domains.get(var, Domain())
        result[var] = domain.intersect(0, None) if var in restricted else domain
    return result


def sign_contradiction(eq: NormalizedEquation, domains: Mapping[str, Domain] | None = None) -> Certificate | None:
    """Term-range contradiction over the declared domains alone, before any tightening."""
    intervals = effective_domains(eq, domains or {})
    if any(d.is_empty for d in intervals.values()):
        return _sign_certificate("empty-interval", 1, 0)
    lo, hi = _sum_range((term_range(t, intervals) for t in eq.terms), eq.constant)
    if lo > 0 or hi < 0:
        return _sign_certificate("term-range", lo, hi)
    return None


def infer_bounds(
    eq: NormalizedEquation,
    domains: Mapping[str, Domain] | None = None,
    tail_cuts: Mapping[str, "object"] | None = None,
    box: tuple[int, int] | None = None,
    rounds: int = 8,
    check: Callable[[], None] | None = None,
) -> BoundSet:
    """Provable per-variable intervals, or an infeasibility certificate.

    Args:
        eq: Equation to bound.
        domains: Declared domains; missing variables default to Z.
        tail_cuts: Modular tail cuts restricting variables to finite value sets.
        box: User box applied to every variable (tagged ``user-box``, not a proof).
        rounds: Propagation rounds; a round that tightens nothing ends propagation early.
        check: Called before every round; raises to abandon the inference (deadline).
    """
    intervals = effective_domains(eq, domains or {})
    bounds = BoundSet(dict(intervals))
    for var, domain in intervals.items():
        if domain.is_finite:
            bounds.provenance[var] = "domain"
    for var, cut in (tail_cuts or {}).items():
        if var in bounds.intervals:
            bounds.restrict(var, cut.values, "modular-tail")
    for rule in (_divisor_rule, _reciprocal_rule, _completed_square_rule, _discriminant_rule):
        rule(eq, bounds)
        if bounds.infeasible is not None:
            return bounds
    _propagate(eq, bounds, rounds, check)
    if box is not None and bounds.infeasible is None:
        for var in bounds.intervals:
            bounds.tighten(var, box[0], box[1], "user-box")
    return bounds


# --------------------------------------------------------------------------- #
# Symmetry
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class Symmetry:
    groups: tuple[tuple[str, ...], ...] = ()
    cycles: tuple[tuple[str, ...], ...] = ()

    @property
    def trivial(self) -> bool:
        return not self.groups and not self.cycles


def _invariant(eq: NormalizedEquation, mapping: Mapping[str, str]) -> bool:
    return eq.rename(mapping) == eq


def detect_symmetry(eq: NormalizedEquation) -> Symmetry:
    """Full symmetric groups from invariant transpositions, plus one invariant cycle."""
    names = list(eq.variables)
    parent = {v: v for v in names}

    def find(v: str) -> str:
        while parent[v] != v:
            v = parent[v]
        return v

    for a, b in combinations_with_replacement(names, 2):
        if a != b and find(a) != find(b) and _invariant(eq, {a: b, b: a}):
            parent[find(b)] = find(a)
    members: dict[str, list[str]] = {}
    for v in names:
        members.setdefault(find(v), []).append(v)
    groups = tuple(sorted(tuple(sorted(g)) for g in members.values() if len(g) > 1))
    if groups or not 3 <= len(names) <= 6:
        return Symmetry(groups)
    first, rest = names[0], names[1:]
    for order in permutations(rest):
        cycle = (first, *order)
        mapping = {cycle[i]: cycle[(i + 1) % len(cycle)] for i in range(len(cycle))}
        if _invariant(eq, mapping):
            return Symmetry((), (cycle,))
    return Symmetry()


def sign_flip_invariant(eq: NormalizedEquation) -> bool:
    """``f(-v) = +-f(v)`` for the whole variable vector, so solutions come in +- pairs."""
    if not eq.terms or not eq.is_polynomial:
        return False
    parities = {t.degree % 2 for t in eq.terms}
    if len(parities) != 1:
        return False
    return parities == {0} or eq.constant == 0


# --------------------------------------------------------------------------- #
# Evaluation and enumeration
# --------------------------------------------------------------------------- #


@lru_cache(maxsize=4096)
def _factorial(n: int) -> int:
    return factorial(n)


def compile_evaluator(eq: NormalizedEquation, variables: Sequence[str]) -> Callable[[Sequence[int]], int]:
    index = {v: i for i, v in enumerate(variables)}
    compiled = [
        (
            t.coefficient,
            tuple((index[v], k) for v, k in t.powers),
            tuple((index[v], b) for v, b in t.exponentials),
            tuple(index[v] for v in t.factorials),
        )
        for t in eq.terms
    ]
    constant = eq.constant

    def evaluate(point: Sequence[int]) -> int:
        total = constant
        for coef, powers, exps, facts in compiled:
            value = coef
            for i, k in powers:
                value *= point[i] ** k
            for i, b in exps:
                if point[i] < 0:
                    return 1  # outside N0: never a solution
                value *= b ** point[i]
            for i in facts:
                if point[i] < 0:
                    return 1
                value *= _factorial(point[i])
            total += value
        return total

    return evaluate


@dataclass
class Enumeration:
    solutions: list[tuple[int, ...]]
    complete: bool
    evaluations: int


class _Deadline:
    def __init__(self, deadline: float | None):
        self.deadline = deadline
        self.count = 0

    def tick(self) -> None:
        self.count += 1
        if self.deadline is not None and self.count % 2048 == 0 and time.monotonic() > self.deadline:
            raise Timeout("enumeration deadline")


def enumerate_box(
    equations: NormalizedEquation | Sequence[NormalizedEquation],
    bounds: BoundSet,
    symmetry: Symmetry | None = None,
    budget: int = 10**8,
    nonvanishing: frozenset[str] = frozenset(),
    deadline: float | None = None,
    sign_split: bool = False,
) -> Enumeration:
    """All points of the bounded box that solve every equation.

    Symmetric groups are enumerated as sorted tuples and expanded back over
    their orbits; an invariant cycle keeps only rotation-minimal tuples.
    """
    eqs = [equations] if isinstance(equations, NormalizedEquation) else list(equations)
    names = tuple(sorted(bounds.intervals))
    evaluators = [compile_evaluator(eq, names) for eq in eqs]
    symmetry = symmetry or Symmetry()
    clock = _Deadline(deadline)
    values = {v: bounds.values(v) for v in names}

    def admissible(point: Sequence[int]) -> bool:
        for v, x in zip(names, point):
            if v in nonvanishing and x == 0:
                return False
            if not bounds.intervals[v].contains(x):
                return False
            if v in bounds.candidates and x not in bounds.candidates[v]:
                return False
        return True

    blocks: list[tuple[str, ...]] = list(symmetry.groups)
    grouped = {v for g in blocks for v in g}
    for g in blocks:
        union = sorted({x for v in g for x in values[v]})
        for v in g:
            values[v] = union
    cycle = symmetry.cycles[0] if symmetry.cycles and not blocks else None
    sign = sign_split and not blocks and cycle is None
    singles = [v for v in names if v not in grouped]
    if sign and singles:
        first = singles[0]
        values[first] = [x for x in values[first] if x >= 0]

    iterators = [combinations_with_replacement(values[g[0]], len(g)) for g in blocks]
    iterators += [((x,) for x in values[v]) for v in singles]
    order = [v for g in blocks for v in g] + singles
    position = [order.index(v) for v in names]
    cycle_index = [names.index(v) for v in cycle] if cycle else []

    found: set[tuple[int, ...]] = set()
    evaluations = 0
    complete = True
    for combo in product(*[list(it) for it in iterators]):
        flat = [x for part in combo for x in part]
        point = tuple(flat[position[i]] for i in range(len(names)))
        if cycle_index:
            rotated = [point[i] for i in cycle_index]
            if any(rotated[r:] + rotated[:r] < rotated for r in range(1, len(rotated))):
                continue
        if evaluations >= budget:
            complete = False
            break
        evaluations += 1
        clock.tick()
        if any(ev(point) != 0 for ev in evaluators):
            continue
        for image in _orbit(point, names, blocks, cycle_index, sign):
            if admissible(image):
                found.add(image)
    return Enumeration(sorted(found), complete, evaluations)


def _orbit(point, names, blocks, cycle_index, sign) -> Iterator[tuple[int, ...]]:
    images = {tuple(point)}
    for group in blocks:
        idx = [names.index(v) for v in group]
        expanded = set()
        for image in images:
            for perm in set(permutations([image[i] for i in idx])):
                new = list(image)
                for i, x in zip(idx, perm):
                    new[i] = x
                expanded.add(tuple(new))
        images = expanded
    if cycle_index:
        expanded = set()
        for image in images:
            for r in range(len(cycle_index)):
                new = list(image)
                for j, i in enumerate(cycle_index):
                    new[i] = image[cycle_index[(j + r) % len(cycle_index)]]
                expanded.add(tuple(new))
        images = expanded
    if sign:
        images |= {tuple(-x for x in image) for image in images}
    return iter(sorted(images))


# --------------------------------------------------------------------------- #
# Probing
# --------------------------------------------------------------------------- #


@dataclass
class ProbeReport:
    hits: list[tuple[int, ...]]
    evaluations: int
    box: dict[str, tuple[int, int]]
    min_abs: int | None = None
    log_quantiles: tuple[float, ...] = ()
    exhausted: bool = False


def _shell(center: Sequence[int], radius: int, box: Sequence[tuple[int, int]]) -> Iterator[tuple[int, ...]]:
    if radius == 0:
        yield tuple(center)
        return
    n = len(center)

    def span(j: int, r: int) -> range:
        return range(max(box[j][0], center[j] - r), min(box[j][1], center[j] + r) + 1)

    for i in range(n):
        before = [span(j, radius - 1) for j in range(i)]
        edge = [x for x in (center[i] - radius, center[i] + radius) if box[i][0] <= x <= box[i][1]]
        after = [span(j, radius) for j in range(i + 1, n)]
        for point in product(*before, edge, *after):
            yield point


def probe(
    equations: NormalizedEquation | Sequence[NormalizedEquation],
    domains: Mapping[str, Domain],
    box: tuple[int, int] = DEFAULT_BOX,
    budget: int = 10**6,
    nonvanishing: frozenset[str] = frozenset(),
    deadline: float | None = None,
) -> ProbeReport:
    """Spiral outward over L-infinity shells so small values are tried first."""
    eqs = [equations] if isinstance(equations, NormalizedEquation) else list(equations)
    names = tuple(sorted({v for eq in eqs for v in eq.variables}))
    merged = {}
    for eq in eqs:
        merged.update(effective_domains(eq, domains))
    limits = []
    for v in names:
        clipped = merged.get(v, Domain()).intersect(*box)
        limits.append((clipped.lo, clipped.hi))
    report = ProbeReport([], 0, dict(zip(names, limits)))
    if any(lo > hi for lo, hi in limits):
        report.exhausted = True
        return report
    center = [min(max(0, lo), hi) for lo, hi in limits]
    max_radius = max((max(c - lo, hi - c) for c, (lo, hi) in zip(center, limits)), default=0)
    evaluators = [compile_evaluator(eq, names) for eq in eqs]
    clock = _Deadline(deadline)
    samples: list[float] = []
    min_abs: int | None = None
    for radius in range(max_radius + 1):
        for point in _shell(center, radius, limits):
            if report.evaluations >= budget:
                break
            report.evaluations += 1
            clock.tick()
            if any(point[i] == 0 for i, v in enumerate(names) if v in nonvanishing):
                continue
            values = [ev(point) for ev in evaluators]
            magnitude = max(abs(v) for v in values)
            min_abs = magnitude if min_abs is None else min(min_abs, magnitude)
            if len(samples) < 100_000:
                samples.append(float(np.log10(1.0 + float(min(magnitude, 10**300)))))
            if magnitude == 0:
                report.hits.append(point)
        else:
            continue
        break
    else:
        report.exhausted = True
    report.min_abs = min_abs
    if samples:
        report.log_quantiles = tuple(float(q) for q in np.quantile(np.asarray(samples), [0.0, 0.5, 0.9]))
    report.hits.sort()
    logger.debug("probe: %d evaluations, %d hits", report.evaluations, len(report.hits))
    return report


def box_domains(names: Iterable[str], box: tuple[int, int]) -> dict[str, Domain]:
    return {v: Domain.interval(*box) for v in names}
