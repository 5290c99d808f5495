"""Generalized Pell equations ``X^2 - d Y^2 = c``: reduction from binary
quadratics, fundamental units, class representatives, orbit families and the
integrality filter for mapping orbits back to the source variables."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import gcd, isqrt, lcm
from typing import Iterator, Mapping, Sequence

from sympy.ntheory.continued_fraction import continued_fraction_periodic

from src.components.errors import NotApplicable, PerfectSquare
from src.components.expr import AffineMap, Domain, NormalizedEquation, complete_square_reduce
from src.components.verdict import Certificate, Verdict
from src.utils.numtheory import is_square

logger = logging.getLogger(__name__)

PELL_VARIABLES = ("X", "Y")
_SIGNS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


@dataclass(frozen=True)
class PellForm:
    d: int
    c: int

    def evaluate(self, x: int, y: int) -> int:
        return x * x - self.d * y * y - self.c

    def render(self) -> str:
        return f"X^2 - {self.d}*Y^2 = {self.c}"


@dataclass(frozen=True)
class Recovery:
    """``variable = (x_coef*X + y_coef*Y + constant) / denominator``."""

    variable: str
    x_coef: int
    y_coef: int
    constant: int
    denominator: int

    @classmethod
    def of(cls, variable: str, x_coef: Fraction, y_coef: Fraction, constant: Fraction) -> "Recovery":
        den = lcm(x_coef.denominator, y_coef.denominator, constant.denominator)
        nums = [int(f * den) for f in (x_coef, y_coef, constant)]
        g = gcd(gcd(*nums), den)
        if den < 0:
            g = -g
        return cls(variable, nums[0] // g, nums[1] // g, nums[2] // g, den // g)

    def value(self, x: int, y: int) -> int | None:
        q, r = divmod(self.x_coef * x + self.y_coef * y + self.constant, self.denominator)
        return None if r else q

    def render(self) -> str:
        parts = []
        for coef, name in ((self.x_coef, "X"), (self.y_coef, "Y")):
            if coef:
                parts.append(name if coef == 1 else f"-{name}" if coef == -1 else f"{coef}*{name}")
        if self.constant or not parts:
            parts.append(str(self.constant))
        numerator = " + ".join(parts).replace("+ -", "- ")
        return numerator if self.denominator == 1 else f"({numerator})/{self.denominator}"


@dataclass(frozen=True)
class BackMap:
    recoveries: tuple[Recovery, ...]

    @classmethod
    def from_affine(cls, amap: AffineMap) -> "BackMap":
        (xv, xa, xb), (yv, ya, yb) = amap.components
        return cls(
            (
                Recovery.of(xv, Fraction(1, xa), Fraction(0), Fraction(-xb, xa)),
                Recovery.of(yv, Fraction(0), Fraction(1, ya), Fraction(-yb, ya)),
            )
        )

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(sorted(r.variable for r in self.recoveries))

    @property
    def modulus(self) -> int:
        return lcm(*(abs(r.denominator) for r in self.recoveries))

    def apply(self, x: int, y: int) -> dict[str, int] | None:
        point = {}
        for rec in self.recoveries:
            value = rec.value(x, y)
            if value is None:
                return None
            point[rec.variable] = value
        return point

    def integral_mod(self, x: int, y: int) -> bool:
        return all((r.x_coef * x + r.y_coef * y + r.constant) % r.denominator == 0 for r in self.recoveries)

    def fix(self, variable: str, value: int) -> "BackMap":
        return BackMap((*self.recoveries, Recovery(variable, 0, 0, value, 1)))


@dataclass(frozen=True)
class PellReduction:
    form: PellForm
    map: AffineMap
    scale: int
    back_map: BackMap


@dataclass(frozen=True)
class OrbitFilter:
    """Admissible orbit indices ``k mod period`` for one signed base."""

    base: int
    signs: tuple[int, int]
    period: int
    indices: frozenset[int]


@dataclass(frozen=True)
class PellOrbitFamily:
    """``X + Y sqrt(d) = +-(x0 + y0 sqrt(d)) * unit^n`` over every base and integer n."""

    form: PellForm
    unit: tuple[int, int]
    bases: tuple[tuple[int, int], ...]
    back_map: BackMap | None = None
    filters: tuple[OrbitFilter, ...] | None = None
    domains: Mapping[str, Domain] = field(default_factory=dict, compare=False)
    nonvanishing: frozenset[str] = field(default=frozenset(), compare=False)
    kind: str = field(default="pell-orbit", init=False)

    @property
    def variables(self) -> tuple[str, ...]:
        return self.back_map.variables if self.back_map else PELL_VARIABLES

    def _admitted(self, base: int, signs: tuple[int, int], k: int) -> bool:
        if self.filters is None:
            return True
        for f in self.filters:
            if f.base == base and f.signs == signs:
                return k % f.period in f.indices
        return False

    def orbit(self, steps: int) -> Iterator[tuple[int, int, int, tuple[int, int], int]]:
        """Signed bases times ``unit^k`` for ``-steps < k < steps``; negative ``k`` walk the inverse unit."""
        u, v = self.unit
        d = self.form.d
        for index, (x0, y0) in enumerate(self.bases):
            for signs in _SIGNS:
                start = signs[0] * x0, signs[1] * y0
                for step, direction in ((v, 1), (-v, -1)):
                    x, y = start
                    for k in range(steps):
                        if k or direction == 1:
                            yield x, y, index, signs, direction * k
                        x, y = u * x + d * step * y, step * x + u * y

    def _point(self, x: int, y: int) -> dict[str, int] | None:
        if self.back_map is None:
            return {"X": x, "Y": y}
        point = self.back_map.apply(x, y)
        if point is None:
            return None
        if any(point[v] == 0 for v in self.nonvanishing if v in point):
            return None
        if not all(self.domains.get(v, Domain()).contains(value) for v, value in point.items()):
            return None
        return point

    def members(self, count: int) -> list[dict[str, int]]:
        """First ``count`` members ordered by ``|Y|`` then ``|X|``."""
        steps = count + 2
        while True:
            found: dict[tuple[int, int], dict[str, int]] = {}
            for x, y, base, signs, k in self.orbit(steps):
                if (x, y) in found or not self._admitted(base, signs, k):
                    continue
                point = self._point(x, y)
                if point is not None:
                    found[(x, y)] = point
            ordered = sorted(found, key=lambda xy: (abs(xy[1]), abs(xy[0]), xy[0], xy[1]))
            if len(ordered) >= count or steps > 4 * count + 64:
                return [found[xy] for xy in ordered[:count]]
            steps *= 2

    def materialize(self, limit: int = 20) -> Iterator[dict[str, int]]:
        yield from self.members(limit + 1)

    def parameters(self) -> list[tuple[str, str]]:
        return [("n", "Z")]

    def expressions(self) -> dict[str, str]:
        if self.back_map is None:
            return {"X": "X", "Y": "Y"}
        return {r.variable: r.render() for r in sorted(self.back_map.recoveries, key=lambda r: r.variable)}

    def constraints(self) -> list[str]:
        d = self.form.d
        u, v = self.unit
        bases = ", ".join(f"({x}, {y})" for x, y in self.bases)
        notes = [
            self.form.render(),
            f"X + Y*sqrt({d}) = +-(x0 + y0*sqrt({d}))*({u} + {v}*sqrt({d}))^n for (x0, y0) in {{{bases}}}",
        ]
        if self.filters is not None:
            notes.append("only orbit indices keeping the back-substitution integral")
        notes += [f"{name} in {dom.name}" for name, dom in sorted(self.domains.items()) if dom != Domain()]
        return notes

    def fix(self, variable: str, value: int) -> "PellOrbitFamily":
        back = self.back_map or BackMap(
            (Recovery("X", 1, 0, 0, 1), Recovery("Y", 0, 1, 0, 1))
        )
        return replace(self, back_map=back.fix(variable, value))


def fundamental_solution(d: int, inspection_limit: int = 1000) -> tuple[int, int]:
    """Least positive ``(u, v)`` with ``u^2 - d v^2 = 1``.

    Small ``v`` are inspected directly; beyond ``inspection_limit`` the
    convergents of the continued fraction of ``sqrt(d)`` are walked.

    Raises:
        PerfectSquare: ``d`` is a perfect square (including 0 and 1).
    """
    if d < 0:
        raise ValueError("d must be positive")
    if is_square(d):
        raise PerfectSquare(f"{d} is a perfect square")
    for v in range(1, inspection_limit + 1):
        t = 1 + d * v * v
        u = isqrt(t)
        if u * u == t:
            return u, v
    head, period = continued_fraction_periodic(0, 1, d)
    h_prev, h = 1, int(head)
    k_prev, k = 0, 1
    while h * h - d * k * k != 1:
        for a in period:
            h_prev, h = h, int(a) * h + h_prev
            k_prev, k = k, int(a) * k + k_prev
            if h * h - d * k * k == 1:
                break
    return h, k


def class_search_bound(form: PellForm, unit: tuple[int, int]) -> int:
    """Upper bound on ``|Y|`` for one representative of every orbit class."""
    u, v = unit
    epsilon = u + isqrt(v * v * form.d) + 1
    return isqrt(abs(form.c) * epsilon // form.d) + 1


def class_representatives(form: PellForm, unit: tuple[int, int], bound: int) -> list[tuple[int, int]]:
    """Pairwise inequivalent solutions with ``0 <= Y <= bound``."""
    d, c = form.d, form.c
    modulus = abs(c)
    reps: list[tuple[int, int]] = []
    for y in range(bound + 1):
        t = c + d * y * y
        if t < 0 or not is_square(t):
            continue
        x = isqrt(t)
        for candidate in ((x, y), (-x, y)):
            if any(
                (candidate[0] * rx - d * candidate[1] * ry) % modulus == 0
                and (candidate[0] * ry - rx * candidate[1]) % modulus == 0
                for rx, ry in reps
            ):
                continue
            reps.append(candidate)
    return reps


def solve_pell(
    form: PellForm,
    inspection_limit: int = 1000,
    class_search_limit: int = 10**7,
    max_d: int = 10**6,
) -> Verdict:
    """Decide ``X^2 - d Y^2 = c`` as an empty class certificate or an orbit family."""
    if is_square(form.d):
        raise PerfectSquare(f"{form.d} is a perfect square")
    if form.d > max_d:
        logger.info("d=%d beyond the Pell ceiling", form.d)
        return Verdict.inconclusive(PELL_VARIABLES)
    if form.c == 0:
        return Verdict.finite(PELL_VARIABLES, [(0, 0)], "factor-enumeration")
    unit = fundamental_solution(form.d, inspection_limit)
    bound = class_search_bound(form, unit)
    if bound > class_search_limit:
        logger.info("class search bound %d beyond limit", bound)
        return Verdict.inconclusive(PELL_VARIABLES)
    reps = class_representatives(form, unit, bound)
    if not reps:
        return Verdict.no_solution(
            PELL_VARIABLES,
            Certificate("pell-empty-class", {"d": form.d, "c": form.c, "unit": list(unit), "bound": bound}),
        )
    family = PellOrbitFamily(form, unit, tuple(reps))
    logger.debug("%s: unit %s, %d classes", form.render(), unit, len(reps))
    return Verdict.family(PELL_VARIABLES, [family])


def reduce_to_pell(eq: NormalizedEquation) -> PellReduction:
    """Map a two-variable indefinite separable quadratic to ``X^2 - d Y^2 = c``."""
    if len(eq.variables) != 2:
        raise NotApplicable("Pell reduction needs exactly two variables")
    centered = complete_square_reduce(eq)
    positive = [c for c in centered.components if c.weight > 0]
    negative = [c for c in centered.components if c.weight < 0]
    if len(positive) != 1 or len(negative) != 1:
        raise NotApplicable("form is not indefinite")
    p, q = positive[0], negative[0]
    d = -p.weight * q.weight
    c = p.weight * centered.target
    if is_square(d):
        raise NotApplicable("square discriminant factors as a difference of squares")
    if c == 0:
        raise NotApplicable("zero right-hand side")
    amap = AffineMap(((p.variable, p.weight * p.alpha, p.weight * p.beta), (q.variable, q.alpha, q.beta)))
    return PellReduction(PellForm(d, c), amap, centered.scale * p.weight, BackMap.from_affine(amap))


@dataclass(frozen=True)
class BackTransform:
    classification: str
    """``all``, ``none`` or ``some`` orbit members map to integral points."""
    family: PellOrbitFamily | None
    solutions: tuple[dict[str, int], ...]
    certificate: Certificate | None = None


def orbit_filters(family: PellOrbitFamily, back_map: BackMap) -> tuple[OrbitFilter, ...]:
    m = back_map.modulus
    u, v = family.unit
    d = family.form.d
    filters = []
    for index, (x0, y0) in enumerate(family.bases):
        for signs in _SIGNS:
            start = (signs[0] * x0 % m, signs[1] * y0 % m)
            state, k, indices = start, 0, set()
            while True:
                if back_map.integral_mod(*state):
                    indices.add(k)
                x, y = state
                state = ((u * x + d * v * y) % m, (v * x + u * y) % m)
                k += 1
                if state == start:
                    break
            filters.append(OrbitFilter(index, signs, k, frozenset(indices)))
    return tuple(filters)


def back_transform(
    family: PellOrbitFamily,
    mapping: AffineMap | BackMap,
    count: int = 10,
    domains: Mapping[str, Domain] | None = None,
    nonvanishing: frozenset[str] = frozenset(),
) -> BackTransform:
    """Restrict an orbit family to members whose preimages are integral."""
    back_map = BackMap.from_affine(mapping) if isinstance(mapping, AffineMap) else mapping
    filters = orbit_filters(family, back_map)
    admitted = sum(len(f.indices) for f in filters)
    total = sum(f.period for f in filters)
    if admitted == 0:
        certificate = Certificate(
            "pell-back-transform",
            {
                "d": family.form.d,
                "c": family.form.c,
                "unit": list(family.unit),
                "bases": [list(b) for b in family.bases],
                "modulus": back_map.modulus,
                "recoveries": [
                    [r.variable, r.x_coef, r.y_coef, r.constant, r.denominator] for r in back_map.recoveries
                ],
            },
        )
        return BackTransform("none", None, (), certificate)
    restricted = replace(
        family,
        back_map=back_map,
        filters=None if admitted == total else filters,
        domains=dict(domains or {}),
        nonvanishing=nonvanishing,
    )
    classification = "all" if admitted == total else "some"
    return BackTransform(classification, restricted, tuple(restricted.members(count)))


def check_empty_class(data: Mapping, inspection_limit: int = 1000) -> bool:
    form = PellForm(int(data["d"]), int(data["c"]))
    unit = fundamental_solution(form.d, inspection_limit)
    if list(unit) != list(data["unit"]) or int(data["bound"]) < class_search_bound(form, unit):
        return False
    return not class_representatives(form, unit, int(data["bound"]))


def check_back_transform(data: Mapping, recoveries: Sequence[Recovery] | None = None) -> bool:
    """Confirm no signed orbit of the listed bases ever maps to an integral point."""
    form = PellForm(int(data["d"]), int(data["c"]))
    unit = tuple(data["unit"])
    if unit[0] ** 2 - form.d * unit[1] ** 2 != 1:
        return False
    bases = [tuple(b) for b in data["bases"]]
    if any(form.evaluate(x, y) for x, y in bases):
        return False
    reference = class_representatives(form, unit, class_search_bound(form, unit))
    if len(reference) != len(bases):
        return False
    back_map = BackMap(tuple(recoveries or (Recovery(*r) for r in data["recoveries"])))
    family = PellOrbitFamily(form, unit, tuple(bases))
    return all(not f.indices for f in orbit_filters(family, back_map))
