"""Linear Diophantine equations and systems via column Hermite reduction."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import islice, product
from math import gcd
from typing import Iterator, Mapping, Sequence

import sympy

from src.components.errors import BothZero
from src.components.expr import Domain
from src.components.verdict import LINEAR_ALGEBRA, Certificate, Status, Verdict

logger = logging.getLogger(__name__)

MATERIALIZE_CAP = 10_000


def extended_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, s, t)`` with ``g = gcd(a, b) > 0`` and ``s*a + t*b = g``.

    Raises:
        BothZero: ``a == b == 0``.
    """
    if a == 0 and b == 0:
        raise BothZero("gcd(0, 0) is undefined")
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def _parameter_values(limit: int) -> list[int]:
    values = [0]
    for k in range(1, limit + 1):
        values += [k, -k]
    return values


@dataclass(frozen=True)
class AffineLatticeFamily:
    """``{p + sum(t_i * g_i) : t in Z^k}`` restricted to the declared domains."""

    variables: tuple[str, ...]
    particular: tuple[int, ...]
    basis: tuple[tuple[int, ...], ...]
    domains: Mapping[str, Domain] = field(default_factory=dict, compare=False)
    nonvanishing: frozenset[str] = field(default=frozenset(), compare=False)
    kind: str = field(default="affine-lattice", init=False)

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def member(self, parameters: Sequence[int]) -> dict[str, int]:
        values = list(self.particular)
        for t, vector in zip(parameters, self.basis):
            for i, g in enumerate(vector):
                values[i] += t * g
        return dict(zip(self.variables, values))

    def admits(self, point: Mapping[str, int]) -> bool:
        if any(point[v] == 0 for v in self.nonvanishing if v in point):
            return False
        return all(self.domains.get(v, Domain()).contains(x) for v, x in point.items())

    def contains(self, point: Mapping[str, int]) -> bool:
        target = [point[v] - p for v, p in zip(self.variables, self.particular)]
        if not self.basis:
            return not any(target)
        columns = [list(row) for row in zip(*self.basis)]
        return solve_linear_system(columns, target).status.value != "no_solution"

    def parameters(self) -> list[tuple[str, str]]:
        return [(f"t{i + 1}", "Z") for i in range(self.dimension)]

    def expressions(self) -> dict[str, str]:
        symbols = sympy.symbols([name for name, _ in self.parameters()]) if self.basis else []
        result = {}
        for i, var in enumerate(self.variables):
            expr = sympy.Integer(self.particular[i])
            for symbol, vector in zip(symbols, self.basis):
                expr += vector[i] * symbol
            result[var] = str(expr)
        return result

    def constraints(self) -> list[str]:
        notes = [f"{v} in {d.name}" for v, d in sorted(self.domains.items()) if v in self.variables and d != Domain()]
        notes += [f"{v} != 0" for v in sorted(self.nonvanishing) if v in self.variables]
        return notes

    def materialize(self, limit: int = 20) -> Iterator[dict[str, int]]:
        grid = product(_parameter_values(limit), repeat=self.dimension)
        for params in islice(grid, MATERIALIZE_CAP):
            point = self.member(params)
            if self.admits(point):
                yield point

    def fix(self, variable: str, value: int) -> "AffineLatticeFamily":
        names = sorted((*self.variables, variable))
        at = names.index(variable)
        particular = list(self.particular)
        particular.insert(at, value)
        basis = []
        for vector in self.basis:
            extended = list(vector)
            extended.insert(at, 0)
            basis.append(tuple(extended))
        return AffineLatticeFamily(tuple(names), tuple(particular), tuple(basis), self.domains, self.nonvanishing)


@dataclass(frozen=True)
class HermiteForm:
    """Column-style reduction ``A @ U = H`` with ``U`` unimodular."""

    hermite: tuple[tuple[int, ...], ...]
    unimodular: tuple[tuple[int, ...], ...]
    pivots: tuple[tuple[int, int], ...]
    """``(row, column)`` of every pivot, in column order."""

    @property
    def rank(self) -> int:
        return len(self.pivots)


def hermite_column_form(matrix: Sequence[Sequence[int]]) -> HermiteForm:
    rows = len(matrix)
    cols = len(matrix[0]) if rows else 0
    a = [list(row) for row in matrix]
    u = [[int(i == j) for j in range(cols)] for i in range(cols)]

    def combine(k: int, j: int, s: int, t: int, p: int, q: int) -> None:
        # column_k <- s*col_k + t*col_j ; column_j <- p*col_k + q*col_j
        for mat in (a, u):
            for row in mat:
                ck, cj = row[k], row[j]
                row[k], row[j] = s * ck + t * cj, p * ck + q * cj

    pivots = []
    col = 0
    for i in range(rows):
        if col >= cols:
            break
        for j in range(col + 1, cols):
            if a[i][j] == 0:
                continue
            g, s, t = extended_gcd(a[i][col], a[i][j])
            combine(col, j, s, t, -a[i][j] // g, a[i][col] // g)
        if a[i][col] == 0:
            continue
        if a[i][col] < 0:
            for mat in (a, u):
                for row in mat:
                    row[col] = -row[col]
        pivots.append((i, col))
        col += 1
    return HermiteForm(tuple(map(tuple, a)), tuple(map(tuple, u)), tuple(pivots))


def _normalize_basis(vectors: list[list[int]]) -> list[tuple[int, ...]]:
    result = []
    for vector in vectors:
        lead = next((x for x in vector if x), 0)
        result.append(tuple(-x for x in vector) if lead < 0 else tuple(vector))
    return result


def _reduce_particular(particular: list[int], basis: list[tuple[int, ...]]) -> list[int]:
    for vector in basis:
        lead = next((i for i, x in enumerate(vector) if x), None)
        if lead is None:
            continue
        shift = -(particular[lead] // vector[lead])
        particular = [p + shift * g for p, g in zip(particular, vector)]
    return particular


def solve_linear_system(
    matrix: Sequence[Sequence[int]],
    rhs: Sequence[int],
    variables: Sequence[str] | None = None,
    domains: Mapping[str, Domain] | None = None,
    nonvanishing: frozenset[str] = frozenset(),
) -> Verdict:
    """Solve ``A x = b`` over the integers.

    Returns ``NoSolution`` with a ``linear-system`` certificate when a
    divisibility or rank condition fails, ``Finite`` for a unique solution
    and ``Family`` with an affine lattice otherwise.
    """
    cols = len(matrix[0]) if matrix else len(variables or ())
    names = tuple(variables) if variables is not None else tuple(f"x{i + 1}" for i in range(cols))
    form = hermite_column_form(matrix)
    h = form.hermite
    z = [0] * cols
    pivot_of_row = dict(form.pivots)
    for i, b in enumerate(rhs):
        partial = sum(h[i][j] * z[j] for j in range(cols))
        if i in pivot_of_row:
            k = pivot_of_row[i]
            remainder = b - partial
            if remainder % h[i][k]:
                return Verdict.no_solution(names, _system_certificate(matrix, rhs, form, i, "divisibility"))
            z[k] = remainder // h[i][k]
        elif partial != b:
            return Verdict.no_solution(names, _system_certificate(matrix, rhs, form, i, "rank"))

    u = form.unimodular
    particular = [sum(u[r][c] * z[c] for c in range(cols)) for r in range(cols)]
    basis = _normalize_basis([[u[r][c] for r in range(cols)] for c in range(form.rank, cols)])
    particular = _reduce_particular(particular, basis)
    if not basis:
        return Verdict.finite(names, [particular], LINEAR_ALGEBRA)
    family = AffineLatticeFamily(names, tuple(particular), tuple(basis), dict(domains or {}), nonvanishing)
    logger.debug("lattice family of dimension %d over %s", len(basis), names)
    return Verdict.family(names, [family])


def _system_certificate(matrix, rhs, form: HermiteForm, row: int, reason: str) -> Certificate:
    return Certificate(
        "linear-system",
        {
            "matrix": [list(r) for r in matrix],
            "rhs": list(rhs),
            "unimodular": [list(r) for r in form.unimodular],
            "hermite": [list(r) for r in form.hermite],
            "row": row,
            "reason": reason,
        },
    )


def solve_linear(
    coefficients: Sequence[int],
    b: int,
    variables: Sequence[str] | None = None,
    domains: Mapping[str, Domain] | None = None,
    nonvanishing: frozenset[str] = frozenset(),
) -> Verdict:
    """Solve ``sum(a_i x_i) = b``; infeasible exactly when ``gcd(a) does not divide b``."""
    names = tuple(variables) if variables is not None else tuple(f"x{i + 1}" for i in range(len(coefficients)))
    g = 0
    for a in coefficients:
        g = gcd(g, a)
    if g == 0 and b == 0:
        identity = tuple(tuple(int(i == j) for j in range(len(names))) for i in range(len(names)))
        return Verdict.family(names, [AffineLatticeFamily(names, (0,) * len(names), identity, dict(domains or {}))])
    if g == 0 or b % g:
        return Verdict.no_solution(
            names, Certificate("gcd-linear", {"coefficients": list(coefficients), "rhs": b, "gcd": g})
        )
    verdict = solve_linear_system([list(coefficients)], [b], names, domains, nonvanishing)
    if verdict.status is not Status.FINITE:
        return verdict
    # rank n: the lone point as a zero-dimensional lattice
    family = AffineLatticeFamily(names, verdict.solutions[0], (), dict(domains or {}), nonvanishing)
    if not family.admits(family.member(())):
        return verdict
    return Verdict.family(names, [family])


def check_linear_system(data: Mapping) -> bool:
    """Independently confirm a ``linear-system`` certificate."""
    a = sympy.Matrix(data["matrix"])
    u = sympy.Matrix(data["unimodular"])
    h = sympy.Matrix(data["hermite"])
    if abs(u.det()) != 1 or a * u != h:
        return False
    rhs = list(data["rhs"])
    rows, cols = h.shape
    z: list[int] = [0] * cols
    col = 0
    for i in range(rows):
        entries = [int(h[i, j]) for j in range(cols)]
        pivot = col < cols and entries[col] != 0
        if any(entries[col + 1 if pivot else col :]):
            return False
        partial = sum(entries[j] * z[j] for j in range(col))
        if pivot:
            if (rhs[i] - partial) % entries[col]:
                return True
            z[col] = (rhs[i] - partial) // entries[col]
            col += 1
        elif partial != rhs[i]:
            return True
    return False
