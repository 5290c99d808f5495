"""Residue reachability modulo ``m`` over the joint state space of an
equation's variables, and the obstruction scan built on top of it.

Each variable gets a finite set of representatives ``0..H-1``.  A
representative below the preperiod ``P`` is an exact value; one at or above
``P`` stands for the whole class ``{v >= P : v = r (mod L)}``.  Purely
polynomial variables have ``P = 0`` and classes ranging over all of Z.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations
from math import lcm
from typing import Iterable, Mapping

import numpy as np

from src.components.errors import DomainUnbounded, StateBudgetExceeded
from src.components.expr import Domain, Monomial, NormalizedEquation
from src.components.verdict import Certificate
from src.utils.numtheory import factorial_mod, kempner, power_cycle

logger = logging.getLogger(__name__)

DEFAULT_STATE_BUDGET = 10**7


@dataclass(frozen=True)
class ResidueProfile:
    variable: str
    modulus: int
    horizon: int
    preperiod: int
    period: int
    signed: bool = False
    """Classes extend over negative integers (polynomial-only variable)."""

    def is_exact(self, rep: int) -> bool:
        return rep < self.preperiod

    def admits(self, rep: int, domain: Domain, nonzero: bool = False) -> bool:
        if self.is_exact(rep):
            return domain.contains(rep) and not (nonzero and rep == 0)
        if domain.hi is None:
            return True
        floor = domain.lo if self.signed else max(self.preperiod, domain.lo if domain.lo is not None else 0)
        if floor is None:
            return True
        first = floor + (rep - floor) % self.period
        return first <= domain.hi

    def describe(self, rep: int) -> str:
        if self.is_exact(rep):
            return f"{self.variable} = {rep}"
        if self.signed:
            return f"{self.variable} = {rep} (mod {self.period})"
        return f"{self.variable} = {rep} (mod {self.period}), {self.variable} >= {self.preperiod}"


@dataclass(frozen=True)
class ResidueStates:
    """Joint satisfying representatives of an equation modulo ``modulus``."""

    modulus: int
    variables: tuple[str, ...]
    profiles: Mapping[str, ResidueProfile]
    states: frozenset[tuple[int, ...]]
    checked: int

    def __len__(self) -> int:
        return len(self.states)

    def projection(self, variables: Iterable[str]) -> set[tuple[int, ...]]:
        index = [self.variables.index(v) for v in variables]
        return {tuple(state[i] for i in index) for state in self.states}


@dataclass(frozen=True)
class TailCut:
    """Every solution has ``variable`` in ``values`` (proved modulo ``modulus``)."""

    variable: str
    values: tuple[int, ...]
    modulus: int


@dataclass
class ModularScan:
    certificate: Certificate | None = None
    tail_cuts: dict[str, TailCut] = field(default_factory=dict)
    skipped: list[int] = field(default_factory=list)
    scanned: int = 0


@dataclass(frozen=True)
class AdmissibleResidues:
    variable: str
    profile: ResidueProfile
    representatives: tuple[int, ...]

    @property
    def exact(self) -> tuple[int, ...]:
        return tuple(r for r in self.representatives if self.profile.is_exact(r))

    @property
    def classes(self) -> tuple[int, ...]:
        return tuple(r for r in self.representatives if not self.profile.is_exact(r))

    def describe(self) -> list[str]:
        return [self.profile.describe(r) for r in self.representatives]


@dataclass(frozen=True)
class CongruenceConstraints:
    modulus: int
    per_variable: Mapping[str, AdmissibleResidues]
    joint: ResidueStates

    def relations(self) -> list[str]:
        """Pairs of variables whose residues are not independent.

        A pair tied by a shift of signed classes renders as ``y = x + k (mod m)``;
        any other dependent pair lists its admissible representative pairs.
        """
        notes = []
        for a, b in combinations(self.joint.variables, 2):
            allowed = self.joint.projection((a, b))
            left, right = self.per_variable[a], self.per_variable[b]
            if len(allowed) == len(left.representatives) * len(right.representatives):
                continue
            notes.append(self._relation(a, b, allowed))
        return notes

    def describe(self) -> list[str]:
        lines = []
        for residues in self.per_variable.values():
            if len(residues.representatives) < residues.profile.horizon:
                lines.extend(residues.describe())
        return lines + self.relations()

    def _relation(self, a: str, b: str, allowed: set[tuple[int, ...]]) -> str:
        m = self.modulus
        left, right = self.per_variable[a], self.per_variable[b]
        if left.profile.signed and right.profile.signed:
            for k in range(m):
                if allowed == {(r, (r + k) % m) for r in left.representatives}:
                    return f"{b} = {a} (mod {m})" if k == 0 else f"{b} = {a} + {k} (mod {m})"
        pairs = ", ".join(f"({r}, {s})" for r, s in sorted(allowed))
        return f"({a}, {b}) in {{{pairs}}} (mod {m})"


def _default_domain(eq: NormalizedEquation, variable: str) -> Domain:
    if variable in eq.exponential_variables() or variable in eq.factorial_variables():
        return Domain.natural()
    return Domain.integers()


def residue_profile(
    eq: NormalizedEquation, variable: str, m: int, domain: Domain | None = None
) -> ResidueProfile:
    """Preperiod, period and horizon of ``variable``'s residue behaviour modulo ``m``."""
    if m < 2:
        raise ValueError("modulus must be at least 2")
    terms = eq.terms_with(variable)
    if not terms:
        raise ValueError(f"{variable} does not occur in the equation")
    bases = sorted({t.base_of(variable) for t in terms if t.base_of(variable) is not None})
    has_factorial = any(t.has_factorial(variable) for t in terms)
    polynomial = any(t.power_of(variable) for t in terms)
    if (bases or has_factorial) and domain is not None and domain.admits_negative:
        raise DomainUnbounded(f"{variable} needs a domain within N0 (domain {domain.name})")

    preperiod, period = 0, 1
    for base in bases:
        p, l = power_cycle(base % m, m)
        preperiod, period = max(preperiod, p), lcm(period, l)
    if has_factorial:
        preperiod = max(preperiod, kempner(m))
    if polynomial and not bases and not has_factorial:
        return ResidueProfile(variable, m, m, 0, m, signed=True)
    if polynomial:
        period = lcm(period, m)
    return ResidueProfile(variable, m, preperiod + period, preperiod, period)


def _factor_table(term: Monomial, variable: str, profile: ResidueProfile) -> np.ndarray:
    m = profile.modulus
    k = term.power_of(variable)
    base = term.base_of(variable)
    factorial_flag = term.has_factorial(variable)
    values = []
    for rep in range(profile.horizon):
        value = pow(rep, k, m)
        if base is not None:
            value = value * pow(base, rep, m) % m
        if factorial_flag:
            value = value * factorial_mod(rep, m) % m
        values.append(value)
    return np.asarray(values, dtype=np.int64)


def _residue_grid(
    eq: NormalizedEquation,
    m: int,
    domains: Mapping[str, Domain] | None,
    budget: int,
) -> tuple[tuple[str, ...], dict[str, ResidueProfile], np.ndarray]:
    variables = eq.variables
    domains = domains or {}
    profiles = {v: residue_profile(eq, v, m, domains.get(v)) for v in variables}
    shape = tuple(profiles[v].horizon for v in variables)
    total = int(np.prod(shape, dtype=object)) if shape else 1
    if total > budget:
        raise StateBudgetExceeded(f"{total} states modulo {m} exceed budget {budget}")

    acc = np.full(shape, eq.constant % m, dtype=np.int64)
    for term in eq.terms:
        arr = np.asarray(term.coefficient % m, dtype=np.int64)
        for axis, var in enumerate(variables):
            if var not in term.variables:
                continue
            view = [1] * len(variables)
            view[axis] = profiles[var].horizon
            arr = arr * _factor_table(term, var, profiles[var]).reshape(view) % m
        acc = (acc + arr) % m

    mask = acc == 0
    for axis, var in enumerate(variables):
        domain = domains.get(var, _default_domain(eq, var))
        nonzero = var in eq.nonvanishing
        admissible = np.asarray(
            [profiles[var].admits(r, domain, nonzero) for r in range(profiles[var].horizon)], dtype=bool
        )
        view = [1] * len(variables)
        view[axis] = profiles[var].horizon
        mask = mask & admissible.reshape(view)
    return variables, profiles, mask


def satisfying_states(
    eq: NormalizedEquation,
    m: int,
    domains: Mapping[str, Domain] | None = None,
    budget: int = DEFAULT_STATE_BUDGET,
) -> ResidueStates:
    """All representative tuples whose residue sum vanishes modulo ``m``."""
    variables, profiles, mask = _residue_grid(eq, m, domains, budget)
    states = frozenset(tuple(int(i) for i in idx) for idx in np.argwhere(mask)) if variables else (
        frozenset({()}) if bool(mask) else frozenset()
    )
    return ResidueStates(m, variables, profiles, states, int(mask.size))


def _certificate(eq: NormalizedEquation, m: int, checked: int, domains: Mapping[str, Domain] | None) -> Certificate:
    domains = domains or {}
    restriction = {v: domains.get(v, _default_domain(eq, v)).name for v in eq.variables}
    return Certificate(
        "modular",
        {
            "modulus": m,
            "states": checked,
            "domains": restriction,
            "claim": f"no state tuple satisfies f = 0 (mod {m})",
        },
    )


def scan(
    eq: NormalizedEquation,
    moduli: Iterable[int],
    domains: Mapping[str, Domain] | None = None,
    budget: int = DEFAULT_STATE_BUDGET,
    collect_tail_cuts: bool = True,
) -> ModularScan:
    """Scan moduli in order for an obstruction, collecting tail cuts on the way."""
    result = ModularScan()
    for m in moduli:
        try:
            variables, profiles, mask = _residue_grid(eq, m, domains, budget)
        except StateBudgetExceeded:
            logger.debug("modulus %d skipped: state budget", m)
            result.skipped.append(m)
            continue
        result.scanned += 1
        if not mask.any():
            result.certificate = _certificate(eq, m, int(mask.size), domains)
            logger.debug("obstruction modulo %d", m)
            return result
        if not collect_tail_cuts:
            continue
        for axis, var in enumerate(variables):
            profile = profiles[var]
            if profile.preperiod == 0 or profile.signed:
                continue
            others = tuple(i for i in range(len(variables)) if i != axis)
            reps = np.nonzero(mask.any(axis=others) if others else mask)[0]
            if len(reps) and all(profile.is_exact(int(r)) for r in reps):
                cut = TailCut(var, tuple(int(r) for r in reps), m)
                known = result.tail_cuts.get(var)
                if known is None or len(cut.values) < len(known.values):
                    result.tail_cuts[var] = cut
    return result


def find_obstruction(
    eq: NormalizedEquation,
    moduli: Iterable[int],
    domains: Mapping[str, Domain] | None = None,
    budget: int = DEFAULT_STATE_BUDGET,
    skipped: list[int] | None = None,
) -> Certificate | None:
    """First modulus at which no residue state satisfies the equation."""
    result = scan(eq, moduli, domains, budget, collect_tail_cuts=False)
    if skipped is not None:
        skipped.extend(result.skipped)
    return result.certificate


def tail_cuts(
    eq: NormalizedEquation,
    moduli: Iterable[int],
    domains: Mapping[str, Domain] | None = None,
    budget: int = DEFAULT_STATE_BUDGET,
) -> dict[str, TailCut]:
    return scan(eq, moduli, domains, budget).tail_cuts


def congruence_constraints(
    eq: NormalizedEquation,
    m: int,
    domains: Mapping[str, Domain] | None = None,
    budget: int = DEFAULT_STATE_BUDGET,
) -> CongruenceConstraints:
    """Admissible residues per variable plus the joint satisfying states modulo ``m``."""
    joint = satisfying_states(eq, m, domains, budget)
    per_variable = {}
    for i, var in enumerate(joint.variables):
        reps = tuple(sorted({state[i] for state in joint.states}))
        per_variable[var] = AdmissibleResidues(var, joint.profiles[var], reps)
    return CongruenceConstraints(m, per_variable, joint)


def check_obstruction(
    eq: NormalizedEquation, m: int, domains: Mapping[str, Domain] | None = None, budget: int = DEFAULT_STATE_BUDGET
) -> bool:
    """Recompute the residue grid and confirm it has no satisfying state."""
    return not _residue_grid(eq, m, domains, budget)[2].any()


def check_tail_cut(
    eq: NormalizedEquation,
    cut: TailCut,
    domains: Mapping[str, Domain] | None = None,
    budget: int = DEFAULT_STATE_BUDGET,
) -> bool:
    variables, profiles, mask = _residue_grid(eq, cut.modulus, domains, budget)
    if cut.variable not in variables:
        return False
    axis = variables.index(cut.variable)
    others = tuple(i for i in range(len(variables)) if i != axis)
    reps = np.nonzero(mask.any(axis=others) if others else mask)[0]
    profile = profiles[cut.variable]
    return all(profile.is_exact(int(r)) and int(r) in cut.values for r in reps)
