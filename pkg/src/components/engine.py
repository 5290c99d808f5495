"""Strategy orchestration for single equations and systems.

A single equation runs through five stages: sensibility checks, structural
classification, bounded enumeration (with case splits on finitely ranged
variables), probing with a targeted modular scan, and finally an
inconclusive report. The first definitive verdict wins; every attempted
stage leaves a trace entry.
"""
from __future__ import annotations

import logging
import time
from collections import Counter
from dataclasses import dataclass, field, replace
from itertools import islice, product
from math import gcd
from typing import Callable, Iterator, Mapping, Sequence

import sympy

from src.components.algebraic import (
    MATERIALIZE_CAP,
    binomial_solve,
    common_factor,
    discriminant_pivots,
    discriminant_solve,
    divide_out,
    factor_pair_solve,
    flt_check,
    isolated_linear_solve,
    lift_fixed,
    ordered_magnitude_solve,
    product_forms,
    separation_solve,
    univariate_polynomial_solve,
    zero_form_families,
)
from src.components.errors import (
    BudgetExceeded,
    DomainViolation,
    NotApplicable,
    StateBudgetExceeded,
    Timeout,
    ZeroTarget,
)
from src.components.expr import Domain, NormalizedEquation, Problem
from src.components.linear import AffineLatticeFamily, solve_linear, solve_linear_system
from src.components.modular import ModularScan, TailCut, scan
from src.components.pell import back_transform, reduce_to_pell, solve_pell
from src.components.search import (
    BoundSet,
    Symmetry,
    detect_symmetry,
    effective_domains,
    enumerate_box,
    infer_bounds,
    probe,
    sign_contradiction,
    sign_flip_invariant,
)
from src.components.verdict import (
    BOUNDED_EXHAUSTIVE,
    DIVISOR_CANDIDATES,
    LINEAR_SUBSTITUTION,
    MODULAR_PLUS_INSPECTION,
    Certificate,
    Family,
    Status,
    TraceEntry,
    Verdict,
)
from src.config import SolverConfig
from src.utils.numtheory import integer_roots

logger = logging.getLogger(__name__)

EARLY_ENUMERATION_LIMIT = 10**5


# --------------------------------------------------------------------------- #
# Context
# --------------------------------------------------------------------------- #


@dataclass
class SolveContext:
    """Budgets, deadline, trace and counters shared by one solve call."""

    config: SolverConfig
    deadline: float
    trace: list[TraceEntry] = field(default_factory=list)
    stats: Counter = field(default_factory=Counter)

    @classmethod
    def start(cls, config: SolverConfig) -> "SolveContext":
        return cls(config, time.monotonic() + config.timeout_ms / 1000)

    def derive(self, **updates) -> "SolveContext":
        """Same deadline, trace and counters under a modified config."""
        return replace(self, config=self.config.model_copy(update=updates))

    def check(self) -> None:
        if time.monotonic() > self.deadline:
            raise Timeout(f"{self.config.timeout_ms} ms budget exhausted")

    def record(self, stage: str, outcome: str, started: float) -> None:
        millis = round((time.perf_counter() - started) * 1000, 3)
        self.trace.append(TraceEntry(stage, outcome, millis))
        logger.debug("stage=%s outcome=%s", stage, outcome)

    @property
    def pell_options(self) -> dict[str, int]:
        return {
            "inspection_limit": self.config.pell_inspection_limit,
            "class_search_limit": self.config.pell_class_search_limit,
            "max_d": self.config.pell_max_d,
        }


def describe(verdict: Verdict | None) -> str:
    if verdict is None:
        return "no result"
    if verdict.status is Status.NO_SOLUTION:
        return f"no_solution ({verdict.certificate.kind})"
    if verdict.status is Status.FINITE:
        return f"finite: {len(verdict.solutions)} solutions ({verdict.completeness})"
    if verdict.status is Status.FAMILY:
        return f"family: {len(verdict.families)} families, {len(verdict.solutions)} points"
    return f"inconclusive: {len(verdict.solutions)} candidates"


def _attempt(ctx: SolveContext, stage: str, solver: Callable[[], Verdict | None]) -> Verdict | None:
    """Run one stage; inconclusive results and inapplicable solvers yield ``None``."""
    ctx.check()
    started = time.perf_counter()
    try:
        verdict = solver()
    except NotApplicable as exc:
        ctx.record(stage, f"not applicable: {exc}", started)
        return None
    except (BudgetExceeded, StateBudgetExceeded) as exc:
        logger.warning("%s: budget exceeded: %s", stage, exc)
        ctx.record(stage, f"budget exceeded: {exc}", started)
        return None
    ctx.record(stage, describe(verdict), started)
    if verdict is None or verdict.status is Status.INCONCLUSIVE:
        return None
    return verdict


# --------------------------------------------------------------------------- #
# Free variables
# --------------------------------------------------------------------------- #


def _free_values(domain: Domain, limit: int) -> list[int]:
    if domain.lo is None:
        values = [0]
        for k in range(1, limit + 1):
            values += [k, -k]
        return [v for v in values if domain.contains(v)]
    top = domain.lo + limit if domain.hi is None else min(domain.hi, domain.lo + limit)
    return list(range(domain.lo, top + 1))


@dataclass(frozen=True)
class ExtendedFamily:
    """A family over some variables, with others free or fixed."""

    base: Family
    free: tuple[str, ...] = ()
    fixed: tuple[tuple[str, int], ...] = ()
    domains: Mapping[str, Domain] = field(default_factory=dict, compare=False)
    nonvanishing: frozenset[str] = field(default=frozenset(), compare=False)

    @property
    def kind(self) -> str:
        return self.base.kind

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(sorted((*self.base.variables, *self.free, *(v for v, _ in self.fixed))))

    def parameters(self) -> list[tuple[str, str]]:
        return self.base.parameters() + [(v, self.domains.get(v, Domain()).name) for v in self.free]

    def expressions(self) -> dict[str, str]:
        exprs = dict(self.base.expressions())
        exprs.update({v: v for v in self.free})
        exprs.update({v: str(value) for v, value in self.fixed})
        return dict(sorted(exprs.items()))

    def constraints(self) -> list[str]:
        return self.base.constraints() + [f"{v} != 0" for v in self.free if v in self.nonvanishing]

    def materialize(self, limit: int = 20) -> Iterator[dict[str, int]]:
        base = list(islice(self.base.materialize(limit), MATERIALIZE_CAP))
        grids = [
            [v for v in _free_values(self.domains.get(var, Domain()), limit) if v or var not in self.nonvanishing]
            for var in self.free
        ]
        for member, values in islice(product(base, product(*grids)), MATERIALIZE_CAP):
            point = dict(member)
            point.update(zip(self.free, values))
            point.update(self.fixed)
            yield dict(sorted(point.items()))

    def fix(self, variable: str, value: int) -> "ExtendedFamily":
        free = tuple(v for v in self.free if v != variable)
        return replace(self, free=free, fixed=tuple(sorted((*self.fixed, (variable, value)))))


def extend(
    verdict: Verdict,
    names: Sequence[str],
    domains: Mapping[str, Domain] | None = None,
    nonvanishing: frozenset[str] = frozenset(),
) -> Verdict:
    """Re-express a verdict over ``names``; absent variables are free."""
    names = tuple(sorted(names))
    if tuple(verdict.variables) == names:
        return verdict
    domains = domains or {}
    missing = tuple(v for v in names if v not in verdict.variables)
    if verdict.status is Status.NO_SOLUTION:
        return replace(verdict, variables=names)
    if verdict.status is Status.INCONCLUSIVE:
        filled = [tuple(dict(zip(verdict.variables, s)).get(v, 0) for v in names) for s in verdict.solutions]
        return replace(verdict, variables=names, solutions=tuple(sorted(set(filled))))
    restricted = {v: d for v, d in domains.items() if v in names}
    families: list[Family] = [ExtendedFamily(f, missing, (), restricted, nonvanishing) for f in verdict.families]
    points = []
    for sol in verdict.solutions:
        point = dict(zip(verdict.variables, sol))
        if not missing:
            points.append(tuple(point[v] for v in names))
            continue
        particular = tuple(point.get(v, 0) for v in names)
        basis = tuple(tuple(int(v == f) for v in names) for f in missing)
        families.append(AffineLatticeFamily(names, particular, basis, restricted, nonvanishing))
    if families:
        return replace(
            verdict,
            status=Status.FAMILY,
            variables=names,
            solutions=tuple(sorted(points)),
            families=tuple(families),
            completeness=None,
        )
    return replace(verdict, variables=names, solutions=tuple(sorted(points)))


# --------------------------------------------------------------------------- #
# Problem preparation
# --------------------------------------------------------------------------- #


def prepare_equations(problem: Problem) -> list[NormalizedEquation]:
    """Equations carrying every nonvanishing constraint that touches their variables."""
    prepared = []
    for eq in problem.equations:
        names = set(eq.variables)
        extra = frozenset(v for v in problem.nonvanishing if v in names)
        prepared.append(replace(eq, nonvanishing=eq.nonvanishing | extra))
    return prepared


def _constant_verdict(eq: NormalizedEquation) -> Verdict:
    if eq.constant == 0:
        return Verdict.finite((), [()], BOUNDED_EXHAUSTIVE)
    return Verdict.no_solution((), Certificate("sign-magnitude", {"argument": "constant", "constant": eq.constant}))


def content_certificate(eq: NormalizedEquation) -> Certificate | None:
    g = 0
    for term in eq.terms:
        g = gcd(g, term.coefficient)
    if g > 1 and eq.constant % g:
        return Certificate("content", {"divisor": g, "constant": eq.constant})
    return None


# --------------------------------------------------------------------------- #
# Stage 1: sensibility
# --------------------------------------------------------------------------- #


def _sensibility(
    eq: NormalizedEquation, domains: Mapping[str, Domain], ctx: SolveContext, scope: str
) -> tuple[Verdict | None, ModularScan]:
    """Content, then signs over the declared domains, then residues, then propagated magnitudes."""
    names = eq.variables
    started = time.perf_counter()
    certificate = content_certificate(eq)
    if certificate is not None:
        ctx.record(f"{scope}content", f"no_solution: content {certificate.data['divisor']}", started)
        return Verdict.no_solution(names, certificate), ModularScan()
    ctx.record(f"{scope}content", "content divides the constant", started)

    started = time.perf_counter()
    certificate = sign_contradiction(eq, domains)
    if certificate is not None:
        ctx.record(f"{scope}sign", f"no_solution: {certificate.data['argument']}", started)
        return Verdict.no_solution(names, certificate), ModularScan()
    ctx.record(f"{scope}sign", "no sign contradiction", started)

    ctx.check()
    started = time.perf_counter()
    result = scan(eq, range(2, ctx.config.max_modulus + 1), domains, ctx.config.state_budget)
    ctx.stats["moduli_scanned"] += result.scanned
    if result.certificate is not None:
        ctx.record(f"{scope}modular", f"no_solution: modulus {result.certificate.modulus}", started)
        return Verdict.no_solution(names, result.certificate), result
    cuts = ", ".join(f"{c.variable} in {list(c.values)} (mod {c.modulus})" for c in result.tail_cuts.values())
    outcome = f"{result.scanned} moduli, no obstruction"
    if cuts:
        outcome += f"; tail cuts {cuts}"
    if result.skipped:
        outcome += f"; {len(result.skipped)} skipped"
    ctx.record(f"{scope}modular", outcome, started)

    started = time.perf_counter()
    bounds = infer_bounds(eq, domains, check=ctx.check)
    if bounds.infeasible is not None:
        argument = bounds.infeasible.data.get("argument", bounds.infeasible.kind)
        ctx.record(f"{scope}magnitude", f"no_solution: {argument}", started)
        return Verdict.no_solution(names, bounds.infeasible), result
    ctx.record(f"{scope}magnitude", "no magnitude contradiction", started)
    return None, result


# --------------------------------------------------------------------------- #
# Stage 2: classification
# --------------------------------------------------------------------------- #


def _linear(eq: NormalizedEquation, domains, nonvanishing) -> Verdict:
    if not eq.is_linear:
        raise NotApplicable("nonlinear terms")
    names = eq.variables
    coefficients = {t.powers[0][0]: t.coefficient for t in eq.terms}
    return solve_linear([coefficients[v] for v in names], -eq.constant, names, domains, nonvanishing)


def _univariate(eq: NormalizedEquation, domains, nonvanishing, ctx: SolveContext) -> Verdict:
    if len(eq.variables) != 1 or not eq.is_polynomial:
        raise NotApplicable("not a one-variable polynomial")
    return univariate_polynomial_solve(eq, domains, nonvanishing, ctx.config.factor_limit)


def _pell(eq: NormalizedEquation, domains, nonvanishing, ctx: SolveContext) -> Verdict | None:
    names = eq.variables
    reduction = reduce_to_pell(eq)
    verdict = solve_pell(reduction.form, **ctx.pell_options)
    if verdict.status is Status.NO_SOLUTION:
        return Verdict.no_solution(names, verdict.certificate)
    if verdict.status is not Status.FAMILY:
        return None
    result = back_transform(verdict.families[0], reduction.back_map, 10, domains, nonvanishing)
    logger.debug("%s: back-transform %s", reduction.form.render(), result.classification)
    if result.classification == "none":
        return Verdict.no_solution(names, result.certificate)
    return Verdict.family(names, [result.family])


def _product_form(eq: NormalizedEquation, domains, nonvanishing, ctx: SolveContext) -> Verdict:
    forms = product_forms(eq)
    if not forms:
        raise NotApplicable("no product form")
    pf = forms[0]
    try:
        return factor_pair_solve(pf, eq.variables, domains, nonvanishing, ctx.config.factor_limit)
    except ZeroTarget:
        return zero_form_families(pf, eq.variables, domains, nonvanishing)


def _discriminant(eq: NormalizedEquation, domains, nonvanishing, ctx: SolveContext) -> Verdict | None:
    pivots = discriminant_pivots(eq)
    if not pivots:
        raise NotApplicable("no quadratic pivot")
    for pivot in pivots:
        verdict = discriminant_solve(eq, pivot, domains, nonvanishing, ctx.config.factor_limit, ctx.pell_options)
        if verdict.status is not Status.INCONCLUSIVE:
            return verdict
    return None


def _common_factor(
    eq: NormalizedEquation, domains, nonvanishing, ctx: SolveContext, depth: int, scope: str
) -> Verdict | None:
    found = common_factor(eq)
    if found is None:
        raise NotApplicable("no variable divides every term")
    var, k = found
    names = eq.variables
    reduced = divide_out(eq, var, k)
    solved = _solve_equation(reduced, domains, ctx, depth + 1, f"{scope}{var}^{k}|.")
    branch = extend(solved, names, domains, nonvanishing)
    if branch.status is Status.INCONCLUSIVE:
        return branch
    families = list(branch.families)
    points = set(branch.solutions)
    if domains.get(var, Domain()).contains(0) and var not in nonvanishing:
        zero = Verdict.finite((), [()], BOUNDED_EXHAUSTIVE)
        rest = extend(zero, [v for v in names if v != var], domains, nonvanishing)
        lifted = lift_fixed(rest, var, 0, names, domains, nonvanishing)
        families.extend(lifted.families)
        points.update(lifted.solutions)
    if families:
        return Verdict.family(names, families, sorted(points))
    if points or branch.status is Status.FINITE:
        return Verdict.finite(names, sorted(points), branch.completeness or BOUNDED_EXHAUSTIVE)
    return branch


def _classifiers(eq, domains, nonvanishing, ctx, depth, scope) -> list[tuple[str, Callable[[], Verdict | None]]]:
    return [
        ("linear", lambda: _linear(eq, domains, nonvanishing)),
        ("univariate", lambda: _univariate(eq, domains, nonvanishing, ctx)),
        ("common-factor", lambda: _common_factor(eq, domains, nonvanishing, ctx, depth, scope)),
        ("flt", lambda: flt_check(eq, domains, nonvanishing)[1]),
        ("pell", lambda: _pell(eq, domains, nonvanishing, ctx)),
        ("product-form", lambda: _product_form(eq, domains, nonvanishing, ctx)),
        ("separation", lambda: separation_solve(eq, domains, nonvanishing, ctx.config.factor_limit)),
        ("discriminant", lambda: _discriminant(eq, domains, nonvanishing, ctx)),
        ("ordered-magnitude", lambda: ordered_magnitude_solve(eq, domains, nonvanishing)),
        ("binomial", lambda: binomial_solve(eq, domains, nonvanishing)),
        ("isolated-linear", lambda: isolated_linear_solve(eq, domains, nonvanishing, ctx.config.state_budget)),
    ]


# --------------------------------------------------------------------------- #
# Stage 3: enumeration and case splits
# --------------------------------------------------------------------------- #


def _tag(bounds: BoundSet) -> str:
    if "modular-tail" in bounds.provenance.values() or "modular-tail" in bounds.sources.values():
        return MODULAR_PLUS_INSPECTION
    if "proved-divisor" in bounds.sources.values():
        return DIVISOR_CANDIDATES
    return BOUNDED_EXHAUSTIVE


def _enumerate(eq: NormalizedEquation, bounds: BoundSet, ctx: SolveContext, limit: int) -> Verdict:
    if bounds.infeasible is not None or not bounds.proved:
        raise NotApplicable("bounds are not complete")
    size = bounds.box_size()
    if size > limit:
        raise NotApplicable(f"box of {size} points exceeds {limit}")
    symmetry = detect_symmetry(eq)
    sign = (
        symmetry.trivial
        and not bounds.candidates
        and sign_flip_invariant(eq)
        and all(d.is_symmetric for d in bounds.intervals.values())
    )
    result = enumerate_box(eq, bounds, symmetry, ctx.config.enum_budget, eq.nonvanishing, ctx.deadline, sign)
    ctx.stats["evaluations"] += result.evaluations
    if not result.complete:
        raise BudgetExceeded(f"enumeration stopped after {result.evaluations} evaluations")
    return Verdict.finite(eq.variables, result.solutions, _tag(bounds))


def _restriction(var: str, bounds: BoundSet, cuts: Mapping[str, TailCut]) -> dict:
    used = [{"variable": c.variable, "modulus": c.modulus, "values": list(c.values)} for c in cuts.values()]
    domain = bounds.intervals[var]
    return {
        "rule": bounds.sources[var] if var in bounds.candidates else bounds.provenance.get(var, "domain"),
        "lo": domain.lo,
        "hi": domain.hi,
        "cuts": used,
    }


def split_variable(bounds: BoundSet, limit: int) -> tuple[str, list[int]] | None:
    """Variable with the fewest possible values, if at most ``limit``."""
    best = None
    for var in sorted(bounds.intervals):
        size = len(bounds.candidates[var]) if var in bounds.candidates else bounds.intervals[var].size()
        if size is None or size > limit:
            continue
        values = bounds.values(var)
        if best is None or len(values) < len(best[1]):
            best = (var, values)
    return best


def _case_split(
    eq: NormalizedEquation,
    domains: Mapping[str, Domain],
    bounds: BoundSet,
    cuts: Mapping[str, TailCut],
    ctx: SolveContext,
    depth: int,
    scope: str,
) -> Verdict:
    if depth >= ctx.config.split_depth:
        raise NotApplicable("split depth reached")
    chosen = split_variable(bounds, ctx.config.split_limit)
    if chosen is None:
        raise NotApplicable("no variable with a small finite range")
    var, values = chosen
    names = eq.variables
    rest = [v for v in names if v != var]
    sub_domains = {v: d for v, d in domains.items() if v != var}
    branches = []
    for value in values:
        try:
            sub = eq.substitute({var: value})
        except DomainViolation:
            continue
        branch = _solve_equation(sub, sub_domains, ctx, depth + 1, f"{scope}{var}={value}.")
        branch = extend(branch, rest, sub_domains, eq.nonvanishing)
        branches.append((value, lift_fixed(branch, var, value, names, domains, eq.nonvanishing)))
    return merge_split(names, var, _restriction(var, bounds, cuts), branches)


def merge_split(names: Sequence[str], var: str, restriction: dict, branches: Sequence[tuple[int, Verdict]]) -> Verdict:
    """Combine per-value verdicts of a case split."""
    if any(v.status is Status.INCONCLUSIVE for _, v in branches):
        candidates = [s for _, v in branches for s in v.solutions]
        return Verdict.inconclusive(names, candidates)
    points = sorted({s for _, v in branches for s in v.solutions})
    families = [f for _, v in branches for f in v.families]
    if families:
        return Verdict.family(names, families, points)
    if all(v.status is Status.NO_SOLUTION for _, v in branches):
        certificate = Certificate(
            "case-split",
            {
                "variable": var,
                "restriction": restriction,
                "branches": [{"value": value, "certificate": v.certificate.to_dict()} for value, v in branches],
            },
        )
        return Verdict.no_solution(names, certificate)
    tags = {v.completeness for _, v in branches if v.status is Status.FINITE}
    if restriction["rule"] == "modular-tail" or restriction["cuts"]:
        tag = MODULAR_PLUS_INSPECTION
    else:
        tag = tags.pop() if len(tags) == 1 else BOUNDED_EXHAUSTIVE
    return Verdict.finite(names, points, tag)


def _bounded_stages(
    eq: NormalizedEquation,
    domains: Mapping[str, Domain],
    cuts: Mapping[str, TailCut],
    ctx: SolveContext,
    depth: int,
    scope: str,
) -> tuple[Verdict | None, Verdict | None]:
    """Enumeration, then a case split. Returns (definitive, inconclusive split)."""
    bounds = infer_bounds(eq, domains, cuts, check=ctx.check)
    verdict = _attempt(ctx, f"{scope}enumerate", lambda: _enumerate(eq, bounds, ctx, ctx.config.enum_budget))
    if verdict is not None:
        return verdict, None
    held: list[Verdict] = []

    def split() -> Verdict:
        result = _case_split(eq, domains, bounds, cuts, ctx, depth, scope)
        if result.status is Status.INCONCLUSIVE:
            held.append(result)
        return result

    verdict = _attempt(ctx, f"{scope}case-split", split)
    return verdict, (held[0] if held else None)


# --------------------------------------------------------------------------- #
# Stage 4: probing and targeted moduli
# --------------------------------------------------------------------------- #


def targeted_moduli(eq: NormalizedEquation, floor: int, cap: int) -> list[int]:
    """Prime powers of the exponential bases' prime factors in ``(floor, cap]``."""
    primes = sorted({p for t in eq.terms for _, b in t.exponentials for p in sympy.primefactors(abs(b))})
    moduli = set()
    for p in primes:
        q = p
        while q <= cap:
            if q > floor:
                moduli.add(q)
            q *= p
    return sorted(moduli)


def _probe(
    eqs: Sequence[NormalizedEquation], domains, nonvanishing, ctx: SolveContext, scope: str
) -> list[tuple[int, ...]]:
    if not ctx.config.probe_budget:
        return []
    started = time.perf_counter()
    box = ctx.config.probe_box
    if len(eqs) == 1:
        boxed = infer_bounds(eqs[0], domains, box=box, check=ctx.check)
        size = boxed.box_size()
        if boxed.infeasible is None and size is not None and size <= ctx.config.probe_budget:
            result = enumerate_box(eqs[0], boxed, detect_symmetry(eqs[0]), size, nonvanishing, ctx.deadline)
            ctx.stats["evaluations"] += result.evaluations
            ctx.record(f"{scope}probe", f"box {box[0]}..{box[1]} searched: {len(result.solutions)} hits", started)
            return [tuple(s) for s in result.solutions]
    report = probe(eqs, domains, box, ctx.config.probe_budget, nonvanishing, ctx.deadline)
    ctx.stats["evaluations"] += report.evaluations
    outcome = f"{len(report.hits)} hits in {report.evaluations} evaluations"
    if report.min_abs is not None and not report.hits:
        outcome += f", smallest |f| = {report.min_abs}"
    ctx.record(f"{scope}probe", outcome, started)
    return [tuple(hit) for hit in report.hits]


def _targeted(eq: NormalizedEquation, domains, cuts: dict[str, TailCut], ctx: SolveContext) -> Verdict | None:
    """Scan prime-power moduli of the exponential bases; new tail cuts are merged into ``cuts``."""
    moduli = targeted_moduli(eq, ctx.config.max_modulus, ctx.config.targeted_modulus_cap)
    if not moduli:
        raise NotApplicable("no exponential bases")
    result = scan(eq, moduli, domains, ctx.config.state_budget)
    ctx.stats["moduli_scanned"] += result.scanned
    if result.certificate is not None:
        return Verdict.no_solution(eq.variables, result.certificate)
    fresh = {
        var: cut
        for var, cut in result.tail_cuts.items()
        if var not in cuts or len(cut.values) < len(cuts[var].values)
    }
    if not fresh:
        raise NotApplicable(f"{len(moduli)} moduli gave no new restriction")
    cuts.update(fresh)
    return None


# --------------------------------------------------------------------------- #
# Single equations
# --------------------------------------------------------------------------- #


def _solve_equation(
    eq: NormalizedEquation,
    domains: Mapping[str, Domain],
    ctx: SolveContext,
    depth: int = 0,
    scope: str = "",
) -> Verdict:
    """Verdict over ``eq.variables``; ``domains`` are the declared ones."""
    ctx.check()
    if not eq.terms:
        return _constant_verdict(eq)
    names = eq.variables
    nonvanishing = eq.nonvanishing
    effective = effective_domains(eq, domains)
    clipped = [v for v in names if effective[v] != domains.get(v, Domain())]
    if clipped:
        note = f"{', '.join(clipped)} restricted to N0 by exponential or factorial use"
        ctx.trace.append(TraceEntry(f"{scope}domain", note))

    verdict, result = _sensibility(eq, effective, ctx, scope)
    if verdict is not None:
        return verdict
    cuts = dict(result.tail_cuts)

    early = infer_bounds(eq, effective, cuts, check=ctx.check)
    verdict = _attempt(ctx, f"{scope}bounds", lambda: _enumerate(eq, early, ctx, EARLY_ENUMERATION_LIMIT))
    if verdict is not None:
        return verdict

    for stage, solver in _classifiers(eq, effective, nonvanishing, ctx, depth, scope):
        verdict = _attempt(ctx, f"{scope}{stage}", solver)
        if verdict is not None:
            return verdict

    verdict, held = _bounded_stages(eq, effective, cuts, ctx, depth, scope)
    if verdict is not None:
        return verdict

    candidates: list[tuple[int, ...]] = []
    if depth == 0:
        candidates = _probe([eq], effective, nonvanishing, ctx, scope)
        known = dict(cuts)
        verdict = _attempt(ctx, f"{scope}targeted-modular", lambda: _targeted(eq, effective, cuts, ctx))
        if verdict is not None:
            return verdict
        if cuts != known:
            verdict, held = _bounded_stages(eq, effective, cuts, ctx, depth, scope)
            if verdict is not None:
                return verdict
    if held is not None:
        candidates = sorted(set(candidates) | set(held.solutions))
    return Verdict.inconclusive(names, candidates)


def solve(problem: Problem, config: SolverConfig | None = None) -> Verdict:
    """Decide a problem: NoSolution with a certificate, Finite, Family or Inconclusive.

    Args:
        problem: Parsed problem; systems are delegated to ``solve_system``.
        config: Budgets and limits; defaults apply when omitted.

    Returns:
        Verdict over ``problem.variables`` with its trace and statistics.
    """
    config = config or SolverConfig()
    if problem.is_system:
        return solve_system(problem, config)
    ctx = SolveContext.start(config)
    names = problem.variables
    eq = prepare_equations(problem)[0]
    try:
        if not names:
            verdict = _trivial(eq)
        else:
            verdict = _solve_equation(eq, problem.domains, ctx)
    except Timeout as exc:
        logger.warning("timeout: %s", exc)
        ctx.trace.append(TraceEntry("timeout", str(exc)))
        verdict = Verdict.inconclusive(eq.variables)
    return _finalize(verdict, problem, ctx)


def _trivial(eq: NormalizedEquation) -> Verdict:
    if eq.constant == 0:
        return Verdict.family((), [AffineLatticeFamily((), (), ())])
    return _constant_verdict(eq)


def _finalize(verdict: Verdict, problem: Problem, ctx: SolveContext) -> Verdict:
    verdict = extend(verdict, problem.variables, problem.domains, problem.nonvanishing)
    if verdict.status in (Status.FINITE, Status.FAMILY):
        kept = []
        for sol in verdict.solutions:
            point = dict(zip(verdict.variables, sol))
            if _satisfies(problem, point):
                kept.append(sol)
            else:
                logger.warning("dropping unverified solution %s", point)
        verdict = replace(verdict, solutions=tuple(kept))
    stats = {"evaluations": ctx.stats["evaluations"], "moduli_scanned": ctx.stats["moduli_scanned"]}
    return verdict.with_trace(ctx.trace, stats)


# --------------------------------------------------------------------------- #
# Systems
# --------------------------------------------------------------------------- #


def _wrap(index: int, verdict: Verdict, names: Sequence[str]) -> Verdict:
    data = {"index": index, "certificate": verdict.certificate.to_dict()}
    return Verdict.no_solution(names, Certificate("system-equation", data))


def joint_bounds(problem: Problem, max_modulus: int, state_budget: int) -> BoundSet:
    """Intersection of every equation's proved intervals and modular tail cuts."""
    names = problem.variables
    merged = BoundSet({v: problem.domain(v) for v in names})
    for eq in prepare_equations(problem):
        if not eq.terms:
            continue
        effective = effective_domains(eq, problem.domains)
        cuts = scan(eq, range(2, max_modulus + 1), effective, state_budget).tail_cuts
        bounds = infer_bounds(eq, effective, cuts)
        if bounds.infeasible is not None:
            continue
        for var, domain in bounds.intervals.items():
            merged.tighten(var, domain.lo, domain.hi, bounds.provenance.get(var, "domain"))
        for var, values in bounds.candidates.items():
            known = merged.candidates.get(var)
            merged.candidates[var] = tuple(v for v in values if known is None or v in known)
            merged.sources.setdefault(var, bounds.sources[var])
    empty = [v for v, d in merged.intervals.items() if d.is_empty or (v in merged.candidates and not merged.values(v))]
    if empty:
        merged.infeasible = Certificate(
            "sign-magnitude", {"argument": "joint-bounds", "variables": empty, "max_modulus": max_modulus}
        )
    return merged


def substitute_problem(problem: Problem, skip: int, assignment: Mapping[str, int]) -> Problem:
    """The other equations with ``assignment`` fixed; raises ``DomainViolation``."""
    eqs = tuple(e.substitute(assignment) for i, e in enumerate(prepare_equations(problem)) if i != skip)
    domains = {v: d for v, d in problem.domains.items() if v not in assignment}
    constraints = tuple(g - set(assignment) for g in problem.constraints if g - set(assignment))
    return Problem(eqs, domains, constraints)


def live_problem(problem: Problem) -> Problem:
    """Drop equations that substitution reduced to ``0 = 0``."""
    live = tuple(e for e in problem.equations if e.terms or e.constant)
    return Problem(live, problem.domains, problem.constraints)


def equation_problem(problem: Problem, index: int) -> Problem:
    """One equation of a system, carrying every nonvanishing constraint on its variables."""
    eq = prepare_equations(problem)[index]
    names = set(eq.variables)
    domains = {v: d for v, d in problem.domains.items() if v in names}
    return Problem((eq,), domains, tuple(g for g in problem.constraints if g & names))


def _solve_subproblem(problem: Problem, ctx: SolveContext, scope: str) -> Verdict:
    sub = live_problem(problem)
    for eq in sub.equations:
        if not eq.terms:
            certificate = Certificate("sign-magnitude", {"argument": "constant", "constant": eq.constant})
            return Verdict.no_solution(problem.variables, certificate)
    if not sub.equations:
        return Verdict.finite((), [()], BOUNDED_EXHAUSTIVE)
    if len(sub.equations) == 1:
        return _solve_equation(prepare_equations(sub)[0], sub.domains, ctx, 1, scope)
    return _solve_system(sub, ctx, scope)


def filter_finite(problem: Problem, index: int, verdict: Verdict, ctx: SolveContext, scope: str = "") -> Verdict | None:
    """Test one equation's finite solutions against the rest of the system.

    Returns ``None`` when some branch stays inconclusive.
    """
    names = problem.variables
    branches: list[Verdict | None] = []
    for sol in verdict.solutions:
        assignment = dict(zip(verdict.variables, sol))
        if set(assignment) >= set(names):
            point = tuple(assignment[v] for v in names)
            ok = _satisfies(problem, assignment)
            branches.append(Verdict.finite(names, [point], verdict.completeness) if ok else None)
            continue
        try:
            sub = substitute_problem(problem, index, assignment)
        except DomainViolation:
            branches.append(None)
            continue
        rest = [v for v in names if v not in assignment]
        solved = _solve_subproblem(sub, ctx, f"{scope}{_label(assignment)}.")
        branch = extend(solved, rest, sub.domains, sub.nonvanishing)
        for var, value in sorted(assignment.items()):
            kept = [v for v in names if v in branch.variables or v == var]
            branch = lift_fixed(branch, var, value, kept, problem.domains, problem.nonvanishing)
        branches.append(extend(branch, names, problem.domains, problem.nonvanishing))
    results = [b for b in branches if b is not None]
    if any(b.status is Status.INCONCLUSIVE for b in results):
        return None
    points = sorted({s for b in results for s in b.solutions})
    families = [f for b in results for f in b.families]
    if families:
        return Verdict.family(names, families, points)
    if points:
        return Verdict.finite(names, points, verdict.completeness)
    data = {
        "mode": "equation",
        "index": index,
        "variables": list(verdict.variables),
        "solutions": [list(s) for s in verdict.solutions],
        "branches": [b.certificate.to_dict() if b is not None and b.certificate else None for b in branches],
    }
    return Verdict.no_solution(names, Certificate("finite-exclusion", data))


def _label(assignment: Mapping[str, int]) -> str:
    return ",".join(f"{v}={x}" for v, x in sorted(assignment.items()))


def linear_substitution(problem: Problem) -> Verdict:
    """Solve the linear equations jointly and substitute into a nonlinear one."""
    names = problem.variables
    eqs = prepare_equations(problem)
    linear = [e for e in eqs if e.terms and e.is_linear]
    nonlinear = [e for e in eqs if not e.is_linear]
    if not linear:
        raise NotApplicable("no linear equation")
    matrix = [[sum(t.coefficient for t in e.terms if t.powers[0][0] == v) for v in names] for e in linear]
    rhs = [-e.constant for e in linear]
    joint = solve_linear_system(matrix, rhs, names, problem.domains, problem.nonvanishing)
    if joint.status is Status.NO_SOLUTION:
        return joint
    if joint.status is Status.FINITE:
        points = [p for p in joint.solutions if _satisfies(problem, dict(zip(names, p)))]
        if points:
            return Verdict.finite(names, points, LINEAR_SUBSTITUTION)
        return Verdict.no_solution(names, Certificate("linear-substitution", {"point": list(joint.solutions[0])}))
    (family,) = joint.families
    if family.dimension != 1:
        raise NotApplicable(f"{family.dimension}-dimensional linear family")
    t = sympy.Symbol("t", integer=True)
    values = {v: p + g * t for v, p, g in zip(names, family.particular, family.basis[0])}
    for index, eq in enumerate(eqs):
        if eq.is_linear or not eq.is_polynomial:
            continue
        poly = sympy.Poly(sympy.expand(_substituted(eq, values)), t)
        if poly.is_zero:
            continue
        coefficients = [int(c) for c in reversed(poly.all_coeffs())]
        roots = integer_roots(coefficients)
        points = []
        for root in roots:
            point = family.member([root])
            if _satisfies(problem, point):
                points.append(tuple(point[v] for v in names))
        if points:
            return Verdict.finite(names, points, LINEAR_SUBSTITUTION)
        return Verdict.no_solution(
            names,
            Certificate(
                "linear-substitution",
                {
                    "equation": index,
                    "particular": list(family.particular),
                    "basis": list(family.basis[0]),
                    "polynomial": coefficients,
                    "roots": roots,
                },
            ),
        )
    if nonlinear:
        raise NotApplicable("nonlinear equations are not polynomial in the family parameter")
    return joint


def _substituted(eq: NormalizedEquation, values: Mapping[str, sympy.Expr]) -> sympy.Expr:
    total = sympy.Integer(eq.constant)
    for term in eq.terms:
        value = sympy.Integer(term.coefficient)
        for var, k in term.powers:
            value *= values[var] ** k
        total += value
    return total


def _satisfies(problem: Problem, point: Mapping[str, int]) -> bool:
    if not problem.admits(point):
        return False
    try:
        return all(eq.evaluate(point) == 0 for eq in problem.equations)
    except DomainViolation:
        return False


def _joint_enumerate(problem: Problem, bounds: BoundSet, ctx: SolveContext) -> Verdict:
    if not bounds.proved:
        raise NotApplicable("joint bounds are not complete")
    size = bounds.box_size()
    if size > ctx.config.enum_budget:
        raise NotApplicable(f"box of {size} points exceeds the budget")
    eqs = [e for e in prepare_equations(problem) if e.terms]
    result = enumerate_box(eqs, bounds, Symmetry(), ctx.config.enum_budget, problem.nonvanishing, ctx.deadline)
    ctx.stats["evaluations"] += result.evaluations
    if not result.complete:
        raise BudgetExceeded("joint enumeration stopped early")
    if result.solutions:
        return Verdict.finite(problem.variables, result.solutions, _tag(bounds))
    box = {v: [d.lo, d.hi] for v, d in sorted(bounds.intervals.items())}
    return Verdict.no_solution(
        problem.variables,
        Certificate("finite-exclusion", {"mode": "box", "box": box, "max_modulus": ctx.config.max_modulus}),
    )


def _solve_system(problem: Problem, ctx: SolveContext, scope: str = "") -> Verdict:
    names = problem.variables
    eqs = prepare_equations(problem)
    for i, eq in enumerate(eqs):
        if not eq.terms:
            if eq.constant:
                return _wrap(i, _constant_verdict(eq), names)
            continue
        verdict, _ = _sensibility(eq, effective_domains(eq, problem.domains), ctx, f"{scope}eq{i + 1}.")
        if verdict is not None:
            return _wrap(i, verdict, names)

    started = time.perf_counter()
    bounds = joint_bounds(problem, ctx.config.max_modulus, ctx.config.state_budget)
    if bounds.infeasible is not None:
        ctx.record(f"{scope}joint-bounds", "no_solution: empty intersection", started)
        return Verdict.no_solution(names, bounds.infeasible)
    ctx.record(f"{scope}joint-bounds", "complete" if bounds.proved else "partial", started)

    quiet = ctx.derive(probe_budget=0)
    for i, eq in enumerate(eqs):
        if not eq.terms:
            continue
        label = f"{scope}eq{i + 1}"
        verdict = _attempt(ctx, f"{label}.solve", lambda: _solve_equation(eq, problem.domains, quiet, 1, f"{label}."))
        if verdict is None:
            continue
        if verdict.status is Status.NO_SOLUTION:
            return _wrap(i, verdict, names)
        if verdict.status is Status.FINITE:
            filtered = _attempt(ctx, f"{label}.filter", lambda: filter_finite(problem, i, verdict, ctx, f"{label}."))
            if filtered is not None:
                return filtered

    verdict = _attempt(ctx, f"{scope}linear-substitution", lambda: linear_substitution(problem))
    if verdict is not None:
        return verdict
    verdict = _attempt(ctx, f"{scope}joint-enumerate", lambda: _joint_enumerate(problem, bounds, ctx))
    if verdict is not None:
        return verdict
    candidates = []
    if not scope:
        live = [e for e in eqs if e.terms]
        merged_domains = {}
        for eq in live:
            merged_domains.update(effective_domains(eq, problem.domains))
        hits = _probe(live, merged_domains, problem.nonvanishing, ctx, scope)
        probed = tuple(sorted({v for e in live for v in e.variables}))
        candidates = [tuple(dict(zip(probed, h)).get(v, 0) for v in names) for h in hits]
    return Verdict.inconclusive(names, candidates)


def solve_system(problem: Problem, config: SolverConfig | None = None) -> Verdict:
    """Decide a system of equations over shared variables."""
    config = config or SolverConfig()
    ctx = SolveContext.start(config)
    try:
        verdict = _solve_system(problem, ctx)
    except Timeout as exc:
        logger.warning("timeout: %s", exc)
        ctx.trace.append(TraceEntry("timeout", str(exc)))
        verdict = Verdict.inconclusive(problem.variables)
    return _finalize(verdict, problem, ctx)
