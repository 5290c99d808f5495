"""Independent checkers for certificates and claimed solutions.

Each certificate kind has a checker that re-derives the contradiction from
the problem and the payload alone; nothing from the solve run is reused.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import islice, product
from math import gcd
from typing import Any, Callable, Iterable, Mapping, Sequence

import sympy

from src.components.algebraic import (
    ProductForm,
    binomial_solve,
    discriminant_analysis,
    discriminant_pivots,
    discriminant_solve,
    factor_pair_solve,
    flt_check,
    ordered_magnitude_solve,
    product_identity_holds,
    separation_solve,
    univariate_polynomial_solve,
    zero_form_families,
)
from src.components.engine import (
    equation_problem,
    joint_bounds,
    linear_substitution,
    live_problem,
    prepare_equations,
    solve,
    substitute_problem,
)
from src.components.errors import (
    BudgetExceeded,
    DomainViolation,
    MalformedCertificate,
    NotApplicable,
    StateBudgetExceeded,
    ZeroTarget,
)
from src.components.expr import Domain, NormalizedEquation, Problem
from src.components.linear import check_linear_system, solve_linear_system
from src.components.modular import TailCut, check_obstruction, check_tail_cut
from src.components.pell import back_transform, check_back_transform, check_empty_class, reduce_to_pell, solve_pell
from src.components.search import Symmetry, effective_domains, enumerate_box, infer_bounds
from src.components.verdict import Certificate, Status, Verdict
from src.config import SolverConfig
from src.schemas.verdict import family_payload

logger = logging.getLogger(__name__)

FAMILY_MEMBER_CAP = 2000

Outcome = tuple[bool, str]


@dataclass(frozen=True)
class CheckReport:
    valid: bool
    kind: str
    message: str


@dataclass(frozen=True)
class ItemReport:
    label: str
    valid: bool
    message: str = "ok"


@dataclass
class SolutionReport:
    items: list[ItemReport] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return all(item.valid for item in self.items)

    @property
    def failures(self) -> list[ItemReport]:
        return [item for item in self.items if not item.valid]


# --------------------------------------------------------------------------- #
# Helpers
# --------------------------------------------------------------------------- #


def _single(problem: Problem) -> tuple[NormalizedEquation, dict[str, Domain]]:
    if problem.is_system:
        raise MalformedCertificate("certificate applies to a single equation, not a system")
    if not problem.equations:
        raise MalformedCertificate("problem has no equation")
    eq = prepare_equations(problem)[0]
    return eq, effective_domains(eq, problem.domains)


def _satisfies(problem: Problem, point: Mapping[str, int]) -> bool:
    if not problem.admits(point):
        return False
    try:
        return all(eq.evaluate(point) == 0 for eq in problem.equations)
    except DomainViolation:
        return False


def _pell_options(config: SolverConfig) -> dict[str, int]:
    return {
        "inspection_limit": config.pell_inspection_limit,
        "class_search_limit": config.pell_class_search_limit,
        "max_d": config.pell_max_d,
    }


def _refuted_by(verdict_status: Status, what: str) -> Outcome:
    if verdict_status is Status.NO_SOLUTION:
        return True, f"{what} re-derived"
    return False, f"{what} does not hold: recomputation gives {verdict_status.value}"


# --------------------------------------------------------------------------- #
# Checkers, one per certificate kind
# --------------------------------------------------------------------------- #


def _check_modular(problem: Problem, data: Mapping, config: SolverConfig) -> Outcome:
    eq, domains = _single(problem)
    m = int(data["modulus"])
    if m < 2:
        raise MalformedCertificate(f"modulus {m} is below 2")
    if check_obstruction(eq, m, domains, config.state_budget):
        return True, f"no residue state satisfies the equation modulo {m}"
    return False, f"the equation has satisfying residue states modulo {m}"


def _check_content(problem: Problem, data: Mapping, config: SolverConfig) -> Outcome:
    eq, _ = _single(problem)
    d = int(data["divisor"])
    if d < 2:
        return False, f"divisor {d} proves nothing"
    if any(t.coefficient % d for t in eq.terms):
        return False, f"{d} does not divide every term coefficient"
    if eq.constant % d == 0:
        return False, f"{d} divides the constant {eq.constant}"
    return True, f"{d} divides every term but not the constant {eq.constant}"


def _check_sign_magnitude(problem: Problem, data: Mapping, config: SolverConfig) -> Outcome:
    argument = data["argument"]
    if argument == "constant":
        if any(not eq.terms and eq.constant for eq in problem.equations):
            return True, "an equation reduces to a nonzero constant"
        return False, "no equation reduces to a nonzero constant"
    if argument == "joint-bounds":
        bounds = joint_bounds(problem, int(data["max_modulus"]), config.state_budget)
        if bounds.infeasible is not None:
            return True, "the intersected bounds are empty"
        return False, "the intersected bounds are not empty"
    eq, domains = _single(problem)
    if argument == "power":
        return _refuted_by(binomial_solve(eq, domains, eq.nonvanishing).status, "power equation")
    if argument == "ordered-magnitude":
        return _refuted_by(ordered_magnitude_solve(eq, domains, eq.nonvanishing).status, "ordered-magnitude bound")
    bounds = infer_bounds(eq, domains)
    if bounds.infeasible is None:
        return False, f"{argument}: the bounds are feasible"
    found = bounds.infeasible.data.get("argument", bounds.infeasible.kind)
    if found != argument:
        logger.info("sign argument %s re-derived as %s", argument, found)
    return True, f"{found}: no value fits the bounds"


def _check_gcd_linear(problem: Problem, data: Mapping, config: SolverConfig) -> Outcome:
    eq, _ = _single(problem)
    if not eq.is_linear:
        return False, "the equation is not linear"
    coefficients = {t.powers[0][0]: t.coefficient for t in eq.terms}
    claimed = [int(c) for c in data["coefficients"]]
    if sorted(claimed) != sorted(coefficients.values()) or int(data["rhs"]) != -eq.constant:
        return False, "coefficients do not match the equation"
    g = 0
    for c in claimed:
        g = gcd(g, c)
    if g != int(data["gcd"]):
        return False, f"gcd is {g}, not {data['gcd']}"
    if g and int(data["rhs"]) % g == 0:
        return False, f"{g} divides {data['rhs']}"
    return True, f"gcd {g} does not divide {data['rhs']}"


def _linear_rows(problem: Problem) -> set[tuple[tuple[int, ...], int]]:
    rows = set()
    for eq in prepare_equations(problem):
        if not eq.terms or not eq.is_linear:
            continue
        coefficients = {t.powers[0][0]: t.coefficient for t in eq.terms}
        for names in (problem.variables, eq.variables):
            rows.add((tuple(coefficients.get(v, 0) for v in names), -eq.constant))
    return rows


def _check_linear_system(problem: Problem, data: Mapping, config: SolverConfig) -> Outcome:
    rows = _linear_rows(problem)
    for row, b in zip(data["matrix"], data["rhs"]):
        if (tuple(int(c) for c in row), int(b)) not in rows:
            return False, f"row {list(row)} = {b} is not an equation of the problem"
    if check_linear_system(data):
        return True, f"{data['reason']} fails at row {data['row']} of the triangular system"
    return False, "the triangular system is solvable"


def _check_flt(problem: Problem, data: Mapping, config: SolverConfig) -> Outcome:
    eq, domains = _single(problem)
    certificate, verdict = flt_check(eq, domains, eq.nonvanishing)
    if int(certificate.data["n"]) != int(data["n"]):
        return False, f"the equation rewrites with n = {certificate.data['n']}, not {data['n']}"
    return _refuted_by(verdict.status, f"exponent {data['n']} with every zero case excluded")


def _pell_refutations(eq: NormalizedEquation, domains, config: SolverConfig) -> Iterable[Certificate]:
    """Certificates produced by every Pell route reaching ``eq``."""
    try:
        reduction = reduce_to_pell(eq)
    except NotApplicable:
        reduction = None
    if reduction is not None:
        pell = solve_pell(reduction.form, **_pell_options(config))
        if pell.status is Status.NO_SOLUTION:
            yield pell.certificate
        elif pell.status is Status.FAMILY:
            result = back_transform(pell.families[0], reduction.back_map, 10, domains, eq.nonvanishing)
            if result.certificate is not None:
                yield result.certificate
    for pivot in discriminant_pivots(eq):
        verdict = discriminant_solve(eq, pivot, domains, eq.nonvanishing, config.factor_limit, _pell_options(config))
        if verdict.status is Status.NO_SOLUTION:
            yield verdict.certificate


def _check_pell(problem: Problem, data: Mapping, config: SolverConfig, kind: str) -> Outcome:
    eq, domains = _single(problem)
    if kind == "pell-empty-class":
        holds = check_empty_class(data, config.pell_inspection_limit)
    else:
        holds = check_back_transform(data)
    if not holds:
        return False, f"x^2 - {data['d']}*y^2 = {data['c']}: the claim fails on recomputation"
    for certificate in _pell_refutations(eq, domains, config):
        if certificate.kind == kind and dict(certificate.data) == dict(data):
            return True, f"x^2 - {data['d']}*y^2 = {data['c']} re-derived from the equation"
    return False, f"x^2 - {data['d']}*y^2 = {data['c']} is not a reduction of the equation"


def _check_factor_enumeration(problem: Problem, data: Mapping, config: SolverConfig) -> Outcome:
    eq, domains = _single(problem)
    pf = ProductForm.from_dict(data)
    if not product_identity_holds(eq, pf):
        return False, f"{pf.render()} is not the equation"
    try:
        verdict = factor_pair_solve(pf, eq.variables, domains, eq.nonvanishing, config.factor_limit)
    except ZeroTarget:
        verdict = zero_form_families(pf, eq.variables, domains, eq.nonvanishing)
    return _refuted_by(verdict.status, f"factor pairs of {pf.target}")


def _check_discriminant(problem: Problem, data: Mapping, config: SolverConfig) -> Outcome:
    eq, domains = _single(problem)
    da = discriminant_analysis(eq, data["pivot"])
    if (da.A, da.B, da.C) != (int(data["A"]), int(data["B"]), int(data["C"])):
        return False, f"discriminant is {da.A}*y^2 + {da.B}*y + {da.C}"
    verdict = discriminant_solve(
        eq, data["pivot"], domains, eq.nonvanishing, config.factor_limit, _pell_options(config)
    )
    return _refuted_by(verdict.status, f"discriminant route {da.route}")


def _check_divisor_candidates(problem: Problem, data: Mapping, config: SolverConfig) -> Outcome:
    eq, domains = _single(problem)
    solver = univariate_polynomial_solve if len(eq.variables) == 1 else separation_solve
    verdict = solver(eq, domains, eq.nonvanishing, config.factor_limit)
    if verdict.status is not Status.NO_SOLUTION:
        return False, f"recomputation gives {verdict.status.value}"
    found = sorted(verdict.certificate.data.get("candidates", []))
    if found != sorted(int(c) for c in data["candidates"]):
        return False, f"candidate list differs: {found}"
    return True, f"none of {len(found)} divisor candidates solves the equation"


def _branch_problem(problem: Problem, variable: str, value: int) -> Problem:
    eq = prepare_equations(problem)[0]
    sub = eq.substitute({variable: value})
    domains = {v: d for v, d in problem.domains.items() if v != variable}
    constraints = tuple(g - {variable} for g in problem.constraints if g - {variable})
    return Problem((sub,), domains, constraints)


def _check_case_split(problem: Problem, data: Mapping, config: SolverConfig) -> Outcome:
    eq, domains = _single(problem)
    var = data["variable"]
    restriction = data["restriction"]
    cuts = {}
    for raw in restriction.get("cuts", []):
        cut = TailCut(raw["variable"], tuple(int(v) for v in raw["values"]), int(raw["modulus"]))
        if not check_tail_cut(eq, cut, domains, config.state_budget):
            return False, f"tail cut {cut.variable} in {list(cut.values)} fails modulo {cut.modulus}"
        cuts[cut.variable] = cut
    bounds = infer_bounds(eq, domains, cuts)
    if var not in bounds.intervals or (var not in bounds.candidates and not bounds.intervals[var].is_finite):
        return False, f"{var} is not confined to a finite set"
    expected = []
    for value in bounds.values(var):
        try:
            eq.substitute({var: value})
        except DomainViolation:
            continue
        expected.append(value)
    branches = {int(b["value"]): b["certificate"] for b in data["branches"]}
    if sorted(branches) != expected:
        return False, f"branches {sorted(branches)} do not cover {var} in {expected}"
    for value in expected:
        branch = Certificate.from_dict(branches[value])
        report = verify_certificate(_branch_problem(problem, var, value), branch, config)
        if not report.valid:
            return False, f"branch {var} = {value}: {report.message}"
    return True, f"every value of {var} in {expected} is refuted"


def _check_finite_exclusion(problem: Problem, data: Mapping, config: SolverConfig) -> Outcome:
    if data["mode"] == "box":
        bounds = joint_bounds(problem, int(data["max_modulus"]), config.state_budget)
        if not bounds.proved:
            return False, "joint bounds are not complete"
        box = {v: [d.lo, d.hi] for v, d in sorted(bounds.intervals.items())}
        if box != {v: list(pair) for v, pair in data["box"].items()}:
            return False, f"joint bounds are {box}"
        eqs = [e for e in prepare_equations(problem) if e.terms]
        result = enumerate_box(eqs, bounds, Symmetry(), config.enum_budget, problem.nonvanishing)
        if not result.complete:
            raise BudgetExceeded("joint box exceeds the enumeration budget")
        if result.solutions:
            return False, f"{len(result.solutions)} points of the box solve the system"
        return True, f"no point of the {bounds.box_size()}-point box solves the system"

    index = int(data["index"])
    names = list(data["variables"])
    claimed = sorted(tuple(int(x) for x in s) for s in data["solutions"])
    single = equation_problem(problem, index)
    derived = solve(single, config.model_copy(update={"probe_budget": 0}))
    if derived.status is not Status.FINITE:
        return False, f"equation {index + 1} re-solves to {derived.status.value}"
    position = [derived.variables.index(v) for v in names]
    found = sorted(tuple(s[i] for i in position) for s in derived.solutions)
    if found != claimed:
        return False, f"equation {index + 1} has solutions {found}"
    for solution, branch in zip(claimed, data["branches"]):
        assignment = dict(zip(names, solution))
        if set(assignment) >= set(problem.variables):
            if _satisfies(problem, assignment):
                return False, f"{assignment} solves the system"
            continue
        try:
            sub = substitute_problem(problem, index, assignment)
        except DomainViolation:
            continue
        if branch is None:
            return False, f"no certificate for {assignment}"
        report = verify_certificate(live_problem(sub), Certificate.from_dict(branch), config)
        if not report.valid:
            return False, f"{assignment}: {report.message}"
    return True, f"none of the {len(claimed)} solutions of equation {index + 1} extends to the system"


def _check_system_equation(problem: Problem, data: Mapping, config: SolverConfig) -> Outcome:
    index = int(data["index"])
    if not 0 <= index < len(problem.equations):
        raise MalformedCertificate(f"equation index {index} out of range")
    inner = Certificate.from_dict(data["certificate"])
    report = verify_certificate(equation_problem(problem, index), inner, config)
    return report.valid, f"equation {index + 1}: {report.message}"


def _check_linear_substitution(problem: Problem, data: Mapping, config: SolverConfig) -> Outcome:
    if "point" in data:
        names = problem.variables
        linear = [e for e in prepare_equations(problem) if e.terms and e.is_linear]
        matrix = [[sum(t.coefficient for t in e.terms if t.powers[0][0] == v) for v in names] for e in linear]
        joint = solve_linear_system(matrix, [-e.constant for e in linear], names)
        point = tuple(int(x) for x in data["point"])
        if joint.status is not Status.FINITE or joint.solutions != (point,):
            return False, "the linear equations do not force that point"
        if _satisfies(problem, dict(zip(names, point))):
            return False, f"{list(point)} solves the system"
        return True, f"the forced point {list(point)} fails the system"
    verdict = linear_substitution(problem)
    if verdict.status is not Status.NO_SOLUTION:
        return False, f"substitution gives {verdict.status.value}"
    if dict(verdict.certificate.data) != dict(data):
        return False, "substituted polynomial differs"
    return True, f"no integer root of the substituted polynomial {data['polynomial']} fits"


CHECKERS: dict[str, Callable[[Problem, Mapping, SolverConfig], Outcome]] = {
    "modular": _check_modular,
    "content": _check_content,
    "sign-magnitude": _check_sign_magnitude,
    "gcd-linear": _check_gcd_linear,
    "linear-system": _check_linear_system,
    "flt": _check_flt,
    "pell-empty-class": lambda p, d, c: _check_pell(p, d, c, "pell-empty-class"),
    "pell-back-transform": lambda p, d, c: _check_pell(p, d, c, "pell-back-transform"),
    "factor-enumeration": _check_factor_enumeration,
    "discriminant": _check_discriminant,
    "divisor-candidates": _check_divisor_candidates,
    "case-split": _check_case_split,
    "finite-exclusion": _check_finite_exclusion,
    "system-equation": _check_system_equation,
    "linear-substitution": _check_linear_substitution,
}


def verify_certificate(problem: Problem, certificate: Certificate, config: SolverConfig | None = None) -> CheckReport:
    """Re-derive the contradiction a certificate claims.

    Args:
        problem: The problem the certificate refers to.
        certificate: Kind plus payload, as emitted in a NoSolution verdict.
        config: Budgets for recomputation; defaults apply when omitted.

    Returns:
        Report whose ``valid`` flag is true iff the contradiction holds.

    Raises:
        MalformedCertificate: unknown kind or a payload missing required fields.
    """
    config = config or SolverConfig()
    checker = CHECKERS.get(certificate.kind)
    if checker is None:
        raise MalformedCertificate(f"unknown certificate kind {certificate.kind!r}")
    try:
        valid, message = checker(problem, certificate.data, config)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise MalformedCertificate(f"{certificate.kind} certificate: {exc!r}") from exc
    except NotApplicable as exc:
        valid, message = False, f"does not apply: {exc}"
    except (BudgetExceeded, StateBudgetExceeded) as exc:
        valid, message = False, f"could not be rechecked: {exc}"
    logger.debug("%s certificate: valid=%s %s", certificate.kind, valid, message)
    return CheckReport(valid, certificate.kind, message)


# --------------------------------------------------------------------------- #
# Solutions and families
# --------------------------------------------------------------------------- #


def _label(point: Mapping[str, Any]) -> str:
    return "(" + ", ".join(f"{v}={x}" for v, x in sorted(point.items())) + ")"


def check_point(problem: Problem, point: Mapping[str, Any]) -> str | None:
    """Failure message for one assignment, or ``None`` when it solves the problem."""
    missing = [v for v in problem.variables if v not in point]
    if missing:
        return f"missing value for {', '.join(missing)}"
    for var, value in sorted(point.items()):
        if isinstance(value, bool) or not isinstance(value, int):
            return f"{var} = {value} is not an integer"
    for var in sorted(problem.nonvanishing):
        if point.get(var) == 0:
            return f"{var} = 0 violates {var} != 0"
    for var in problem.variables:
        domain = problem.domain(var)
        if not domain.contains(point[var]):
            return f"{var} = {point[var]} is outside {domain.name}"
    for i, eq in enumerate(problem.equations):
        try:
            value = eq.evaluate(point)
        except DomainViolation as exc:
            return f"equation {i + 1}: {exc}"
        if value:
            return f"equation {i + 1} evaluates to {value}"
    return None


def _parameter_values(domain: str, limit: int) -> list[int]:
    if domain == "Z":
        return list(range(0, limit + 1))
    if domain == "N":
        return list(range(1, limit + 2))
    if domain == "N0":
        return list(range(0, limit + 1))
    lo, _, hi = domain.strip("[]").partition(",")
    if lo:
        top = int(lo) + limit if not hi else min(int(hi), int(lo) + limit)
        return list(range(int(lo), top + 1))
    if hi:
        return list(range(int(hi) - limit, int(hi) + 1))
    return list(range(0, limit + 1))


def _member_filter(constraints: Sequence[str]) -> Callable[[Mapping[str, int]], bool]:
    """Membership conditions readable from a family's constraint list."""
    nonzero = [c.split("!=")[0].strip() for c in constraints if c.endswith("!= 0")]
    ranges = []
    for c in constraints:
        var, sep, name = c.partition(" in ")
        if sep and var.isidentifier():
            ranges.append((var, name))

    def admits(point: Mapping[str, int]) -> bool:
        if any(point.get(v) == 0 for v in nonzero):
            return False
        for var, name in ranges:
            if var in point and _outside(name, point[var]):
                return False
        return True

    return admits


def _outside(name: str, value: int) -> bool:
    if name == "Z":
        return False
    if name == "N":
        return value < 1
    if name == "N0":
        return value < 0
    lo, _, hi = name.strip("[]").partition(",")
    return (lo != "" and value < int(lo)) or (hi != "" and value > int(hi))


def family_members(family: Mapping[str, Any], limit: int) -> Iterable[dict[str, Any]]:
    """Members of a serialized family with every parameter in ``0..limit``.

    Families whose expressions are not closed forms in their parameters are
    checked through their listed ``sample`` members.
    """
    parameters = [(name, domain) for name, domain in family["parameters"]]
    symbols = {name: sympy.Symbol(name, integer=True) for name, _ in parameters}
    expressions = {v: sympy.sympify(e, locals=symbols) for v, e in family["expressions"].items()}
    free = set().union(*(e.free_symbols for e in expressions.values())) if expressions else set()
    if not {s.name for s in free} <= set(symbols):
        yield from (dict(m) for m in family.get("sample", []))
        return
    admits = _member_filter(family.get("constraints", []))
    grids = [_parameter_values(domain, limit) for _, domain in parameters]
    for combo in islice(product(*grids), FAMILY_MEMBER_CAP):
        subs = {symbols[name]: value for (name, _), value in zip(parameters, combo)}
        point: dict[str, Any] = {}
        for var, expr in expressions.items():
            value = sympy.nsimplify(expr.subs(subs))
            point[var] = int(value) if value.is_integer else value
        if all(isinstance(x, int) for x in point.values()) and not admits(point):
            continue
        yield point


def verify_solutions(
    problem: Problem,
    solutions: Sequence[Mapping[str, Any]] = (),
    families: Sequence[Mapping[str, Any]] = (),
    config: SolverConfig | None = None,
) -> SolutionReport:
    """Substitute every claimed solution and sampled family member.

    Args:
        problem: Problem the claims refer to.
        solutions: Variable to integer maps.
        families: Serialized families with ``parameters`` and ``expressions``.
        config: ``family_sample`` bounds the parameter range.

    Returns:
        Per-item report; one item per solution and per family.
    """
    config = config or SolverConfig()
    report = SolutionReport()
    for point in solutions:
        failure = check_point(problem, point)
        report.items.append(ItemReport(f"solution {_label(point)}", failure is None, failure or "ok"))
    for index, family in enumerate(families, start=1):
        label = f"family {index} ({family.get('kind', 'unknown')})"
        try:
            members = list(family_members(family, config.family_sample))
        except (KeyError, TypeError, ValueError, sympy.SympifyError) as exc:
            raise MalformedCertificate(f"{label}: {exc!r}") from exc
        failure = None
        for member in members:
            failure = check_point(problem, member)
            if failure is not None:
                failure = f"member {_label(member)}: {failure}"
                break
        message = failure or f"{len(members)} sampled members solve the problem"
        report.items.append(ItemReport(label, failure is None, message))
    return report


def verdict_closure(
    problem: Problem, verdict: Verdict, config: SolverConfig | None = None
) -> SolutionReport | CheckReport:
    """Check a verdict the way a reader of its report would."""
    if verdict.status is Status.NO_SOLUTION:
        return verify_certificate(problem, verdict.certificate, config)
    points = verdict.solution_maps()
    return verify_solutions(problem, points, [family_payload(f) for f in verdict.families], config)
