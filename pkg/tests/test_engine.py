import pytest
from hypothesis import assume, given, settings, strategies as st

from src.components.engine import equation_problem, solve, solve_system
from src.components.parse import parse_problem
from src.components.verdict import Status
from src.components.verify import verdict_closure
from src.config import SolverConfig

FAST = SolverConfig(probe_budget=20_000, timeout_ms=5_000, probe_box=(-30, 30))


def _points(verdict):
    return {tuple(sorted(p.items())) for p in verdict.solution_maps()}


@pytest.mark.parametrize(
    "text, kind, modulus",
    [
        ("15*x^2+6*y^2=12", "modular", 5),
        ("x^3+y^3+z^3=58", "modular", 9),
        ("17^x-13^y=19^z ; x,y,z in N0", "modular", 2),
        ("5*x^2+125*y^3=4973", "content", None),
    ],
)
def test_certified_no_solution(text, kind, modulus):
    problem = parse_problem(text)
    verdict = solve(problem)
    assert verdict.status is Status.NO_SOLUTION
    assert verdict.certificate.kind == kind
    assert verdict.certificate.modulus == modulus
    assert verdict_closure(problem, verdict).valid


@pytest.mark.parametrize(
    "text, expected",
    [
        ("4^x-3^y=1 ; x,y in N0", [{"x": 1, "y": 1}]),
        ("18^x+16^y=19^z ; x,y,z in N0", [{"x": 1, "y": 0, "z": 1}]),
        ("3*x+5*x*y-6*y-5=0", [{"x": 1, "y": -2}]),
        ("3*x^2+4*y=19 and 5*x-2*y=3", [{"x": -5, "y": -14}]),
    ],
)
def test_exact_finite_sets(text, expected):
    problem = parse_problem(text)
    verdict = solve(problem)
    assert verdict.status is Status.FINITE
    assert verdict.solution_maps() == expected
    assert verdict.completeness


def test_linear_equation_is_a_family():
    problem = parse_problem("x + y = 5")
    verdict = solve(problem)
    assert verdict.status is Status.FAMILY
    assert verdict.families[0].kind == "affine-lattice"
    assert verdict_closure(problem, verdict).valid


def test_constant_equations():
    assert solve(parse_problem("0 = 0")).status is Status.FAMILY
    assert solve(parse_problem("0 = 1")).status is Status.NO_SOLUTION


def test_trace_and_stats_are_recorded():
    verdict = solve(parse_problem("x^4+y^4+z^4=3042"))
    assert verdict.status is Status.FINITE
    assert len(verdict.solutions) == 48
    assert verdict.trace
    assert set(verdict.stats) == {"evaluations", "moduli_scanned"}


def test_tiny_timeout_is_inconclusive_not_wrong():
    problem = parse_problem("x^3 + y^3 + z^3 = 33")
    verdict = solve(problem, SolverConfig(timeout_ms=1, probe_budget=0))
    assert verdict.status is Status.INCONCLUSIVE


def test_solve_is_deterministic():
    problem = parse_problem("x^2 - 6*y^2 = 3")
    first, second = solve(problem, FAST), solve(problem, FAST)
    assert first.status is second.status
    assert first.solutions == second.solutions
    assert first.certificate == second.certificate


@given(
    a=st.integers(-5, 5),
    b=st.integers(-5, 5),
    c=st.integers(-5, 5),
    d=st.integers(-5, 5),
    e=st.integers(-30, 30),
)
@settings(max_examples=40, deadline=None, derandomize=True)
def test_verdicts_never_contradict_brute_force(a, b, c, d, e, oracle):
    assume(a or b or c)
    text = f"{a}*x^2 + {b}*x*y + {c}*y^2 + {d}*x = {e}".replace("+ -", "- ")
    problem = parse_problem(text)
    assume(problem.variables == ("x", "y"))
    verdict = solve(problem, FAST)
    small = oracle(problem, -6, 6)
    if verdict.status is Status.NO_SOLUTION:
        assert small == set()
    elif verdict.status is Status.FINITE:
        in_box = {s for s in verdict.solutions if all(abs(v) <= 6 for v in s)}
        assert in_box == small
    for point in verdict.solution_maps():
        assert problem.equation.evaluate(point) == 0


@pytest.mark.parametrize(
    "text",
    [
        "x^2-3*y=19 and 13*y^3+6*x=11 and x^2+y^2=17",
        "3*x*y+5*x^3*y=230 and x^2+x*y=14",
        "x^2+y^8+z^6=0 and x^4+y^2-17=0",
    ],
)
def test_system_solutions_solve_each_equation(text):
    problem = parse_problem(text)
    verdict = solve_system(problem, FAST)
    assert verdict.status in (Status.FINITE, Status.NO_SOLUTION)
    for index in range(len(problem.equations)):
        single = solve(equation_problem(problem, index), FAST)
        if single.status is Status.NO_SOLUTION:
            assert verdict.status is Status.NO_SOLUTION
        if single.status is Status.FINITE:
            names = single.variables
            projected = {tuple(p[v] for v in names) for p in verdict.solution_maps()}
            assert projected <= set(single.solutions)


def _stages(verdict):
    return [entry.stage for entry in verdict.trace]


def test_residue_obstruction_precedes_propagated_magnitudes():
    verdict = solve(parse_problem("15*x^2+6*y^2=12"))
    assert verdict.certificate.kind == "modular"
    assert verdict.certificate.modulus == 5
    stages = _stages(verdict)
    assert stages.index("sign") < stages.index("modular")
    assert "magnitude" not in stages


def test_declared_domain_signs_precede_residues():
    verdict = solve(parse_problem("x^2+y^2+1=0"))
    assert verdict.certificate.kind == "sign-magnitude"
    assert verdict.certificate.data["argument"] == "term-range"
    assert "modular" not in _stages(verdict)


def test_propagated_magnitude_runs_after_the_scan():
    problem = parse_problem("1/x+1/y+1/z=5")
    verdict = solve(problem)
    assert verdict.status is Status.NO_SOLUTION
    assert verdict.certificate.kind == "sign-magnitude"
    stages = _stages(verdict)
    assert stages.index("modular") < stages.index("magnitude")
    assert verdict_closure(problem, verdict).valid


@pytest.mark.parametrize(
    "text",
    [
        "-3*y - 2*y^4 = 18",
        "3*x^4-2*x=-6",
        "-3*x+5*x^4+5*y^2+3*y^4=-16",
        "-2*y+4*y! = -6 ; y in N0",
        "-3*z + 2*x + 4*2^z = -20 ; x,z in N0",
    ],
)
def test_growing_bounds_terminate_without_error(text):
    problem = parse_problem(text)
    verdict = solve(problem, FAST)
    assert verdict.status is not Status.FAMILY
    assert verdict.solutions == ()
    if verdict.status is Status.NO_SOLUTION:
        assert verdict_closure(problem, verdict).valid


def test_divisor_candidates_decide_a_sextic():
    problem = parse_problem("x^6*y+x*y^6=256")
    verdict = solve(problem)
    assert verdict.status is Status.FINITE
    assert verdict.solution_maps() == [{"x": 2, "y": 2}]
    assert verdict.completeness == "divisor-candidates"
    assert verdict_closure(problem, verdict).valid
