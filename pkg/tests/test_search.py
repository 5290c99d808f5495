import pytest
from hypothesis import assume, given, settings, strategies as st

from src.components.expr import Domain
from src.components.modular import TailCut
from src.components.parse import parse_problem
from src.components.search import (
    INF,
    MAGNITUDE_CAP,
    BoundSet,
    box_domains,
    detect_symmetry,
    enumerate_box,
    infer_bounds,
    probe,
    sign_contradiction,
    sign_flip_invariant,
    term_range,
)


def _eq(text):
    return parse_problem(text).equation


def test_term_range_over_intervals():
    (square,) = _eq("3*x^2 = 1").terms
    assert term_range(square, {"x": Domain.interval(-2, 5)}) == (0, 75)
    (power,) = _eq("2^x = 1 ; x in N0").terms
    assert term_range(power, {"x": Domain.interval(0, 4)}) == (1, 16)


def test_quartic_sum_is_bounded():
    bounds = infer_bounds(_eq("x^4 + y^4 + z^4 = 3042"))
    assert bounds.complete and bounds.proved
    for var in "xyz":
        assert -7 <= bounds.intervals[var].lo and bounds.intervals[var].hi <= 7


def test_sum_of_squares_below_zero_is_infeasible():
    bounds = infer_bounds(_eq("x^2 + y^2 = -1"))
    assert bounds.infeasible is not None
    assert bounds.infeasible.kind == "sign-magnitude"


def test_tail_cut_restricts_candidates():
    eq = _eq("x^2 - y! = 3 ; y in N0")
    bounds = infer_bounds(eq, {"y": Domain.natural()}, {"y": TailCut("y", (0, 1, 2, 3), 4)})
    assert bounds.candidates["y"] == (0, 1, 2, 3)
    assert bounds.intervals["y"] == Domain.interval(0, 3)
    assert bounds.provenance["y"] == "modular-tail"
    assert bounds.values("y") == [0, 1, 2, 3]


def test_user_box_is_not_a_proof():
    bounds = infer_bounds(_eq("x + 2*y = 3"), box=(-5, 5))
    assert bounds.complete
    assert not bounds.proved
    assert "user-box" in bounds.provenance.values()


def test_symmetric_group_detection():
    symmetry = detect_symmetry(_eq("x^4 + y^4 + z^4 = 3042"))
    assert symmetry.groups == (("x", "y", "z"),)
    assert detect_symmetry(_eq("x^2 + 2*y^2 = 9")).trivial


def test_cyclic_symmetry_detection():
    symmetry = detect_symmetry(_eq("x^2*y + y^2*z + z^2*x = 5"))
    assert symmetry.groups == ()
    assert symmetry.cycles == (("x", "y", "z"),)


@pytest.mark.parametrize(
    "text, expected",
    [("x^2 + y^2 = 25", True), ("x^3 + y = 0", True), ("x^3 + y = 2", False), ("x^2 + y = 1", False)],
)
def test_sign_flip_invariance(text, expected):
    assert sign_flip_invariant(_eq(text)) is expected


def _box(eq, lo, hi):
    return BoundSet({v: Domain.interval(lo, hi) for v in eq.variables})


@pytest.mark.parametrize(
    "text",
    [
        "x^2 + y^2 + z^2 = 27",
        "x^2*y + y^2*z + z^2*x = 5",
        "x*y + y*z + z*x = 11",
        "x^3 + y^3 + z^3 = 3",
    ],
)
def test_symmetry_reduced_enumeration_matches_brute_force(text, oracle):
    problem = parse_problem(text)
    eq = problem.equation
    result = enumerate_box(eq, _box(eq, -6, 6), detect_symmetry(eq))
    assert result.complete
    assert set(result.solutions) == oracle(problem, -6, 6)


def test_sign_split_enumeration_matches_brute_force(oracle):
    problem = parse_problem("x^2 + 2*y^2 = 9")
    eq = problem.equation
    result = enumerate_box(eq, _box(eq, -5, 5), sign_split=True)
    assert set(result.solutions) == oracle(problem, -5, 5) == {(3, 0), (-3, 0), (1, 2), (1, -2), (-1, 2), (-1, -2)}


def test_enumeration_respects_nonvanishing():
    eq = _eq("x*y = 0")
    result = enumerate_box(eq, _box(eq, -2, 2), nonvanishing=frozenset({"x"}))
    assert result.solutions == [(-2, 0), (-1, 0), (1, 0), (2, 0)]


def test_enumeration_budget_marks_incomplete():
    eq = _eq("x + y = 100")
    result = enumerate_box(eq, _box(eq, -10, 10), budget=10)
    assert not result.complete
    assert result.evaluations == 10


def test_probe_finds_small_pell_points():
    report = probe(_eq("x^2 - 2*y^2 = 1"), {}, box=(-20, 20))
    assert report.exhausted
    assert report.min_abs == 0
    assert {(1, 0), (3, 2), (17, 12), (-17, -12)} <= set(report.hits)
    assert len(report.log_quantiles) == 3


def test_probe_budget_stops_early():
    report = probe(_eq("x^2 - 2*y^2 = 1"), {}, box=(-20, 20), budget=5)
    assert report.evaluations == 5
    assert not report.exhausted


def test_probe_clips_exponentials_to_naturals():
    report = probe(_eq("2^x = y + 1 ; x in N0"), {"x": Domain.natural()}, box=(-3, 3))
    assert report.box["x"] == (0, 3)
    assert (0, 0) in report.hits and (1, 1) in report.hits


def test_box_domains():
    assert box_domains(["a", "b"], (-1, 1)) == {"a": Domain.interval(-1, 1), "b": Domain.interval(-1, 1)}


def test_term_range_saturates_at_the_cap():
    (power,) = _eq("2^x = 1 ; x in N0").terms
    assert term_range(power, {"x": Domain.interval(0, 10**6)}) == (1, INF)
    assert term_range(power, {"x": Domain(10**6, None)}) == (MAGNITUDE_CAP, INF)
    (huge,) = _eq(f"{10**400}*x^2 = 1").terms
    assert term_range(huge, {"x": Domain.interval(1, 2)}) == (MAGNITUDE_CAP, INF)


@pytest.mark.parametrize(
    "text, domains",
    [
        ("-3*y - 2*y^4 = 18", {}),
        ("3*x^4-2*x=-6", {}),
        ("-3*x+5*x^4+5*y^2+3*y^4=-16", {}),
        ("-2*y+4*y! = -6 ; y in N0", {"y": Domain.natural()}),
    ],
)
def test_propagation_with_growing_bounds_does_not_overflow(text, domains):
    bounds = infer_bounds(_eq(text), domains)
    assert bounds.infeasible is None or bounds.infeasible.kind == "sign-magnitude"


def test_exponential_lower_bound_stops_at_the_cap():
    eq = _eq("-3*z + 2*x + 4*2^z = -20 ; x,z in N0")
    bounds = infer_bounds(eq, {"x": Domain.natural(), "z": Domain.natural()})
    assert bounds.intervals["z"].lo >= 348
    assert bounds.intervals["z"].hi is None


def test_propagation_calls_the_deadline_check():
    calls = []
    infer_bounds(_eq("x^4 + y^4 + z^4 = 3042"), check=lambda: calls.append(1))
    assert calls

    def expired():
        raise TimeoutError("deadline")

    with pytest.raises(TimeoutError):
        infer_bounds(_eq("x^4 + y^4 + z^4 = 3042"), check=expired)


def test_sign_contradiction_uses_declared_domains_only():
    assert sign_contradiction(_eq("x^2 + y^2 + 1 = 0")).data["argument"] == "term-range"
    assert sign_contradiction(_eq("15*x^2 + 6*y^2 = 12")) is None
    assert sign_contradiction(_eq("x - y = 3"), {"x": Domain.interval(0, 1), "y": Domain.interval(0, 1)}) is not None


_terms = st.lists(
    st.tuples(st.integers(-5, 5).filter(bool), st.sampled_from("xy"), st.integers(1, 6)), min_size=1, max_size=4
)


@settings(max_examples=150, deadline=None, derandomize=True)
@given(terms=_terms, constant=st.integers(-50, 50))
def test_inferred_bounds_are_sound(terms, constant, oracle):
    text = "0 " + " ".join(f"{'-' if c < 0 else '+'} {abs(c)}*{v}^{k}" for c, v, k in terms) + f" = {constant}"
    problem = parse_problem(text)
    eq = problem.equation
    assume(eq.terms)
    bounds = infer_bounds(eq)
    solutions = oracle(problem, -4, 4)
    if bounds.infeasible is not None:
        assert not solutions
        return
    names = problem.variables
    for point in solutions:
        for v, value in zip(names, point):
            if v in bounds.intervals:
                assert bounds.intervals[v].contains(value)


def test_variable_dividing_every_term_divides_the_constant():
    bounds = infer_bounds(_eq("x^6*y + x*y^6 = 256"))
    assert bounds.candidates["x"] == bounds.candidates["y"] == (
        -256, -128, -64, -32, -16, -8, -4, -2, -1, 1, 2, 4, 8, 16, 32, 64, 128, 256,
    )
    assert bounds.sources == {"x": "proved-divisor", "y": "proved-divisor"}
    assert bounds.proved
    assert bounds.box_size() == 18 * 18


def test_divisor_candidates_respect_domains_and_tail_cuts():
    eq = _eq("x*y + 3*x = 12 ; x in N")
    bounds = infer_bounds(eq, {"x": Domain.positive()})
    assert bounds.values("x") == [1, 2, 3, 4, 6, 12]
    assert "y" not in bounds.candidates
    cut = infer_bounds(eq, {"x": Domain.positive()}, {"x": TailCut("x", (0, 1, 2), 3)})
    assert cut.values("x") == [1, 2]
    assert cut.sources["x"] == "modular-tail"
