import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from src.components.errors import DomainUnbounded, StateBudgetExceeded
from src.components.expr import Domain
from src.components.modular import (
    check_obstruction,
    check_tail_cut,
    congruence_constraints,
    find_obstruction,
    residue_profile,
    satisfying_states,
    scan,
    tail_cuts,
)
from src.components.parse import parse_problem
from src.utils.numtheory import kempner, power_cycle

N0 = Domain.natural()


def _eq(text):
    return parse_problem(text).equation


def test_power_cycle_and_kempner():
    assert power_cycle(2, 8) == (3, 1)
    assert power_cycle(3, 16) == (0, 4)
    assert kempner(4) == 4
    assert kempner(9) == 6


def test_polynomial_profile_is_signed():
    profile = residue_profile(_eq("x^2 + 3*y = 1"), "x", 7)
    assert profile.signed and profile.preperiod == 0 and profile.horizon == 7


def test_exponential_profile_has_preperiod():
    profile = residue_profile(_eq("2^x = y^2 ; x in N0"), "x", 8, N0)
    assert (profile.preperiod, profile.period, profile.horizon) == (3, 1, 4)
    assert profile.is_exact(2) and not profile.is_exact(3)
    assert profile.describe(3) == "x = 3 (mod 1), x >= 3"


def test_exponential_over_integers_is_unbounded():
    with pytest.raises(DomainUnbounded):
        residue_profile(_eq("2^x = 5 ; x in N0"), "x", 4, Domain.integers())


def test_residue_profile_rejects_trivial_modulus():
    with pytest.raises(ValueError):
        residue_profile(_eq("x = 1"), "x", 1)


def test_quadratic_obstruction_at_five():
    eq = _eq("15*x^2 + 6*y^2 = 12")
    cert = find_obstruction(eq, range(2, 65))
    assert cert.kind == "modular"
    assert cert.modulus == 5
    assert cert.data["states"] == 25
    assert cert.data["domains"] == {"x": "Z", "y": "Z"}
    assert check_obstruction(eq, 5)


def test_solvable_residues_are_not_an_obstruction():
    eq = _eq("x^2 - 5 = 0")
    states = satisfying_states(eq, 5)
    assert states.states == frozenset({(0,)})
    assert not check_obstruction(eq, 5)


def test_exponential_parity_obstruction():
    eq = _eq("17^x - 13^y = 19^z ; x,y,z in N0")
    cert = find_obstruction(eq, range(2, 10), {v: N0 for v in "xyz"})
    assert cert.modulus == 2


def test_factorial_tail_cut():
    eq = _eq("x^2 - y! = 3 ; y in N0")
    cuts = tail_cuts(eq, [4], {"x": Domain.integers(), "y": N0})
    assert cuts["y"].values == (0, 1, 2, 3)
    assert cuts["y"].modulus == 4
    assert check_tail_cut(eq, cuts["y"], {"x": Domain.integers(), "y": N0})


def test_exponential_tail_cut_pins_value():
    eq = _eq("4^x - 3^y = 1 ; x,y in N0")
    cuts = tail_cuts(eq, [16], {"x": N0, "y": N0})
    assert cuts["x"].values == (1,)
    assert "y" not in cuts


def test_tail_cut_with_square():
    domains = {"x": N0, "y": N0, "z": Domain.integers()}
    eq = _eq("2^x - 3^y = z^2 ; x,y in N0")
    cuts = tail_cuts(eq, [8], domains)
    assert cuts["x"].values == (0, 1, 2)


def test_forged_tail_cut_is_rejected():
    eq = _eq("x^2 - y! = 3 ; y in N0")
    cut = tail_cuts(eq, [4], {"y": N0})["y"]
    forged = type(cut)("y", (0, 1), 4)
    assert not check_tail_cut(eq, forged, {"y": N0})


def test_congruence_constraints_per_variable():
    constraints = congruence_constraints(_eq("x^2 - 2 = 7*y"), 7)
    assert constraints.per_variable["x"].representatives == (3, 4)
    assert constraints.per_variable["y"].representatives == tuple(range(7))
    assert constraints.per_variable["x"].describe() == ["x = 3 (mod 7)", "x = 4 (mod 7)"]
    assert constraints.relations() == []
    assert constraints.describe() == ["x = 3 (mod 7)", "x = 4 (mod 7)"]


def test_congruence_constraints_render_joint_relations():
    constraints = congruence_constraints(_eq("x^2 - 3*y - 2*z = 0"), 2)
    assert all(len(r.representatives) == 2 for r in constraints.per_variable.values())
    assert constraints.relations() == ["y = x (mod 2)"]
    assert constraints.describe() == ["y = x (mod 2)"]

    constraints = congruence_constraints(_eq("x*y = 1"), 5)
    assert constraints.relations() == ["(x, y) in {(1, 1), (2, 3), (3, 2), (4, 4)} (mod 5)"]
    assert constraints.describe()[-1] == constraints.relations()[0]


def test_state_budget_is_enforced():
    eq = _eq("x^2 + y^2 + z^2 = 7")
    with pytest.raises(StateBudgetExceeded):
        satisfying_states(eq, 64, budget=1000)
    result = scan(eq, [8, 64], budget=1000)
    assert result.certificate is not None and result.certificate.modulus == 8
    result = scan(_eq("x^2 + y^2 + z^2 = 3"), [64, 3], budget=1000)
    assert result.skipped == [64] and result.scanned == 1


def test_interval_domain_prunes_residue_classes():
    states = satisfying_states(_eq("2*x = 6 ; x in [3,3]"), 2, {"x": Domain.interval(3, 3)})
    assert states.states == frozenset({(1,)})


def _text(coefficients, constant):
    monomials = ("x^2", "y^2", "x*y", "x", "y^3")
    parts = [f"{c}*{m}" for c, m in zip(coefficients, monomials) if c]
    return " + ".join(parts).replace("+ -", "- ") + f" = {constant}"


@given(
    coefficients=st.lists(st.integers(-6, 6), min_size=5, max_size=5),
    constant=st.integers(-30, 30),
)
@settings(max_examples=150, deadline=None, derandomize=True)
def test_obstruction_never_hides_small_solutions(coefficients, constant, oracle):
    assume(any(coefficients))
    problem = parse_problem(_text(coefficients, constant))
    if find_obstruction(problem.equation, range(2, 13)) is not None:
        assert oracle(problem, -8, 8) == set()


@pytest.mark.parametrize(
    "text",
    ["15*x^2 + 6*y^2 = 12", "x^3 + y^3 + z^3 = 58", "x^4 + y^4 = 4*z^2 + 3", "x^2 - 5*y^2 = 2"],
)
def test_random_assignments_never_satisfy_certified_equations(text):
    eq = _eq(text)
    assert find_obstruction(eq, range(2, 65)) is not None
    rng = np.random.default_rng(7)
    points = rng.integers(-10**6, 10**6, size=(10_000, len(eq.variables)))
    for row in points:
        assert eq.evaluate(dict(zip(eq.variables, map(int, row)))) != 0
