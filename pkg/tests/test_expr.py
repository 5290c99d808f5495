import pytest
from hypothesis import given, settings, strategies as st

from src.components.errors import DomainViolation, NestedFraction, UnsupportedTerm, ZeroDenominatorConstant
from src.components.expr import AffineMap, Domain, complete_square_reduce
from src.components.parse import parse_problem


@pytest.mark.parametrize(
    "domain, name",
    [
        (Domain.integers(), "Z"),
        (Domain.positive(), "N"),
        (Domain.natural(), "N0"),
        (Domain.interval(-3, 4), "[-3,4]"),
        (Domain(None, 7), "[,7]"),
    ],
)
def test_domain_names(domain, name):
    assert domain.name == name


def test_domain_membership_and_intersection():
    n0 = Domain.natural()
    assert n0.contains(0) and not n0.contains(-1)
    assert n0.admits_negative is False
    assert Domain.integers().admits_negative
    clipped = Domain.integers().intersect(-5, 5)
    assert clipped == Domain.interval(-5, 5)
    assert clipped.is_symmetric and clipped.size() == 11
    assert Domain.interval(3, 1).is_empty


def test_normalizes_lhs_minus_rhs():
    eq = parse_problem("15*x^2+6*y^2=12").equation
    assert eq.constant == -12
    assert eq.content() == 3
    assert eq.evaluate({"x": 1, "y": 1}) == 9
    assert eq.variables == ("x", "y")


def test_like_terms_collect():
    eq = parse_problem("x*y + y*x - 2*x*y + x = 0").equation
    assert eq.render() == "x = 0"


def test_clearing_denominators_records_nonvanishing():
    problem = parse_problem("1/x+1/y=1")
    eq = problem.equation
    assert eq.nonvanishing == frozenset({"x", "y"})
    assert problem.nonvanishing == frozenset({"x", "y"})
    assert eq.evaluate({"x": 2, "y": 2}) == 0
    assert eq.evaluate({"x": 1, "y": 1}) != 0


def test_rational_coefficients_are_scaled_to_integers():
    eq = parse_problem("x/2 + y/3 = 1").equation
    assert all(t.coefficient in (3, 2) for t in eq.terms)
    assert eq.constant == -6


def test_exponential_and_factorial_evaluation():
    eq = parse_problem("2^x + y! = 10 ; x,y in N0").equation
    assert eq.evaluate({"x": 1, "y": 3}) == -2
    assert eq.evaluate({"x": 3, "y": 2}) == 0
    with pytest.raises(DomainViolation):
        eq.evaluate({"x": -1, "y": 0})
    with pytest.raises(DomainViolation):
        eq.evaluate({"x": 0, "y": -2})


@pytest.mark.parametrize(
    "text, error",
    [
        ("x^y = 1", UnsupportedTerm),
        ("0^x = 1", UnsupportedTerm),
        ("1/(x+y) = 1", NestedFraction),
        ("x/0 = 1", ZeroDenominatorConstant),
    ],
)
def test_rejected_terms(text, error):
    with pytest.raises(error):
        parse_problem(text)


def test_substitute_collects_remaining_terms():
    eq = parse_problem("x^2 + x*y + 3^z = 0 ; z in N0").equation
    reduced = eq.substitute({"x": 2, "z": 1})
    assert reduced.variables == ("y",)
    assert reduced.evaluate({"y": -3}) == 1


def test_rename_detects_symmetry():
    eq = parse_problem("x^4+y^4+z^4=3042").equation
    assert eq.rename({"x": "y", "y": "x"}) == eq
    skew = parse_problem("x^2+2*y^2=3").equation
    assert skew.rename({"x": "y", "y": "x"}) != skew


def test_affine_map_inverts_integrally():
    amap = AffineMap((("x", 2, 3), ("y", 1, -9)))
    assert amap.apply({"x": 1, "y": 11}) == (5, 2)
    assert amap.invert((5, 2)) == {"x": 1, "y": 11}
    assert amap.invert((4, 2)) is None


@pytest.mark.parametrize(
    "text",
    [
        "4*x^2-6*y^2+12*x+108*y-478=0",
        "9*x^2-325*y^2-42*x-130*y+35=0",
        "10*x^2+2*x-8*y^2=0",
        "x^2+y^2+2*x-4*y=20",
    ],
)
@given(x=st.integers(-50, 50), y=st.integers(-50, 50))
@settings(max_examples=50, deadline=None, derandomize=True)
def test_completed_squares_preserve_values(text, x, y):
    eq = parse_problem(text).equation
    centered = complete_square_reduce(eq)
    point = {"x": x, "y": y}
    squares = sum(c.weight * (c.alpha * point[c.variable] + c.beta) ** 2 for c in centered.components)
    assert squares - centered.target == centered.scale * eq.evaluate(point)


def test_problem_render_reparses_to_same_equations():
    problem = parse_problem("x^2 - 3*y = 19 and 13*y^3 + 6*x = 11 ; x, y in Z")
    again = parse_problem(problem.render())
    assert again.equations == problem.equations
    assert again.domains == problem.domains
