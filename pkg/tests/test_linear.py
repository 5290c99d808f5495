import pytest
from hypothesis import assume, given, settings, strategies as st

from src.components.errors import BothZero
from src.components.linear import (
    AffineLatticeFamily,
    check_linear_system,
    extended_gcd,
    hermite_column_form,
    solve_linear,
    solve_linear_system,
)
from src.components.verdict import Status


@pytest.mark.parametrize("a, b", [(240, 46), (0, -5), (-7, 3), (12, 0), (17, 17)])
def test_extended_gcd_bezout(a, b):
    g, s, t = extended_gcd(a, b)
    assert g > 0
    assert s * a + t * b == g
    assert a % g == 0 and b % g == 0


def test_extended_gcd_both_zero():
    with pytest.raises(BothZero):
        extended_gcd(0, 0)


def test_gcd_obstruction():
    verdict = solve_linear([6, 9], 5, ("x", "y"))
    assert verdict.status is Status.NO_SOLUTION
    assert verdict.certificate.kind == "gcd-linear"
    assert verdict.certificate.data == {"coefficients": [6, 9], "rhs": 5, "gcd": 3}


def test_single_equation_family():
    verdict = solve_linear([3, 5], 1, ("x", "y"))
    assert verdict.status is Status.FAMILY
    (family,) = verdict.families
    assert family.dimension == 1
    for t in range(-5, 6):
        point = family.member([t])
        assert 3 * point["x"] + 5 * point["y"] == 1
    assert family.contains({"x": 2, "y": -1})
    assert not family.contains({"x": 1, "y": 0})


def test_zero_equation_is_everything():
    verdict = solve_linear([0, 0], 0, ("x", "y"))
    assert verdict.status is Status.FAMILY
    assert verdict.families[0].dimension == 2


@pytest.mark.parametrize("coefficient, rhs, value", [(1, 0, 0), (3, -12, -4)])
def test_single_variable_equation_is_a_point_family(coefficient, rhs, value):
    verdict = solve_linear([coefficient], rhs, ("x",))
    assert verdict.status is Status.FAMILY
    (family,) = verdict.families
    assert family.dimension == 0
    assert family.parameters() == []
    assert family.expressions() == {"x": str(value)}
    assert list(family.materialize()) == [{"x": value}]
    assert family.contains({"x": value})
    assert not family.contains({"x": value + 1})


def test_unique_system_solution():
    verdict = solve_linear_system([[1, 1], [1, -1]], [3, 1], ("x", "y"))
    assert verdict.status is Status.FINITE
    assert verdict.solutions == ((2, 1),)


@pytest.mark.parametrize(
    "matrix, rhs, reason",
    [([[1, 1], [2, 2]], [1, 3], "rank"), ([[2, 4]], [3], "divisibility"), ([[2, 0], [0, 3]], [2, 4], "divisibility")],
)
def test_system_certificates_recheck(matrix, rhs, reason):
    verdict = solve_linear_system(matrix, rhs)
    assert verdict.status is Status.NO_SOLUTION
    assert verdict.certificate.kind == "linear-system"
    assert verdict.certificate.data["reason"] == reason
    assert check_linear_system(verdict.certificate.data)


def test_forged_system_certificate_fails():
    verdict = solve_linear_system([[1, 1], [2, 2]], [1, 3])
    forged = dict(verdict.certificate.data, rhs=[1, 2])
    assert not check_linear_system(forged)


def test_hermite_form_is_unimodular_reduction():
    matrix = [[4, 6, 10], [1, 2, 3]]
    form = hermite_column_form(matrix)
    product = [[sum(matrix[i][k] * form.unimodular[k][j] for k in range(3)) for j in range(3)] for i in range(2)]
    assert product == [list(row) for row in form.hermite]
    assert form.rank == 2


def test_lattice_materialize_respects_domains():
    from src.components.expr import Domain

    family = AffineLatticeFamily(("x", "y"), (0, 1), ((1, -1),), {"x": Domain.natural()})
    points = list(family.materialize(limit=3))
    assert points and all(p["x"] >= 0 for p in points)
    assert family.expressions() == {"x": "t1", "y": "1 - t1"}


@given(
    a=st.integers(-9, 9),
    b=st.integers(-9, 9),
    c=st.integers(-9, 9),
    rhs=st.integers(-20, 20),
)
@settings(max_examples=200, deadline=None, derandomize=True)
def test_lattice_covers_every_box_solution(a, b, c, rhs):
    assume(a or b or c)
    names = ("x", "y", "z")
    verdict = solve_linear([a, b, c], rhs, names)
    box = [
        {"x": x, "y": y, "z": z}
        for x in range(-6, 7)
        for y in range(-6, 7)
        for z in range(-6, 7)
        if a * x + b * y + c * z == rhs
    ]
    if verdict.status is Status.NO_SOLUTION:
        assert box == []
        return
    (family,) = verdict.families
    assert all(family.contains(point) for point in box)
    for params in ((0, 0), (1, -2), (-3, 4))[: family.dimension + 1]:
        point = family.member(params[: family.dimension])
        assert a * point["x"] + b * point["y"] + c * point["z"] == rhs
