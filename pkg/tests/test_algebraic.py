import pytest

from src.components.algebraic import (
    Parameter,
    ProductForm,
    binomial_solve,
    bilinear_product_form,
    common_factor,
    discriminant_analysis,
    discriminant_solve,
    divide_out,
    factor_pair_solve,
    flt_check,
    isolated_linear_solve,
    ordered_magnitude_solve,
    product_forms,
    product_identity_holds,
    separation_solve,
    square_difference_product_form,
    univariate_polynomial_solve,
    zero_form_families,
)
from src.components.errors import NotApplicable, ZeroTarget
from src.components.expr import AffineForm
from src.components.parse import parse_problem
from src.components.verdict import Status


def _eq(text):
    return parse_problem(text).equation


def _members_solve(verdict, eq, limit=4):
    for family in verdict.families:
        for point in family.materialize(limit):
            assert eq.evaluate(point) == 0


def test_parameter_values():
    assert Parameter("k", None).values(2) == [0, 1, -1, 2, -2]
    assert Parameter("k", 3).values(2) == [3, 4, 5]
    assert Parameter("k", None).domain == "Z"
    assert Parameter("k", 0).domain == "N0"


def test_bilinear_factor_pairs_match_brute_force(oracle):
    problem = parse_problem("x*y + 2*x + 3*y = 10")
    eq = problem.equation
    pf = bilinear_product_form(eq)
    assert pf.target == 16
    assert product_identity_holds(eq, pf)
    verdict = factor_pair_solve(pf, eq.variables)
    assert verdict.status is Status.FINITE
    assert set(verdict.solutions) == oracle(problem, -20, 20)
    assert len(verdict.solutions) == 10


def test_difference_of_squares(oracle):
    problem = parse_problem("x^2 - y^2 = 15")
    eq = problem.equation
    pf = square_difference_product_form(eq)
    assert pf is not None and product_identity_holds(eq, pf)
    verdict = factor_pair_solve(pf, eq.variables)
    assert set(verdict.solutions) == oracle(problem, -10, 10)
    assert len(verdict.solutions) == 8


def test_product_forms_all_hold():
    eq = _eq("(x+1)*(y-2) = 6")
    forms = product_forms(eq)
    assert forms
    assert all(product_identity_holds(eq, pf) for pf in forms)


def test_zero_target_splits_into_lines():
    eq = _eq("x*y = 0")
    pf = bilinear_product_form(eq)
    with pytest.raises(ZeroTarget):
        factor_pair_solve(pf, eq.variables)
    verdict = zero_form_families(pf, eq.variables)
    assert verdict.status is Status.FAMILY
    assert len(verdict.families) == 2
    _members_solve(verdict, eq)


def test_single_variable_zero_forms_give_points():
    pf = ProductForm((AffineForm.of({"x": 1}), AffineForm.of({"x": 1}, -2)), 0)
    verdict = zero_form_families(pf, ("x",))
    assert verdict.status is Status.FINITE
    assert verdict.solutions == ((0,), (2,))


def test_discriminant_range_route(oracle):
    problem = parse_problem("x^2 + x*y + y^2 = 7")
    eq = problem.equation
    analysis = discriminant_analysis(eq, "x")
    assert (analysis.A, analysis.B, analysis.C) == (-3, 0, 28)
    assert analysis.route == "range"
    verdict = discriminant_solve(eq, "x")
    assert verdict.status is Status.FINITE
    assert set(verdict.solutions) == oracle(problem, -8, 8)
    assert len(verdict.solutions) == 12


def test_discriminant_range_without_solutions():
    verdict = discriminant_solve(_eq("x^2 + x*y + y^2 = 2"), "x")
    assert verdict.status is Status.NO_SOLUTION
    assert verdict.certificate.kind == "discriminant"


def test_discriminant_needs_square_of_pivot():
    with pytest.raises(NotApplicable):
        discriminant_analysis(_eq("x*y + y^2 = 3"), "x")


def test_separation_by_divisibility(oracle):
    problem = parse_problem("x*y + 4*y = x^2 + 1")
    verdict = separation_solve(problem.equation)
    assert verdict.status is Status.FINITE
    assert set(verdict.solutions) == {(-21, -26), (-5, -26), (-3, 10), (13, 10)}
    assert set(verdict.solutions) == oracle(problem, -30, 30)


def test_separation_family_when_divisor_annihilates():
    eq = _eq("x^2*y - 5*x*y + 6*y + x - 2 = 0")
    verdict = separation_solve(eq)
    assert verdict.status is Status.FAMILY
    assert verdict.solutions == ((4, -1),)
    _members_solve(verdict, eq)


@pytest.mark.parametrize(
    "text, status",
    [
        ("2*x^3 = 3*y^3", Status.FINITE),
        ("x^2 = 4*y^2", Status.FAMILY),
        ("x^4 = y^6", Status.FAMILY),
        ("x^2 = -4", Status.NO_SOLUTION),
        ("3*x^2 = 7", Status.NO_SOLUTION),
    ],
)
def test_binomial_power_equations(text, status):
    eq = _eq(text)
    verdict = binomial_solve(eq)
    assert verdict.status is status
    _members_solve(verdict, eq)
    if status is Status.FINITE:
        assert verdict.solutions == ((0, 0),)


def test_flt_reduces_to_vanishing_slots():
    eq = _eq("x^3 + y^3 = z^3")
    certificate, verdict = flt_check(eq)
    assert certificate.kind == "flt"
    assert certificate.data["n"] == 3
    assert verdict.status is Status.FAMILY
    for family in verdict.families:
        for point in family.materialize(3):
            assert point["x"] * point["y"] * point["z"] == 0
            assert eq.evaluate(point) == 0


def test_flt_with_nonvanishing_has_no_solution():
    problem = parse_problem("x^4 + y^4 = z^4 ; x,y,z in Z, x*y*z != 0")
    _, verdict = flt_check(problem.equation, problem.domains, problem.nonvanishing)
    assert verdict.status is Status.NO_SOLUTION


def test_flt_ignores_quadratics():
    with pytest.raises(NotApplicable):
        flt_check(_eq("x^2 + y^2 = z^2"))


def test_isolated_linear_residue_families():
    eq = _eq("x^2 + 3*z = 7")
    verdict = isolated_linear_solve(eq)
    assert verdict.status is Status.FAMILY
    assert len(verdict.families) == 2
    _members_solve(verdict, eq)


def test_isolated_linear_unit_coefficient():
    eq = _eq("x*y + z = 1")
    verdict = isolated_linear_solve(eq)
    assert len(verdict.families) == 1
    _members_solve(verdict, eq)


def test_isolated_linear_modular_obstruction():
    verdict = isolated_linear_solve(_eq("x^2 + 3*z = 2"))
    assert verdict.status is Status.NO_SOLUTION
    assert verdict.certificate.kind == "modular"


def test_ordered_magnitude(oracle):
    problem = parse_problem("x+y+z=x*y*z ; x,y,z in Z, x*y*z != 0")
    verdict = ordered_magnitude_solve(problem.equation, problem.domains, problem.nonvanishing)
    assert verdict.status is Status.FINITE
    assert len(verdict.solutions) == 12
    assert set(verdict.solutions) == oracle(problem, -8, 8)


def test_ordered_magnitude_needs_nonvanishing():
    with pytest.raises(NotApplicable):
        ordered_magnitude_solve(_eq("x+y+z=x*y*z"))


def test_univariate_roots():
    verdict = univariate_polynomial_solve(_eq("x^3 - 6*x^2 + 11*x - 6 = 0"))
    assert verdict.solutions == ((1,), (2,), (3,))
    empty = univariate_polynomial_solve(_eq("x^2 + 1 = 0"))
    assert empty.status is Status.NO_SOLUTION
    assert empty.certificate.kind == "divisor-candidates"


def test_common_factor_divides_out():
    eq = _eq("x^2*y + x*y^2 = 0")
    assert common_factor(eq) == ("x", 1)
    reduced = divide_out(eq, "x", 1)
    assert reduced.evaluate({"x": 2, "y": 3}) == 15
    assert common_factor(_eq("x*y + 1 = 0")) is None
