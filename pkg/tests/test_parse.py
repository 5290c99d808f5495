import pytest

from src.components.errors import ProblemSyntaxError, UnknownDomainName, UnsupportedTerm
from src.components.expr import Domain
from src.components.parse import parse_problem, tokenize


def test_default_domain_is_integers():
    problem = parse_problem("15*x^2 + 6*y^2 = 12")
    assert problem.domains == {"x": Domain.integers(), "y": Domain.integers()}
    assert not problem.is_system


def test_domain_clauses():
    problem = parse_problem("2^x + 3^y = z^2 ; x,y in N0, z in Z")
    assert problem.domain("x") == Domain.natural()
    assert problem.domain("y") == Domain.natural()
    assert problem.domain("z") == Domain.integers()


def test_interval_and_positive_domains():
    problem = parse_problem("x + y = 3 ; x in [-3,5], y in N")
    assert problem.domain("x") == Domain.interval(-3, 5)
    assert problem.domain("y") == Domain.positive()


def test_nonvanishing_product_clause():
    problem = parse_problem("x+y+z=x*y*z ; x,y,z in Z, x*y*z != 0")
    assert problem.nonvanishing == frozenset({"x", "y", "z"})
    assert not problem.admits({"x": 0, "y": 1, "z": 1})
    assert problem.admits({"x": 1, "y": 2, "z": 3})


def test_systems_with_and_or_newlines():
    joined = parse_problem("3*x^2+4*y=19 and 5*x-2*y=3")
    lined = parse_problem("3*x^2+4*y=19\n5*x-2*y=3\n; x,y in Z")
    assert joined.is_system and len(joined.equations) == 2
    assert lined.equations == joined.equations


def test_parenthesized_power_and_exponential():
    problem = parse_problem("(x+1)^2 + (2)^y = 5 ; y in N0")
    eq = problem.equation
    assert eq.evaluate({"x": 0, "y": 2}) == 0
    assert eq.exponential_variables() == frozenset({"y"})


def test_non_constant_base_is_rejected():
    with pytest.raises(UnsupportedTerm):
        parse_problem("(x+1)^y = 4")


def test_syntax_error_reports_position():
    with pytest.raises(ProblemSyntaxError) as info:
        parse_problem("x^2 + = 3")
    assert (info.value.line, info.value.column) == (1, 7)
    assert "identifier" in info.value.expected


def test_syntax_error_on_second_line():
    with pytest.raises(ProblemSyntaxError) as info:
        parse_problem("x + y = 1\nx - = 2")
    assert info.value.line == 2


@pytest.mark.parametrize("text", ["x = 1 ; x in Q", "x = 1 ; x in reals"])
def test_unknown_domain(text):
    with pytest.raises(UnknownDomainName):
        parse_problem(text)


def test_empty_interval_is_a_syntax_error():
    with pytest.raises(ProblemSyntaxError):
        parse_problem("x = 1 ; x in [5,2]")


def test_conflicting_domains():
    with pytest.raises(ProblemSyntaxError):
        parse_problem("x = 1 ; x in N, x in Z")


def test_product_constraint_must_compare_with_zero():
    with pytest.raises(ProblemSyntaxError):
        parse_problem("x*y = 1 ; x*y != 2")


def test_tokenizer_tracks_columns():
    tokens = tokenize("x! = 6")
    assert [t.kind for t in tokens] == ["ident", "!", "=", "int", "eof"]
    assert [t.column for t in tokens[:4]] == [1, 2, 4, 6]


def test_identity_parses_without_variables():
    problem = parse_problem("0=0")
    assert problem.variables == ()
    assert problem.equation.terms == ()


def test_cancelled_variables_stay_declared():
    problem = parse_problem("x^0 = 1")
    assert problem.variables == ("x",)
    assert problem.equation.terms == ()
    assert problem.render() == "0 = 0 ; x in Z"
    assert parse_problem("x - x + y = 1 ; x in N0").variables == ("x", "y")


def test_deep_nesting_is_a_syntax_error():
    with pytest.raises(ProblemSyntaxError, match="nested too deeply"):
        parse_problem("(" * 3000 + "x" + ")" * 3000 + "=1")
