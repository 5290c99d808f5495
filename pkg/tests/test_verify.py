import pytest

from src.components.engine import solve
from src.components.errors import MalformedCertificate
from src.components.parse import parse_problem
from src.components.verdict import Certificate
from src.components.verify import check_point, family_members, verify_certificate, verify_solutions


def test_modular_certificate_holds():
    problem = parse_problem("15*x^2+6*y^2=12")
    report = verify_certificate(problem, Certificate("modular", {"modulus": 5}))
    assert report.valid
    assert report.kind == "modular"


def test_modular_certificate_with_satisfiable_residues_fails():
    report = verify_certificate(parse_problem("x^2-5=0"), Certificate("modular", {"modulus": 5}))
    assert not report.valid


def test_content_certificate():
    problem = parse_problem("5*x^2+125*y^3=4973")
    assert verify_certificate(problem, Certificate("content", {"divisor": 5, "constant": -4973})).valid


def test_unknown_kind_is_malformed():
    with pytest.raises(MalformedCertificate):
        verify_certificate(parse_problem("x=1"), Certificate("astrology", {}))


def test_missing_field_is_malformed():
    with pytest.raises(MalformedCertificate):
        verify_certificate(parse_problem("15*x^2+6*y^2=12"), Certificate("modular", {}))


@pytest.mark.parametrize(
    "text",
    [
        "15*x^2+6*y^2=12",
        "x^3+y^3+z^3=58",
        "5*x^2+125*y^3=4973",
        "x^2+y^2=-1",
        "6*x+9*y=5",
        "x^2-3*y^2=-1",
    ],
)
def test_emitted_certificates_recheck(text):
    problem = parse_problem(text)
    verdict = solve(problem)
    assert verdict.certificate is not None
    assert verify_certificate(problem, verdict.certificate).valid


@pytest.mark.parametrize(
    "text, point",
    [
        ("18^x+16^y=19^z ; x,y,z in N0", {"x": 1, "y": 0, "z": 1}),
        ("4^x-3^y=1 ; x,y in N0", {"x": 1, "y": 1}),
        ("x+y+z=x*y*z ; x,y,z in Z, x*y*z != 0", {"x": 1, "y": 2, "z": 3}),
    ],
)
def test_true_solutions_verify(text, point):
    problem = parse_problem(text)
    assert check_point(problem, point) is None
    assert verify_solutions(problem, [point]).valid


@pytest.mark.parametrize(
    "text, point, message",
    [
        ("x+y=5", {"x": 2, "y": 2}, "equation 1 evaluates to -1"),
        ("x+y=5", {"x": 2}, "missing value for y"),
        ("x+y=5 ; x in N", {"x": 0, "y": 5}, "x = 0 is outside N"),
        ("x+y+z=x*y*z ; x,y,z in Z, x*y*z != 0", {"x": 0, "y": 1, "z": -1}, "x = 0 violates x != 0"),
    ],
)
def test_false_claims_are_reported(text, point, message):
    problem = parse_problem(text)
    report = verify_solutions(problem, [point])
    assert not report.valid
    assert report.failures[0].message == message


def test_family_claims_are_sampled():
    problem = parse_problem("x+y=5")
    good = {"kind": "affine-lattice", "parameters": [["t1", "Z"]], "expressions": {"x": "t1", "y": "5 - t1"}}
    bad = {"kind": "affine-lattice", "parameters": [["t1", "Z"]], "expressions": {"x": "t1", "y": "4 - t1"}}
    report = verify_solutions(problem, [], [good, bad])
    assert [item.valid for item in report.items] == [True, False]
    assert report.items[1].message.startswith("member (x=0, y=4)")


def test_family_members_fall_back_to_sample():
    family = {
        "kind": "pell-orbit",
        "parameters": [["n", "N0"]],
        "expressions": {"x": "(X - 3)/2"},
        "sample": [{"x": 1}],
    }
    assert list(family_members(family, 5)) == [{"x": 1}]


def test_malformed_family_raises():
    with pytest.raises(MalformedCertificate):
        verify_solutions(parse_problem("x=1"), [], [{"kind": "indexed", "expressions": {"x": "1"}}])
