import json
from pathlib import Path

import pytest

from src.cli import EXIT_ERROR, EXIT_INCONCLUSIVE, EXIT_OK, join_box_values, main


def _run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_solve_text_output(capsys):
    code, out = _run(capsys, "solve", "15*x^2+6*y^2=12")
    assert code == EXIT_OK
    assert out.out.startswith("status: no_solution")
    assert "certificate: modular m=5" in out.out


def test_solve_json_report(capsys):
    code, out = _run(capsys, "solve", "4^x-3^y=1 ; x,y in N0", "--json", "--trace")
    assert code == EXIT_OK
    report = json.loads(out.out)
    assert report["status"] == "finite"
    assert report["solutions"] == [{"x": 1, "y": 1}]
    assert report["completeness"]
    assert report["trace"]
    assert set(report["stats"]) == {"evaluations", "moduli_scanned"}
    assert "certificate" not in report


def test_solve_family_json(capsys):
    code, out = _run(capsys, "solve", "x + y = 5", "--json")
    report = json.loads(out.out)
    assert code == EXIT_OK
    assert report["status"] == "family"
    assert report["families"][0]["kind"] == "affine-lattice"


def test_solve_is_deterministic(capsys):
    _, first = _run(capsys, "solve", "x^2 - 6*y^2 = 3", "--json", "--box", "-20..20", "--probe-budget", "5000")
    _, second = _run(capsys, "solve", "x^2 - 6*y^2 = 3", "--json", "--box", "-20..20", "--probe-budget", "5000")
    assert first.out == second.out


def test_box_with_negative_lower_end(capsys):
    code, out = _run(capsys, "solve", "x^2 = 4", "--box", "-20..20", "--json")
    assert code == EXIT_OK
    assert json.loads(out.out)["solutions"] == [{"x": -2}, {"x": 2}]
    code, _ = _run(capsys, "solve", "x^2 = 4", "--box=-5..-1")
    assert code == EXIT_OK


def test_box_values_are_fused_with_the_flag():
    assert join_box_values(["solve", "x=1", "--box", "-20..20"]) == ["solve", "x=1", "--box=-20..20"]
    assert join_box_values(["solve", "x=1", "--box", "5"]) == ["solve", "x=1", "--box", "5"]
    assert join_box_values(["--box"]) == ["--box"]


def test_unexpected_failure_has_no_traceback(capsys, monkeypatch):
    def explode(*args, **kwargs):
        raise OverflowError("int too large to convert to float")

    monkeypatch.setattr("src.cli.solve", explode)
    code, out = _run(capsys, "solve", "x^2 = 4")
    assert code == EXIT_ERROR
    assert "internal error: OverflowError" in out.err
    assert "Traceback" not in out.err


def test_inconclusive_exit_code(capsys):
    code, out = _run(capsys, "solve", "x^3+y^3+z^3=33", "--timeout-ms", "1", "--probe-budget", "0")
    assert code == EXIT_INCONCLUSIVE
    assert out.out.startswith("status: inconclusive")


def test_syntax_error_exits_with_error(capsys):
    code, out = _run(capsys, "solve", "x^^2 = 1")
    assert code == EXIT_ERROR
    assert "ProblemSyntaxError" in out.err


@pytest.mark.parametrize("argv", [["solve"], ["solve", "x=1", "--box", "5"], ["frobnicate"], []])
def test_usage_errors(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == EXIT_ERROR


def test_check_bare_certificate(capsys, tmp_path):
    cert = tmp_path / "cert.json"
    cert.write_text(json.dumps({"kind": "modular", "modulus": 5}))
    code, out = _run(capsys, "check", "15*x^2+6*y^2=12", "--cert", str(cert))
    assert code == EXIT_OK
    assert out.out.startswith("valid modular certificate")

    code, out = _run(capsys, "check", "x^2+y^2=5", "--cert", str(cert))
    assert code == EXIT_ERROR
    assert out.out.startswith("INVALID")


def test_check_accepts_a_full_report(capsys, tmp_path):
    _, out = _run(capsys, "solve", "x^3+y^3+z^3=58", "--json")
    report = tmp_path / "report.json"
    report.write_text(out.out)
    code, out = _run(capsys, "check", "x^3+y^3+z^3=58", "--cert", str(report), "--json")
    assert code == EXIT_OK
    assert json.loads(out.out)["valid"] is True


def test_check_malformed_certificate(capsys, tmp_path):
    cert = tmp_path / "cert.json"
    cert.write_text("{not json")
    code, out = _run(capsys, "check", "x=1", "--cert", str(cert))
    assert code == EXIT_ERROR
    assert "MalformedCertificate" in out.err

    cert.write_text(json.dumps({"kind": "astrology"}))
    code, out = _run(capsys, "check", "x=1", "--cert", str(cert))
    assert code == EXIT_ERROR


def test_verify_claims(capsys, tmp_path):
    claims = tmp_path / "claims.json"
    claims.write_text(
        json.dumps(
            {
                "solutions": [{"x": 1, "y": 4}, {"x": 2, "y": 2}],
                "families": [
                    {"kind": "affine-lattice", "parameters": [["t1", "Z"]], "expressions": {"x": "t1", "y": "5 - t1"}}
                ],
            }
        )
    )
    code, out = _run(capsys, "verify", "x+y=5", "--solutions", str(claims))
    assert code == EXIT_ERROR
    assert "FAIL solution (x=2, y=2): equation 1 evaluates to -1" in out.out
    assert "2 of 3 claims verified" in out.out


def test_verify_round_trips_a_report(capsys, tmp_path):
    _, out = _run(capsys, "solve", "x*y + 2*x + 3*y = 10", "--json")
    report = tmp_path / "report.json"
    report.write_text(out.out)
    code, out = _run(capsys, "verify", "x*y + 2*x + 3*y = 10", "--solutions", str(report), "--json")
    assert code == EXIT_OK
    payload = json.loads(out.out)
    assert payload["valid"] is True
    assert len(payload["items"]) == 10


def test_empty_corpus(capsys, tmp_path):
    corpus = tmp_path / "empty.toml"
    corpus.write_text("# nothing yet\n")
    code, out = _run(capsys, "corpus", str(corpus))
    assert code == EXIT_OK
    assert out.out.strip() == "0 cases"


def test_corpus_with_wrong_expectation_fails(capsys, tmp_path):
    corpus = tmp_path / "cases.toml"
    corpus.write_text(
        "\n".join(
            [
                "[[case]]",
                'name = "parity"',
                'problem = "15*x^2+6*y^2=12"',
                'expect = "no_solution"',
                "",
                "[[case]]",
                'name = "wrong"',
                'problem = "x + y = 5"',
                'expect = "finite"',
            ]
        )
    )
    code, out = _run(capsys, "corpus", str(corpus))
    assert code == EXIT_ERROR
    assert "1 passed, 1 failed, 2 total" in out.out


def test_missing_corpus_file(capsys, tmp_path):
    code, out = _run(capsys, "corpus", str(tmp_path / "absent.toml"))
    assert code == EXIT_ERROR
    assert out.err.startswith("dioph:")


GOLDEN = sorted((Path(__file__).parent / "golden").glob("*.json"))


@pytest.mark.parametrize("path", GOLDEN, ids=[p.stem for p in GOLDEN])
def test_golden_reports(capsys, path):
    expected = json.loads(path.read_text())
    code, out = _run(capsys, "solve", expected.pop("problem"), "--json")
    assert code == EXIT_OK
    report = json.loads(out.out)
    projected = {"status": report["status"]}
    if "certificate" in expected:
        projected["certificate"] = {k: report["certificate"].get(k) for k in ("kind", "modulus")}
    if "solutions" in expected:
        projected["solutions"] = report["solutions"]
    assert projected == expected
