from pathlib import Path

import pytest

from src.components.engine import solve
from src.components.errors import MalformedCorpus
from src.config import SolverConfig
from src.schemas.corpus import CorpusCase
from src.utils.corpus_loader import SUMMARY_COLUMNS, case_config, load_corpus, run_case, run_corpus, summarize

EXAMPLES = Path(__file__).resolve().parents[1] / "corpus" / "examples.toml"

SMALL = """
[[case]]
name = "parity"
problem = "15*x^2+6*y^2=12 ; x,y in Z"
expect = "no_solution"
certificate = "modular"

[[case]]
name = "exp-4-3"
problem = "4^x-3^y=1 ; x,y in N0"
expect = "finite"
solutions = [{ x = 1, y = 1 }]

[[case]]
name = "line"
problem = "x + y = 5"
expect = "family"
families = 1
box = "-10..10"
budgets = { probe_budget = 1000 }
"""


@pytest.fixture
def small_corpus(tmp_path):
    path = tmp_path / "small.toml"
    path.write_text(SMALL)
    return path


def test_load_corpus(small_corpus):
    cases = load_corpus(small_corpus)
    assert [c.name for c in cases] == ["parity", "exp-4-3", "line"]
    assert cases[1].solutions == [{"x": 1, "y": 1}]


def test_duplicate_names_are_rejected(tmp_path):
    path = tmp_path / "dup.toml"
    path.write_text(SMALL + SMALL)
    with pytest.raises(MalformedCorpus, match="duplicate case names"):
        load_corpus(path)


@pytest.mark.parametrize(
    "text",
    [
        "[[case]\nname = 'x'",
        "[[case]]\nname = 'a'\nproblem = 'x=1'\nexpect = 'sometimes'",
        "[[case]]\nname = 'a'\nproblem = 'x=1'\nexpect = 'family'\ncount = 3",
        "[[case]]\nname = 'a'\nproblem = 'x=1'\nexpect = 'finite'\ncertificate = 'modular'",
        "case = 3",
    ],
)
def test_malformed_corpus(tmp_path, text):
    path = tmp_path / "bad.toml"
    path.write_text(text)
    with pytest.raises(MalformedCorpus):
        load_corpus(path)


def test_case_config_applies_overrides():
    base = SolverConfig()
    case = CorpusCase(name="a", problem="x=1", expect="finite", box="-5..5", budgets={"timeout_ms": 500})
    config = case_config(case, base)
    assert config.probe_box == (-5, 5)
    assert config.timeout_ms == 500
    assert case_config(CorpusCase(name="b", problem="x=1", expect="finite"), base) is base


def test_run_corpus_and_summarize(small_corpus):
    results = run_corpus(load_corpus(small_corpus), SolverConfig())
    assert [r.passed for r in results] == [True, True, True]
    df = summarize(results)
    assert list(df.columns) == SUMMARY_COLUMNS
    assert df["status"].tolist() == ["no_solution", "finite", "family"]
    assert df.loc[0, "message"] == "modular"


def test_failing_and_erroring_cases_are_recorded():
    wrong = run_case(CorpusCase(name="w", problem="x^2 = 4", expect="no_solution"), SolverConfig())
    assert not wrong.passed
    assert wrong.message == "expected no_solution, got finite"
    broken = run_case(CorpusCase(name="b", problem="x^^2 = 4", expect="finite"), SolverConfig())
    assert broken.status == "error"
    assert broken.message.startswith("ProblemSyntaxError")
    assert broken.report is None


def test_empty_finite_expectation_accepts_certificate():
    case = CorpusCase(name="e", problem="x^2 = -4", expect="finite", solutions=[])
    assert run_case(case, SolverConfig()).passed


@pytest.mark.slow
def test_examples_corpus_passes():
    results = run_corpus(load_corpus(EXAMPLES), SolverConfig.from_env(), jobs=2)
    failures = [(r.name, r.message) for r in results if not r.passed]
    assert failures == []


def test_unexpected_exception_does_not_abort_the_run(monkeypatch):
    def flaky(problem, config=None):
        if problem.variables == ("y",):
            raise OverflowError("int too large to convert to float")
        return solve(problem, config)

    monkeypatch.setattr("src.utils.corpus_loader.solve", flaky)
    cases = [
        CorpusCase(name="overflowing", problem="-3*y - 2*y^4 = 18", expect="no_solution"),
        CorpusCase(name="after", problem="x^2 = 4", expect="finite", count=2),
    ]
    results = run_corpus(cases, SolverConfig())
    assert [r.status for r in results] == ["error", "finite"]
    assert results[0].message.startswith("OverflowError")
    assert results[1].passed


def test_deeply_nested_case_is_a_syntax_error():
    case = CorpusCase(name="deep", problem="(" * 3000 + "x" + ")" * 3000 + "=1", expect="finite")
    result = run_case(case, SolverConfig())
    assert result.status == "error"
    assert result.message.startswith("ProblemSyntaxError")


def test_growing_bounds_case_runs_to_a_verdict():
    case = CorpusCase(name="quartic", problem="-3*y - 2*y^4 = 18", expect="no_solution")
    result = run_case(case, SolverConfig(timeout_ms=10_000))
    assert result.status != "error"
