"""Provides loading, running and summarizing of corpus files."""
from __future__ import annotations

import logging
import time
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path
from typing import Sequence

import pandas as pd
from pydantic import ValidationError

from src.components.engine import solve
from src.components.errors import DiophError, MalformedCorpus
from src.components.expr import Problem
from src.components.parse import parse_problem
from src.components.verdict import Status, Verdict
from src.components.verify import CheckReport, verdict_closure
from src.config import SolverConfig, parse_box
from src.schemas.corpus import CaseResult, CorpusCase
from src.schemas.verdict import VerdictReport

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = ["name", "expected", "status", "passed", "solutions", "millis", "message"]


def load_corpus(path: str | Path) -> list[CorpusCase]:
    """Reads the ``[[case]]`` tables of a TOML corpus file.

    Args:
        path: Location of the corpus file.

    Returns:
        Validated cases in file order.

    Raises:
        MalformedCorpus: The file is not TOML, a case fails validation or two cases share a name.
    """
    try:
        with open(path, "rb") as fh:
            document = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise MalformedCorpus(f"{path}: {exc}") from exc
    tables = document.get("case", [])
    if not isinstance(tables, list):
        raise MalformedCorpus(f"{path}: 'case' must be an array of tables")
    cases = []
    for index, table in enumerate(tables, start=1):
        try:
            cases.append(CorpusCase.model_validate(table))
        except ValidationError as exc:
            raise MalformedCorpus(f"{path}: case {index}: {exc}") from exc
    names = [case.name for case in cases]
    duplicates = sorted({name for name in names if names.count(name) > 1})
    if duplicates:
        raise MalformedCorpus(f"{path}: duplicate case names {', '.join(duplicates)}")
    logger.info("loaded %d cases from %s", len(cases), path)
    return cases


def case_config(case: CorpusCase, base: SolverConfig) -> SolverConfig:
    """Applies a case's box and budget overrides to the run configuration.

    Args:
        case: Case carrying optional overrides.
        base: Configuration of the whole run.

    Returns:
        Configuration for this case.
    """
    update = dict(case.budgets)
    if case.box is not None:
        update["probe_box"] = parse_box(case.box)
    return SolverConfig.model_validate({**base.model_dump(), **update}) if update else base


def _point_set(points: Sequence[dict[str, int]]) -> set[tuple[tuple[str, int], ...]]:
    return {tuple(sorted(p.items())) for p in points}


def _compare(case: CorpusCase, problem: Problem, verdict: Verdict, config: SolverConfig) -> tuple[bool, str]:
    status = verdict.status
    found = verdict.solution_maps()
    if case.expect == "finite_or_inconclusive":
        if status not in (Status.FINITE, Status.INCONCLUSIVE):
            return False, f"expected finite or inconclusive, got {status.value}"
        if case.solutions is not None:
            expected = _point_set(case.solutions)
            if status is Status.FINITE and _point_set(found) != expected:
                return False, f"finite set of {len(found)} differs from the expected {len(expected)}"
            if status is Status.INCONCLUSIVE and not _point_set(found) <= expected:
                return False, "probe found a point outside the expected list"
    elif case.expect == "finite" and status is Status.NO_SOLUTION and case.solutions == []:
        pass  # an empty set is also proved by a certificate
    elif status.value != case.expect:
        return False, f"expected {case.expect}, got {status.value}"
    elif case.expect == "no_solution":
        if case.certificate is not None and verdict.certificate.kind != case.certificate:
            return False, f"expected a {case.certificate} certificate, got {verdict.certificate.kind}"
    elif case.expect == "finite":
        if case.count is not None and len(found) != case.count:
            return False, f"expected {case.count} solutions, got {len(found)}"
        if case.solutions is not None and _point_set(found) != _point_set(case.solutions):
            return False, "solution set differs from the expected list"
    elif case.families is not None and len(verdict.families) < case.families:
        return False, f"expected at least {case.families} families, got {len(verdict.families)}"
    closure = verdict_closure(problem, verdict, config)
    if not closure.valid:
        detail = closure.message if isinstance(closure, CheckReport) else closure.failures[0].message
        return False, f"verdict does not verify: {detail}"
    return True, _summary(verdict)


def _summary(verdict: Verdict) -> str:
    if verdict.status is Status.NO_SOLUTION:
        return verdict.certificate.kind
    if verdict.status is Status.FINITE:
        return verdict.completeness or ""
    if verdict.status is Status.FAMILY:
        return ", ".join(f.kind for f in verdict.families)
    return f"{len(verdict.solutions)} candidates"


def run_case(case: CorpusCase, config: SolverConfig) -> CaseResult:
    """Solves one case and compares the verdict with its expectation.

    Errors are recorded in the result rather than raised.

    Args:
        case: Case to run.
        config: Run configuration before the case's overrides.

    Returns:
        Outcome of the case.
    """
    started = time.perf_counter()
    try:
        local = case_config(case, config)
        problem = parse_problem(case.problem)
        verdict = solve(problem, local)
        passed, message = _compare(case, problem, verdict, local)
    except Exception as exc:
        unexpected = not isinstance(exc, (DiophError, ValueError))
        logger.warning("case %s failed with %s: %s", case.name, type(exc).__name__, exc, exc_info=unexpected)
        millis = (time.perf_counter() - started) * 1000
        return CaseResult(
            name=case.name,
            expected=case.expect,
            status="error",
            passed=False,
            message=f"{type(exc).__name__}: {exc}",
            millis=millis,
        )
    millis = (time.perf_counter() - started) * 1000
    logger.info("case %s: %s (%s) in %.0f ms", case.name, verdict.status.value, "pass" if passed else "FAIL", millis)
    return CaseResult(
        name=case.name,
        expected=case.expect,
        status=verdict.status.value,
        passed=passed,
        message=message,
        solutions=len(verdict.solutions),
        millis=millis,
        report=VerdictReport.from_verdict(verdict),
    )


def run_corpus(cases: Sequence[CorpusCase], config: SolverConfig, jobs: int = 1) -> list[CaseResult]:
    """Runs every case, in a process pool when ``jobs`` exceeds one.

    Args:
        cases: Cases to run.
        config: Run configuration.
        jobs: Worker processes.

    Returns:
        Results in case order.
    """
    runner = partial(run_case, config=config)
    if jobs <= 1 or len(cases) <= 1:
        return [runner(case) for case in cases]
    with ProcessPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(runner, cases))


def summarize(results: Sequence[CaseResult]) -> pd.DataFrame:
    """Tabulates case results.

    Args:
        results: Results of a corpus run.

    Returns:
        One row per case with the summary columns.
    """
    rows = [result.model_dump(include=set(SUMMARY_COLUMNS)) for result in results]
    df = pd.DataFrame(rows, columns=SUMMARY_COLUMNS)
    df["millis"] = df["millis"].round(1)
    return df
