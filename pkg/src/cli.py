"""Command line for solving, checking and running corpora: ``dioph solve|corpus|check|verify``."""
from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from pathlib import Path
from typing import Any, Sequence

from pydantic import ValidationError

from src.components.engine import solve
from src.components.errors import DiophError, MalformedCertificate
from src.components.parse import parse_problem
from src.components.verdict import Status
from src.components.verify import verify_certificate, verify_solutions
from src.config import SolverConfig, parse_box
from src.schemas.verdict import CertificateFile, CertificateModel, ClaimFile, VerdictReport
from src.utils.corpus_loader import load_corpus, run_corpus, summarize

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCONCLUSIVE = 2

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"

_BOX_VALUE = re.compile(r"-?\d+\.\.-?\d+")

# CLI flag -> SolverConfig field
CONFIG_FLAGS = {
    "max_modulus": "max_modulus",
    "box": "probe_box",
    "probe_budget": "probe_budget",
    "enum_budget": "enum_budget",
    "timeout_ms": "timeout_ms",
}


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _box(text: str) -> tuple[int, int]:
    try:
        return parse_box(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"{text} is not a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--max-modulus", type=_positive, help="largest modulus for the sensibility scan (default 64)")
    common.add_argument("--box", type=_box, metavar="LO..HI", help="probe box per variable (default -100..100)")
    common.add_argument("--probe-budget", type=int, metavar="N", help="probe evaluations (default 10^6)")
    common.add_argument("--enum-budget", type=_positive, metavar="N", help="enumeration evaluations (default 10^8)")
    common.add_argument("--timeout-ms", type=_positive, metavar="T", help="soft wall-clock budget per problem")
    common.add_argument("--json", action="store_true", help="print JSON instead of text")
    common.add_argument("-v", "--verbose", action="count", default=0, help="log INFO, or DEBUG when repeated")

    parser = _ArgumentParser(prog="dioph", description="Decide Diophantine equations with checkable certificates.")
    commands = parser.add_subparsers(dest="command", required=True)

    solve_cmd = commands.add_parser("solve", parents=[common], help="solve one problem")
    solve_cmd.add_argument("problem", help='problem text, e.g. "15*x^2+6*y^2=12 ; x,y in Z"')
    solve_cmd.add_argument("--trace", action="store_true", help="include the stage trace with timings")
    solve_cmd.set_defaults(handler=cmd_solve)

    corpus_cmd = commands.add_parser("corpus", parents=[common], help="run a corpus file and compare expectations")
    corpus_cmd.add_argument("path", type=Path, help="TOML file of [[case]] tables")
    corpus_cmd.add_argument("--jobs", type=_positive, default=1, metavar="N", help="worker processes")
    corpus_cmd.set_defaults(handler=cmd_corpus)

    check_cmd = commands.add_parser("check", parents=[common], help="re-check a non-solvability certificate")
    check_cmd.add_argument("problem")
    check_cmd.add_argument("--cert", type=Path, required=True, help="certificate or verdict report JSON")
    check_cmd.set_defaults(handler=cmd_check)

    verify_cmd = commands.add_parser("verify", parents=[common], help="substitute claimed solutions and families")
    verify_cmd.add_argument("problem")
    verify_cmd.add_argument("--solutions", type=Path, required=True, help="claim or verdict report JSON")
    verify_cmd.set_defaults(handler=cmd_verify)
    return parser


def config_from_args(args: argparse.Namespace) -> SolverConfig:
    """Budgets from the environment with the command-line flags applied last."""
    overrides = {field: getattr(args, flag) for flag, field in CONFIG_FLAGS.items() if getattr(args, flag) is not None}
    return SolverConfig.from_env(**overrides)


def _point(point: dict[str, int]) -> str:
    return ", ".join(f"{var}={value}" for var, value in point.items())


def render_text(report: VerdictReport) -> str:
    lines = [f"status: {report.status}" + (f" ({report.completeness})" if report.completeness else "")]
    if report.certificate is not None:
        cert = report.certificate
        head = f"certificate: {cert.kind}" + (f" m={cert.modulus}" if cert.modulus is not None else "")
        lines.append(head)
        if cert.data:
            lines.append("  " + json.dumps(cert.data, sort_keys=True))
    for family in report.families or []:
        params = ", ".join(f"{name} in {domain}" for name, domain in family.parameters)
        lines.append(f"family {family.kind}" + (f" over {params}" if params else ""))
        lines.extend(f"  {var} = {expr}" for var, expr in family.expressions.items())
        lines.extend(f"  where {c}" for c in family.constraints)
        lines.extend(f"  e.g. {_point(member)}" for member in family.sample or [])
    if report.solutions is not None:
        label = "isolated solutions" if report.status == "family" else "solutions"
        if report.solutions or report.status == "finite":
            lines.append(f"{label} ({len(report.solutions)}):")
            lines.extend(f"  {_point(p)}" for p in report.solutions)
    if report.candidates:
        lines.append(f"found by probing, not proved complete ({len(report.candidates)}):")
        lines.extend(f"  {_point(p)}" for p in report.candidates)
    for entry in report.trace or []:
        lines.append(f"trace {entry.stage}: {entry.outcome} [{entry.millis:.1f} ms]")
    lines.append(f"stats: evaluations={report.stats.evaluations} moduli_scanned={report.stats.moduli_scanned}")
    return "\n".join(lines)


def cmd_solve(args: argparse.Namespace) -> int:
    problem = parse_problem(args.problem)
    verdict = solve(problem, config_from_args(args))
    report = VerdictReport.from_verdict(verdict, trace=args.trace)
    print(report.to_json() if args.json else render_text(report))
    return EXIT_INCONCLUSIVE if verdict.status is Status.INCONCLUSIVE else EXIT_OK


def cmd_corpus(args: argparse.Namespace) -> int:
    cases = load_corpus(args.path)
    if not cases:
        logger.warning("corpus %s has zero cases", args.path)
        print("0 cases")
        return EXIT_OK
    results = run_corpus(cases, config_from_args(args), jobs=args.jobs)
    failed = sum(not r.passed for r in results)
    if args.json:
        payload = [r.model_dump(mode="json", exclude={"millis"}, exclude_none=True) for r in results]
        print(json.dumps(payload, indent=2))
    else:
        print(summarize(results).to_string(index=False))
        print(f"{len(results) - failed} passed, {failed} failed, {len(results)} total")
    return EXIT_OK if failed == 0 else EXIT_ERROR


def _read_json(path: Path) -> Any:
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise MalformedCertificate(f"{path}: not JSON: {exc}") from exc


def cmd_check(args: argparse.Namespace) -> int:
    problem = parse_problem(args.problem)
    payload = _read_json(args.cert)
    try:
        if isinstance(payload, dict) and "certificate" in payload:
            model = CertificateFile.model_validate(payload).certificate
        else:
            model = CertificateModel.model_validate(payload)
    except ValidationError as exc:
        raise MalformedCertificate(f"{args.cert}: {exc}") from exc
    report = verify_certificate(problem, model.to_certificate(), config_from_args(args))
    if args.json:
        print(json.dumps({"valid": report.valid, "kind": report.kind, "message": report.message}, indent=2))
    else:
        print(f"{'valid' if report.valid else 'INVALID'} {report.kind} certificate: {report.message}")
    return EXIT_OK if report.valid else EXIT_ERROR


def cmd_verify(args: argparse.Namespace) -> int:
    problem = parse_problem(args.problem)
    try:
        claim = ClaimFile.model_validate(_read_json(args.solutions))
    except ValidationError as exc:
        raise MalformedCertificate(f"{args.solutions}: {exc}") from exc
    families = [family.model_dump(exclude_none=True) for family in claim.families]
    report = verify_solutions(problem, claim.solutions, families, config_from_args(args))
    if args.json:
        items = [{"label": i.label, "valid": i.valid, "message": i.message} for i in report.items]
        print(json.dumps({"valid": report.valid, "items": items}, indent=2))
    else:
        for item in report.items:
            print(f"{'ok  ' if item.valid else 'FAIL'} {item.label}: {item.message}")
        print(f"{len(report.items) - len(report.failures)} of {len(report.items)} claims verified")
    return EXIT_OK if report.valid else EXIT_ERROR


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def join_box_values(argv: Sequence[str]) -> list[str]:
    """Fuse ``--box LO..HI`` into ``--box=LO..HI`` so a negative LO is not read as a flag."""
    joined: list[str] = []
    index = 0
    while index < len(argv):
        token = argv[index]
        if token == "--box" and index + 1 < len(argv) and _BOX_VALUE.fullmatch(argv[index + 1]):
            joined.append(f"--box={argv[index + 1]}")
            index += 2
            continue
        joined.append(token)
        index += 1
    return joined


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point of the ``dioph`` command; returns the process exit code."""
    args = build_parser().parse_args(join_box_values(sys.argv[1:] if argv is None else argv))
    configure_logging(args.verbose)
    try:
        return args.handler(args)
    except DiophError as exc:
        print(f"dioph: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ValidationError as exc:
        print(f"dioph: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"dioph: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:
        logger.debug("unexpected failure", exc_info=True)
        print(f"dioph: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
