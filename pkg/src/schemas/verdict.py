"""Provides the JSON schemas for verdict reports and claim files."""
from __future__ import annotations

from itertools import islice
from typing import Any, Literal

from pydantic import BaseModel, Field

from src.components.verdict import Certificate, Family, Verdict

SAMPLE_SIZE = 5

StatusName = Literal["no_solution", "finite", "family", "inconclusive"]


class CertificateModel(BaseModel):
    """Defines a non-solvability certificate as written to JSON."""

    kind: str = Field(
        title="Kind",
        examples=["modular"],
        description="Certificate kind; selects the checker.",
    )
    modulus: int | None = Field(
        default=None,
        title="Modulus",
        examples=[5],
        description="Modulus of a modular certificate.",
    )
    data: dict[str, Any] = Field(
        default_factory=dict,
        title="Data",
        description="Payload the checker re-derives the contradiction from.",
    )

    @classmethod
    def from_certificate(cls, certificate: Certificate) -> "CertificateModel":
        data = dict(certificate.data)
        return cls(kind=certificate.kind, modulus=data.pop("modulus", None), data=data)

    def to_certificate(self) -> Certificate:
        data = dict(self.data)
        if self.modulus is not None:
            data["modulus"] = self.modulus
        return Certificate(self.kind, data)


class FamilyModel(BaseModel):
    """Defines a parametric solution family."""

    kind: str = Field(title="Kind", examples=["affine-lattice"], description="Family representation.")
    parameters: list[tuple[str, str]] = Field(
        title="Parameters",
        examples=[[["t1", "Z"]]],
        description="Parameter names with their domains.",
    )
    expressions: dict[str, str] = Field(
        title="Expressions",
        examples=[{"x": "3*t1 - 1", "y": "1 - 2*t1"}],
        description="Closed form of every variable.",
    )
    constraints: list[str] = Field(
        default_factory=list,
        title="Constraints",
        description="Side conditions every member satisfies.",
    )
    sample: list[dict[str, int]] | None = Field(
        default=None,
        title="Sample",
        description="First members, for families not given in closed form over their parameters.",
    )


class TraceModel(BaseModel):
    stage: str
    outcome: str
    millis: float = 0.0


class StatsModel(BaseModel):
    evaluations: int = 0
    moduli_scanned: int = 0


class VerdictReport(BaseModel):
    """Defines the verdict report printed by ``dioph solve --json``."""

    status: StatusName = Field(title="Status", examples=["finite"], description="Verdict status.")
    completeness: str | None = Field(
        default=None,
        title="Completeness",
        examples=["bounded-exhaustive"],
        description="Argument proving a finite solution list complete.",
    )
    certificate: CertificateModel | None = None
    solutions: list[dict[str, int]] | None = Field(
        default=None,
        title="Solutions",
        description="Every solution of a finite verdict, or isolated points of a family verdict.",
    )
    candidates: list[dict[str, int]] | None = Field(
        default=None,
        title="Candidates",
        description="Solutions found by probing an inconclusive problem; not claimed complete.",
    )
    families: list[FamilyModel] | None = None
    trace: list[TraceModel] | None = None
    stats: StatsModel = Field(default_factory=StatsModel)

    @classmethod
    def from_verdict(cls, verdict: Verdict, trace: bool = False) -> "VerdictReport":
        points = verdict.solution_maps()
        status = verdict.status.value
        entries = [TraceModel(stage=t.stage, outcome=t.outcome, millis=t.millis) for t in verdict.trace]
        return cls(
            status=status,
            completeness=verdict.completeness if status == "finite" else None,
            certificate=CertificateModel.from_certificate(verdict.certificate) if status == "no_solution" else None,
            solutions=points if status in ("finite", "family") else None,
            candidates=points if status == "inconclusive" else None,
            families=[FamilyModel(**family_payload(f)) for f in verdict.families] if status == "family" else None,
            trace=entries if trace else None,
            stats=StatsModel(**verdict.stats),
        )

    def to_json(self) -> str:
        return self.model_dump_json(indent=2, exclude_none=True)


class ClaimFile(BaseModel):
    """Defines a file of claimed solutions and families for ``dioph verify``."""

    solutions: list[dict[str, int]] = Field(default_factory=list, title="Solutions")
    families: list[FamilyModel] = Field(default_factory=list, title="Families")


class CertificateFile(BaseModel):
    """Defines a certificate file for ``dioph check``: a full report or a bare certificate."""

    certificate: CertificateModel


def family_payload(family: Family) -> dict[str, Any]:
    """JSON-compatible description of a family."""
    payload: dict[str, Any] = {
        "kind": family.kind,
        "parameters": [list(p) for p in family.parameters()],
        "expressions": dict(sorted(family.expressions().items())),
        "constraints": list(family.constraints()),
    }
    if family.kind == "pell-orbit":
        payload["sample"] = [dict(sorted(m.items())) for m in islice(family.materialize(SAMPLE_SIZE), SAMPLE_SIZE)]
    return payload
