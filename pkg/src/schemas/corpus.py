"""Provides the schemas for corpus cases and their results."""
from typing import Literal

from pydantic import BaseModel, Field, model_validator

from src.schemas.verdict import VerdictReport

Expectation = Literal["no_solution", "finite", "family", "finite_or_inconclusive"]


class CorpusCase(BaseModel):
    """Defines one worked example and the verdict it must produce."""

    name: str = Field(
        title="Name",
        examples=["parity-quartic"],
        description="Unique case name.",
    )
    problem: str = Field(
        title="Problem",
        examples=["15*x^2+6*y^2=12 ; x,y in Z"],
        description="Problem text in the solver grammar.",
    )
    expect: Expectation = Field(
        title="Expectation",
        examples=["no_solution"],
        description="Status the verdict must have.",
    )
    count: int | None = Field(
        default=None,
        title="Solution Count",
        ge=0,
        description="Exact number of solutions of a finite verdict.",
    )
    solutions: list[dict[str, int]] | None = Field(
        default=None,
        title="Solutions",
        description=(
            "Exact solution set of a finite verdict; for finite_or_inconclusive, "
            "probed candidates must lie within it."
        ),
    )
    families: int | None = Field(
        default=None,
        title="Family Count",
        ge=1,
        description="Minimum number of families of a family verdict.",
    )
    certificate: str | None = Field(
        default=None,
        title="Certificate Kind",
        examples=["modular"],
        description="Kind the no_solution certificate must have, if fixed.",
    )
    box: str | None = Field(
        default=None,
        title="Probe Box",
        examples=["-50..50"],
        description="Probe box override as LO..HI.",
    )
    budgets: dict[str, int] = Field(
        default_factory=dict,
        title="Budgets",
        examples=[{"timeout_ms": 30000}],
        description="Solver config overrides for this case.",
    )

    @model_validator(mode="after")
    def _consistent(self) -> "CorpusCase":
        if self.expect != "finite" and self.count is not None:
            raise ValueError(f"{self.name}: count only applies to finite expectations")
        if self.expect != "family" and self.families is not None:
            raise ValueError(f"{self.name}: families only applies to family expectations")
        if self.expect != "no_solution" and self.certificate is not None:
            raise ValueError(f"{self.name}: certificate only applies to no_solution expectations")
        return self


class CaseResult(BaseModel):
    """Defines the outcome of running one corpus case."""

    name: str = Field(title="Name")
    expected: Expectation = Field(title="Expected")
    status: str = Field(title="Status", description="Verdict status, or 'error'.")
    passed: bool = Field(title="Passed")
    message: str = Field(default="", title="Message", description="Why the case failed, or a short summary.")
    solutions: int = Field(default=0, title="Solutions", ge=0)
    millis: float = Field(default=0.0, title="Milliseconds", ge=0)
    report: VerdictReport | None = Field(default=None, title="Report", description="Verdict report, absent on error.")
