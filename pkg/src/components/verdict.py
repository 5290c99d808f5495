"""Provides the verdict, certificate and trace types shared across solvers."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Iterator, Mapping, Protocol, Sequence, runtime_checkable


class Status(str, Enum):
    NO_SOLUTION = "no_solution"
    FINITE = "finite"
    FAMILY = "family"
    INCONCLUSIVE = "inconclusive"


# Completeness tags carried by Finite verdicts.
BOUNDED_EXHAUSTIVE = "bounded-exhaustive"
FACTOR_ENUMERATION = "factor-enumeration"
DISCRIMINANT_RANGE = "discriminant-range"
DIVISOR_CANDIDATES = "divisor-candidates"
MODULAR_PLUS_INSPECTION = "modular-plus-inspection"
LINEAR_ALGEBRA = "linear-algebra"
LINEAR_SUBSTITUTION = "linear-substitution"
ORDERED_MAGNITUDE = "ordered-magnitude"
ZERO_CASES = "zero-cases"


@dataclass(frozen=True)
class Certificate:
    """Machine-checkable argument; ``data`` holds JSON-compatible values only."""

    kind: str
    data: Mapping[str, Any] = field(default_factory=dict)

    @property
    def modulus(self) -> int | None:
        return self.data.get("modulus")

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, **self.data}

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> "Certificate":
        data = dict(payload)
        kind = data.pop("kind")
        return cls(kind, data)


@dataclass(frozen=True)
class TraceEntry:
    stage: str
    outcome: str
    millis: float = 0.0


@runtime_checkable
class Family(Protocol):
    """Infinite solution set given by parameters and closed-form expressions."""

    kind: str

    @property
    def variables(self) -> tuple[str, ...]: ...

    def parameters(self) -> list[tuple[str, str]]: ...

    def expressions(self) -> dict[str, str]: ...

    def constraints(self) -> list[str]: ...

    def materialize(self, limit: int = 20) -> Iterator[dict[str, int]]: ...

    def fix(self, variable: str, value: int) -> "Family": ...


@dataclass
class Verdict:
    status: Status
    variables: tuple[str, ...] = ()
    certificate: Certificate | None = None
    solutions: tuple[tuple[int, ...], ...] = ()
    completeness: str | None = None
    families: tuple[Family, ...] = ()
    trace: list[TraceEntry] = field(default_factory=list)
    stats: dict[str, int] = field(default_factory=dict)

    @classmethod
    def no_solution(cls, variables: Sequence[str], certificate: Certificate) -> "Verdict":
        return cls(Status.NO_SOLUTION, tuple(variables), certificate=certificate)

    @classmethod
    def finite(
        cls,
        variables: Sequence[str],
        solutions: Sequence[Sequence[int]],
        completeness: str,
        certificate: Certificate | None = None,
    ) -> "Verdict":
        unique = sorted({tuple(s) for s in solutions})
        return cls(Status.FINITE, tuple(variables), certificate, tuple(unique), completeness)

    @classmethod
    def family(
        cls,
        variables: Sequence[str],
        families: Sequence[Family],
        solutions: Sequence[Sequence[int]] = (),
        certificate: Certificate | None = None,
    ) -> "Verdict":
        unique = sorted({tuple(s) for s in solutions})
        return cls(Status.FAMILY, tuple(variables), certificate, tuple(unique), families=tuple(families))

    @classmethod
    def inconclusive(cls, variables: Sequence[str], candidates: Sequence[Sequence[int]] = ()) -> "Verdict":
        unique = sorted({tuple(s) for s in candidates})
        return cls(Status.INCONCLUSIVE, tuple(variables), solutions=tuple(unique))

    def solution_maps(self) -> list[dict[str, int]]:
        return [dict(zip(self.variables, s)) for s in self.solutions]

    def with_trace(self, trace: list[TraceEntry], stats: Mapping[str, int]) -> "Verdict":
        return replace(self, trace=list(trace), stats=dict(stats))
