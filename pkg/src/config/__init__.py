"""Provides solver budgets and limits, with scaling from the environment."""
from __future__ import annotations

import logging
import os

from pydantic import BaseModel, ConfigDict, Field, field_validator

logger = logging.getLogger(__name__)

BUDGET_SCALE_ENV = "DIOPH_BUDGET_SCALE"

# Work budgets scale with DIOPH_BUDGET_SCALE; mathematical ceilings do not.
SCALED_FIELDS = ("state_budget", "probe_budget", "enum_budget", "timeout_ms", "pell_class_search_limit")


class SolverConfig(BaseModel):
    """Defines the budgets and limits of one solve call."""

    model_config = ConfigDict(frozen=True)

    max_modulus: int = Field(
        default=64,
        title="Maximum Modulus",
        ge=2,
        examples=[64],
        description="Largest modulus tried by the sensibility scan.",
    )
    state_budget: int = Field(
        default=10**7,
        title="State Budget",
        ge=1,
        description="Largest residue grid evaluated for one modulus.",
    )
    probe_box: tuple[int, int] = Field(
        default=(-100, 100),
        title="Probe Box",
        examples=[(-100, 100)],
        description="Per-variable box searched by the heuristic probe.",
    )
    probe_budget: int = Field(
        default=10**6,
        title="Probe Budget",
        ge=0,
        description="Evaluations spent by the spiral probe.",
    )
    enum_budget: int = Field(
        default=10**8,
        title="Enumeration Budget",
        ge=1,
        description="Evaluations allowed for exhaustive enumeration over proved bounds.",
    )
    timeout_ms: int = Field(
        default=10_000,
        title="Timeout",
        ge=1,
        description="Soft wall-clock budget per problem, in milliseconds.",
    )
    pell_inspection_limit: int = Field(
        default=1000,
        title="Pell Inspection Limit",
        ge=1,
        description="Values of y tried before switching to continued fractions.",
    )
    pell_class_search_limit: int = Field(
        default=10**7,
        title="Pell Class Search Limit",
        ge=1,
        description="Largest class-representative search range for x^2 - d y^2 = c.",
    )
    pell_max_d: int = Field(
        default=10**6,
        title="Pell Maximum d",
        ge=2,
        description="Largest d handled by the Pell solver.",
    )
    factor_limit: int = Field(
        default=2**64,
        title="Factor Limit",
        ge=1,
        description="Largest absolute value factored for divisor enumeration.",
    )
    split_limit: int = Field(
        default=64,
        title="Split Limit",
        ge=1,
        description="Largest value set a variable may have to be case-split on.",
    )
    split_depth: int = Field(
        default=4,
        title="Split Depth",
        ge=0,
        description="Nesting depth of case splits.",
    )
    targeted_modulus_cap: int = Field(
        default=4096,
        title="Targeted Modulus Cap",
        ge=2,
        description="Largest prime power tried by the targeted modular scan.",
    )
    family_sample: int = Field(
        default=20,
        title="Family Sample",
        ge=0,
        description="Parameter range 0..N used to sample family members when verifying.",
    )

    @field_validator("probe_box")
    @classmethod
    def _ordered_box(cls, box: tuple[int, int]) -> tuple[int, int]:
        if box[0] > box[1]:
            raise ValueError(f"empty box {box[0]}..{box[1]}")
        return box

    @classmethod
    def from_env(cls, **overrides) -> "SolverConfig":
        """Builds a config with budgets multiplied by ``DIOPH_BUDGET_SCALE``.

        Args:
            overrides: Field values applied before scaling.

        Returns:
            Scaled configuration.
        """
        config = cls(**overrides)
        raw = os.environ.get(BUDGET_SCALE_ENV)
        if not raw:
            return config
        try:
            scale = float(raw)
        except ValueError:
            logger.warning("ignoring %s=%r: not a number", BUDGET_SCALE_ENV, raw)
            return config
        if scale <= 0:
            logger.warning("ignoring %s=%r: must be positive", BUDGET_SCALE_ENV, raw)
            return config
        return config.scaled(scale)

    def scaled(self, scale: float) -> "SolverConfig":
        update = {name: max(1, int(getattr(self, name) * scale)) for name in SCALED_FIELDS if getattr(self, name)}
        return self.model_copy(update=update)


def parse_box(text: str) -> tuple[int, int]:
    """Reads a ``LO..HI`` box such as ``-50..50``."""
    lo, sep, hi = text.partition("..")
    if not sep:
        raise ValueError(f"box {text!r} is not of the form LO..HI")
    box = int(lo), int(hi)
    if box[0] > box[1]:
        raise ValueError(f"empty box {text!r}")
    return box
