"""
Output models for the solvers.
"""

from typing import Dict, List

from pydantic import BaseModel, ConfigDict, Field, model_validator

from hypolab.models.fields import GridField


class SolveResult(BaseModel):
    """Solution fields with the relative residual of the forward operator."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    fields: List[GridField] = Field(..., min_length=1)
    residual: float = Field(..., ge=0.0)
    diagnostics: Dict[str, float] = Field(default_factory=dict)

    @property
    def field(self) -> GridField:
        return self.fields[0]


class RegularityProbeReport(BaseModel):
    """Local W^{s,1}-type norms of solutions driven by a shrinking mollified measure."""

    operator: str
    measure: str
    s: float = Field(..., ge=0.0)
    widths: List[float] = Field(..., min_length=2)
    norms: List[float]
    fitted_exponent: float
    bounded: bool
    exploratory: bool = False

    @model_validator(mode="after")
    def validate_series(self):
        if any(b >= a for a, b in zip(self.widths, self.widths[1:])):
            raise ValueError("widths must be strictly decreasing")
        if len(self.norms) != len(self.widths):
            raise ValueError("one norm per width expected")
        return self


class GainProfileRow(BaseModel):
    """Norm ratios for one oscillating forcing of the polarized system."""

    frequency: float
    l2_ratio: float
    h1_ratio: float
    residual: float


class GainProfile(BaseModel):
    rows: List[GainProfileRow]
    h1_exponent: float
