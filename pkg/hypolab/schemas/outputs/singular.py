"""
Output models for the counterexample computations.
"""

from typing import List

from pydantic import BaseModel, Field


class GrowthRow(BaseModel):
    cutoff: float = Field(..., gt=0.0)
    exact: float
    quadrature: float


class GrowthTable(BaseModel):
    """||u1||^2_{L2} against the truncation Lambda, with the log-log slope."""

    rows: List[GrowthRow]
    slope: float


class TracePairing(BaseModel):
    """Real and imaginary parts of <u1(0, .), phi>."""

    re_pair: float
    im_pair: float


class TraceConstants(BaseModel):
    """Constants of the trace u1(0, .) ~ C delta_0 + i C~ PV(1/y)."""

    cutoff: float
    c: float
    c_tilde: float
