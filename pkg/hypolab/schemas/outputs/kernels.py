"""
Output models for the kernel study.
"""

from typing import List

from pydantic import BaseModel, Field


class DecayRow(BaseModel):
    p: float
    q: float
    delta: float
    sup_l1: float = Field(..., ge=0.0)
    samples: int = Field(..., ge=64)
    x_prime: float
    y_prime: float


class DecayTable(BaseModel):
    """Sampled sup over (x', y') of ||K_pq||_{L1_{x,y}}, one row per p."""

    rows: List[DecayRow]


class BoundsReport(BaseModel):
    """
    Fitted constants of the three pointwise bounds (index = number of
    integrations by parts). Violations and excess ratios come from a held-out
    draw independent of the fit.
    """

    samples: int
    holdout_samples: int
    constants: List[float] = Field(..., min_length=3, max_length=3)
    violations: List[int] = Field(..., min_length=3, max_length=3)
    holdout_excess: List[float] = Field(..., min_length=3, max_length=3)
    p_version_constants: List[float] = Field(..., min_length=3, max_length=3)

    @property
    def total_violations(self) -> int:
        return sum(self.violations)


class RegionSplit(BaseModel):
    """y-integrals of |K| at one x over |y - y'| < d, d < |y - y'| < d^delta and the rest."""

    x: float
    d: float
    regions: List[float] = Field(..., min_length=3, max_length=3)
    direct: float

    @property
    def total(self) -> float:
        return sum(self.regions)
