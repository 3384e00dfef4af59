"""
Gabor probe parameters for the numerical wavefront test.
"""

import math
from typing import List

from pydantic import BaseModel, Field, field_validator

from hypolab.core.config import settings


class GaborProbe(BaseModel):
    """
    Windowed Fourier probe: Gaussian window of width sigma, frequency radii
    `scales` along n_directions equispaced directions.

    exclude_boundary_bins drops the two horizontal directions (bins 0 and
    n_directions / 2) from the antipodal-disjointness test only. They stay in
    singular_directions. Off by default: with it on, a measure singular along
    the horizontal axis, such as the line measure on x = 0, passes the
    disjointness test although its cone is symmetric.
    """

    window_width: float = Field(default_factory=lambda: settings.gabor_sigma, gt=0.0)
    scales: List[float] = Field(default_factory=lambda: list(settings.gabor_scales), min_length=2)
    n_directions: int = Field(default_factory=lambda: settings.gabor_directions, ge=16)
    decay_threshold: float = Field(default_factory=lambda: settings.gabor_threshold)
    exclude_boundary_bins: bool = False

    @field_validator("scales")
    @classmethod
    def validate_scales(cls, v):
        if any(s <= 0 for s in v) or any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("scales must be positive and increasing")
        return v

    @field_validator("n_directions")
    @classmethod
    def validate_even(cls, v):
        if v % 2:
            raise ValueError("n_directions must be even")
        return v

    @property
    def octaves(self) -> float:
        return math.log2(self.scales[-1] / self.scales[0])
