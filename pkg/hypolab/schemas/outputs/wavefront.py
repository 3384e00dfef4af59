"""
Output models for the wavefront probe.
"""

from typing import List, Tuple

from pydantic import BaseModel


class ConeReport(BaseModel):
    """Per-direction decay slopes of the Gabor coefficients at one base point."""

    base: Tuple[float, float]
    angles: List[float]
    slopes: List[float]
    singular_directions: List[int]
    boundary_bins: List[int]
    asymmetry_ok: bool


class ScanReport(BaseModel):
    all_ok: bool
    reports: List[ConeReport]
