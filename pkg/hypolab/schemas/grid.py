"""
Grid schemas: periodic box, mollified measures, Fourier multipliers and regions.
"""

import math
from enum import Enum
from typing import Callable, Optional, Tuple

import numpy as np
import scipy.fft
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from hypolab.core.config import settings


class Box(BaseModel):
    """Periodic box [-lx/2, lx/2) x [-ly/2, ly/2) sampled on nx x ny nodes."""

    model_config = ConfigDict(frozen=True)

    lx: float = Field(default_factory=lambda: settings.lx, gt=0)
    ly: float = Field(default_factory=lambda: settings.ly, gt=0)
    nx: int = Field(default_factory=lambda: settings.nx, ge=16)
    ny: int = Field(default_factory=lambda: settings.ny, ge=16)

    @field_validator("nx", "ny")
    @classmethod
    def validate_power_of_two(cls, v):
        if v & (v - 1):
            raise ValueError("grid sizes must be powers of two")
        return v

    @classmethod
    def square(cls, length: float, points: int) -> "Box":
        return cls(lx=length, ly=length, nx=points, ny=points)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.nx, self.ny

    @property
    def dx(self) -> float:
        return self.lx / self.nx

    @property
    def dy(self) -> float:
        return self.ly / self.ny

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    def x_nodes(self) -> np.ndarray:
        return -self.lx / 2 + self.dx * np.arange(self.nx)

    def y_nodes(self) -> np.ndarray:
        return -self.ly / 2 + self.dy * np.arange(self.ny)

    def coordinates(self) -> Tuple[np.ndarray, np.ndarray]:
        """(X, Y) node arrays, row index = x index."""
        return np.meshgrid(self.x_nodes(), self.y_nodes(), indexing="ij")

    def kx(self) -> np.ndarray:
        return 2 * np.pi * scipy.fft.fftfreq(self.nx, self.dx)

    def ky(self) -> np.ndarray:
        return 2 * np.pi * scipy.fft.fftfreq(self.ny, self.dy)

    def frequencies(self) -> Tuple[np.ndarray, np.ndarray]:
        """(KX, KY) frequency lattice in FFT order."""
        return np.meshgrid(self.kx(), self.ky(), indexing="ij")

    def refined(self, factor: int = 2) -> "Box":
        return Box(lx=self.lx, ly=self.ly, nx=self.nx * factor, ny=self.ny * factor)


class MeasureKind(str, Enum):
    """Singular measure families approximated by mollification."""

    POINT_ATOM = "point_atom"
    LINE_ON_X0 = "line_on_x0"
    PV_ONE_OVER_Y_ON_X0 = "pv_one_over_y_on_x0"


class DensityProfile(str, Enum):
    """Smooth density along the line x = 0, normalized to unit integral."""

    GAUSSIAN = "gaussian"
    CONSTANT = "constant"


class MeasureSpec(BaseModel):
    """Mollified singular measure of width w."""

    kind: MeasureKind
    mass: float = 1.0
    width: float = Field(..., gt=0)
    x0: float = 0.0
    y0: float = 0.0
    density: DensityProfile = DensityProfile.GAUSSIAN
    density_width: float = Field(1.0, gt=0)

    def with_width(self, width: float) -> "MeasureSpec":
        return self.model_copy(update={"width": width})


class MultiplierKind(str, Enum):
    JAPANESE_BRACKET = "japanese_bracket"
    JAPANESE_BRACKET_Y = "japanese_bracket_y"
    CUSTOM = "custom"


class MultiplierSpec(BaseModel):
    """
    Fourier multiplier m(xi, eta).

    japanese_bracket(s) is (1 + xi^2 + eta^2)^(s/2), japanese_bracket_y(s) is
    (1 + eta^2)^(s/2); custom evaluates `function` on the frequency lattice.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    kind: MultiplierKind
    order: float = 0.0
    function: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = Field(
        default=None, exclude=True
    )

    @model_validator(mode="after")
    def validate_custom(self):
        if self.kind == MultiplierKind.CUSTOM and self.function is None:
            raise ValueError("custom multipliers need a function")
        if not math.isfinite(self.order):
            raise ValueError("multiplier order must be finite")
        return self

    @classmethod
    def bracket(cls, s: float) -> "MultiplierSpec":
        return cls(kind=MultiplierKind.JAPANESE_BRACKET, order=s)

    @classmethod
    def bracket_y(cls, s: float) -> "MultiplierSpec":
        return cls(kind=MultiplierKind.JAPANESE_BRACKET_Y, order=s)

    def evaluate(self, kx: np.ndarray, ky: np.ndarray) -> np.ndarray:
        if self.kind == MultiplierKind.JAPANESE_BRACKET:
            return (1.0 + kx**2 + ky**2) ** (self.order / 2)
        if self.kind == MultiplierKind.JAPANESE_BRACKET_Y:
            return (1.0 + ky**2) ** (self.order / 2) * np.ones_like(kx)
        return np.asarray(self.function(kx, ky))


class RegionKind(str, Enum):
    RECTANGLE = "rectangle"
    DISC = "disc"


class Region(BaseModel):
    """Sharp-indicator localization for local norms."""

    kind: RegionKind = RegionKind.DISC
    x_min: float = -1.0
    x_max: float = 1.0
    y_min: float = -1.0
    y_max: float = 1.0
    center: Tuple[float, float] = (0.0, 0.0)
    radius: float = Field(1.0, gt=0)

    @classmethod
    def unit_disc(cls) -> "Region":
        return cls(kind=RegionKind.DISC, center=(0.0, 0.0), radius=1.0)

    @classmethod
    def rectangle(cls, x_min: float, x_max: float, y_min: float, y_max: float) -> "Region":
        return cls(kind=RegionKind.RECTANGLE, x_min=x_min, x_max=x_max, y_min=y_min, y_max=y_max)

    def mask(self, box: Box) -> np.ndarray:
        X, Y = box.coordinates()
        if self.kind == RegionKind.RECTANGLE:
            return (X >= self.x_min) & (X <= self.x_max) & (Y >= self.y_min) & (Y <= self.y_max)
        cx, cy = self.center
        return (X - cx) ** 2 + (Y - cy) ** 2 <= self.radius**2
