"""
Periodic-grid numerics: FFT multipliers, the conical partition of unity,
operator application, norms and mollified measures.
"""

from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.fft

from hypolab.core.config import Settings, settings
from hypolab.core.exceptions import WidthUnresolvableError
from hypolab.core.logging import logger
from hypolab.models.fields import GridField
from hypolab.models.operators import DiffOp, DiffOpMatrix
from hypolab.schemas.grid import (
    Box,
    DensityProfile,
    MeasureKind,
    MeasureSpec,
    MultiplierSpec,
    Region,
)
from hypolab.utils.cutoffs import angular_bump, radial_cutoff

# (center angle, half-opening) of the four frequency cones:
# {4 xi > |eta|}, {4 xi < -|eta|}, {eta < -2|xi|}, {eta > 2|xi|}
CONES = (
    (0.0, np.arctan(4.0)),
    (np.pi, np.arctan(4.0)),
    (-np.pi / 2, np.arctan(0.5)),
    (np.pi / 2, np.arctan(0.5)),
)

# Angular bumps use this fraction of each half-opening, so supports sit strictly inside the cones.
CONE_MARGIN = 0.95


class NormKind(str, Enum):
    L1 = "L1"
    L2 = "L2"
    HS = "Hs"
    WS1 = "Ws1"


class GridService:
    """Service class for FFT-based operations on GridFields."""

    def __init__(self, config: Settings = settings):
        self.config = config
        self.workers = config.threads

    def fft(self, f: GridField) -> np.ndarray:
        return scipy.fft.fft2(f.values, workers=self.workers)

    def ifft(self, box: Box, spectrum: np.ndarray) -> GridField:
        return GridField(box, scipy.fft.ifft2(spectrum, workers=self.workers))

    def frequencies(self, box: Box) -> Tuple[np.ndarray, np.ndarray]:
        return box.frequencies()

    def coordinates(self, box: Box) -> Tuple[np.ndarray, np.ndarray]:
        return box.coordinates()

    def apply_multiplier(self, f: GridField, m: MultiplierSpec) -> GridField:
        """
        Apply a Fourier multiplier on the frequency lattice.

        Args:
            f: Input field
            m: Multiplier to apply

        Returns:
            ifft(m(kx, ky) * fft(f))
        """
        KX, KY = f.box.frequencies()
        symbol = m.evaluate(KX, KY)
        if not np.all(np.isfinite(symbol)):
            raise ValueError("multiplier is not finite on the frequency lattice")
        return self.ifft(f.box, symbol * self.fft(f))

    def partition_cutoffs(self, box: Box) -> List[np.ndarray]:
        """
        The five frequency cutoffs chi_0..chi_4 on the lattice of `box`.

        chi_0 is radial (1 on |k| <= 1, 0 on |k| >= 2). The conical pieces are
        (1 - chi_0) times normalized angular bumps, so the five sum to 1.
        """
        KX, KY = box.frequencies()
        radius = np.hypot(KX, KY)
        theta = np.arctan2(KY, KX)
        chi0 = radial_cutoff(radius)
        weights = [angular_bump(theta, c, CONE_MARGIN * h) for c, h in CONES]
        total = np.sum(weights, axis=0)
        outer = 1.0 - chi0
        with np.errstate(divide="ignore", invalid="ignore"):
            pieces = [np.where(outer > 0, outer * w / total, 0.0) for w in weights]
        return [chi0] + pieces

    def conical_partition(self, f: GridField) -> Tuple[GridField, ...]:
        """
        Split a field into its five microlocalized pieces.

        Args:
            f: Input field

        Returns:
            (f0, f1, f2, f3, f4) summing to f
        """
        spectrum = self.fft(f)
        return tuple(self.ifft(f.box, chi * spectrum) for chi in self.partition_cutoffs(f.box))

    def apply_scalar(self, op: DiffOp, f: GridField) -> GridField:
        """Spectral derivatives, then pointwise multiplication by sampled coefficients."""
        if op.is_zero:
            return GridField.zeros(f.box)
        KX, KY = f.box.frequencies()
        X, Y = f.box.coordinates()
        spectrum = self.fft(f)
        out = np.zeros(f.box.shape, dtype=complex)
        for (ox, oy), coeff in op:
            if ox == 0 and oy == 0:
                derived = f.values
            else:
                derived = scipy.fft.ifft2(
                    (1j * KX) ** ox * (1j * KY) ** oy * spectrum, workers=self.workers
                )
            out += coeff.evaluate(X, Y) * derived
        return GridField(f.box, out)

    def apply_diffop(self, op: DiffOpMatrix, fields: Sequence[GridField]) -> List[GridField]:
        """
        Apply a scalar or 2x2 operator to a vector of fields.

        Args:
            op: Operator matrix (scalar flag means a single field)
            fields: Input fields, one per column

        Returns:
            One output field per row
        """
        if len(fields) != op.size:
            raise ValueError(f"operator expects {op.size} field(s), got {len(fields)}")
        if op.scalar:
            return [self.apply_scalar(op.op, fields[0])]
        outputs = []
        for row in op.rows():
            outputs.append(self.apply_scalar(row[0], fields[0]) + self.apply_scalar(row[1], fields[1]))
        return outputs

    def norm(
        self,
        f: GridField,
        kind: NormKind,
        s: float = 0.0,
        region: Optional[Region] = None,
    ) -> float:
        """
        Riemann-sum norms, optionally localized by a sharp region indicator.

        Args:
            f: Field
            kind: L1, L2, Hs or Ws1
            s: Smoothness index for Hs / Ws1 (<D>^s applied first)
            region: Optional localization

        Returns:
            The norm value
        """
        kind = NormKind(kind)
        if not np.isfinite(s):
            raise ValueError("s must be finite")
        values = f.values
        if kind in (NormKind.HS, NormKind.WS1) and s != 0:
            values = self.apply_multiplier(f, MultiplierSpec.bracket(s)).values
        if region is not None:
            values = values[region.mask(f.box)]
        if kind in (NormKind.L1, NormKind.WS1):
            return float(np.sum(np.abs(values)) * f.box.cell_area)
        return float(np.sqrt(np.sum(np.abs(values) ** 2) * f.box.cell_area))

    def laplacian_inverse(self, f: GridField) -> Tuple[GridField, complex]:
        """
        Spectral inverse Laplacian with zero-mean gauge.

        Returns:
            (solution, projected mean of f)
        """
        KX, KY = f.box.frequencies()
        spectrum = self.fft(f)
        mean = spectrum[0, 0] / spectrum.size
        k2 = KX**2 + KY**2
        k2[0, 0] = 1.0
        solution = -spectrum / k2
        solution[0, 0] = 0.0
        if abs(mean) > 1e-12 * max(float(np.max(np.abs(f.values))), 1.0):
            logger.warning(f"laplacian_inverse: projected out mean {abs(mean):.3e}")
        return self.ifft(f.box, solution), complex(mean)

    def realize_measure(self, spec: MeasureSpec, box: Box) -> GridField:
        """
        Sample a mollified singular measure on the grid.

        Args:
            spec: Measure family and width
            box: Target box

        Returns:
            Real field approximating the measure at width spec.width

        Raises:
            WidthUnresolvableError: If width < 2 * max grid spacing
        """
        spacing = max(box.dx, box.dy)
        if spec.width < 2 * spacing:
            raise WidthUnresolvableError(
                f"width {spec.width} below twice the grid spacing {spacing:.4g}"
            )
        X, Y = box.coordinates()
        w = spec.width
        gauss_x = np.exp(-((X - spec.x0) ** 2) / (2 * w**2)) / (np.sqrt(2 * np.pi) * w)

        if spec.kind == MeasureKind.POINT_ATOM:
            gauss_y = np.exp(-((Y - spec.y0) ** 2) / (2 * w**2)) / (np.sqrt(2 * np.pi) * w)
            values = spec.mass * gauss_x * gauss_y
        elif spec.kind == MeasureKind.LINE_ON_X0:
            values = spec.mass * gauss_x * self._line_density(spec, box, Y)
        else:
            values = spec.mass * gauss_x * Y / (Y**2 + w**2)
        logger.debug(f"realize_measure {spec.kind.value} width {w}")
        return GridField(box, values)

    @staticmethod
    def _line_density(spec: MeasureSpec, box: Box, Y: np.ndarray) -> np.ndarray:
        if spec.density == DensityProfile.CONSTANT:
            return np.full_like(Y, 1.0 / box.ly)
        s = spec.density_width
        return np.exp(-((Y - spec.y0) ** 2) / (2 * s**2)) / (np.sqrt(2 * np.pi) * s)
