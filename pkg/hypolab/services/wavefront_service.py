"""
Numerical wavefront probe: Gabor coefficients, directional decay fits and
the antipodal asymmetry scan.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np

from hypolab.core.config import Settings, settings
from hypolab.core.exceptions import InsufficientOctavesError
from hypolab.core.logging import logger
from hypolab.models.fields import GridField
from hypolab.schemas.outputs.wavefront import ConeReport, ScanReport
from hypolab.schemas.wavefront import GaborProbe
from hypolab.services.grid_service import GridService, NormKind

Point = Tuple[float, float]

# Window samples farther than this many widths from the base point are dropped.
WINDOW_RADIUS = 10.0

# Directions whose largest-scale coefficient falls below this fraction of ||f||_{L1} count as smooth.
NOISE_FLOOR = 1e-13

MIN_OCTAVES = 3.0


class WavefrontService:
    """Service class for windowed Fourier analysis of GridFields."""

    def __init__(self, config: Settings = settings):
        self.config = config
        self.threads = max(1, config.threads)
        self.grid = GridService(config)

    def _window(self, f: GridField, z: Point, sigma: float) -> Tuple[np.ndarray, np.ndarray]:
        """Points near z (minimum-image displacement), their positions and windowed values."""
        box = f.box
        X, Y = box.coordinates()
        dx = (X - z[0] + box.lx / 2) % box.lx - box.lx / 2
        dy = (Y - z[1] + box.ly / 2) % box.ly - box.ly / 2
        near = dx**2 + dy**2 <= (WINDOW_RADIUS * sigma) ** 2
        weights = np.exp(-(dx[near] ** 2 + dy[near] ** 2) / (2 * sigma**2))
        positions = np.stack([z[0] + dx[near], z[1] + dy[near]])
        return positions, weights * f.values[near]

    def _check_base(self, f: GridField, z: Point) -> None:
        box = f.box
        if not (abs(z[0]) <= box.lx / 2 and abs(z[1]) <= box.ly / 2):
            raise ValueError(f"base point {z} outside the box")

    def gabor(self, f: GridField, z: Point, k: Point, sigma: Optional[float] = None) -> complex:
        """
        Windowed Fourier coefficient int f(w) e^{-|w - z|^2 / (2 sigma^2)} e^{-i k.w} dw.

        Args:
            f: Field
            z: Base point inside the box
            k: Frequency vector
            sigma: Window width (defaults to settings)

        Returns:
            Grid-quadrature value of the coefficient
        """
        self._check_base(f, z)
        sigma = sigma or self.config.gabor_sigma
        return complex(self._coefficients(f, z, np.array([k], dtype=float), sigma)[0])

    def _coefficients(self, f: GridField, z: Point, ks: np.ndarray, sigma: float) -> np.ndarray:
        positions, windowed = self._window(f, z, sigma)
        phase = np.exp(-1j * (ks @ positions))
        return phase @ windowed * f.box.cell_area

    def cone_at(self, f: GridField, z: Point, probe: Optional[GaborProbe] = None) -> ConeReport:
        """
        Classify directions at z by the decay of |gabor(z, r w_j)| over the probe scales.

        Args:
            f: Field
            z: Base point inside the box
            probe: Window, scales, directions and decay threshold

        Returns:
            ConeReport; direction j is singular when the fitted log-log slope
            exceeds the threshold and the coefficient is above the noise floor

        Raises:
            InsufficientOctavesError: If the scales span fewer than three octaves
        """
        probe = probe or GaborProbe()
        if probe.octaves < MIN_OCTAVES - 1e-9:
            raise InsufficientOctavesError(
                f"scales span {probe.octaves:.2f} octaves, at least {MIN_OCTAVES:.0f} required"
            )
        nyquist = np.pi / max(f.box.dx, f.box.dy)
        if probe.scales[-1] >= nyquist:
            raise ValueError(f"largest scale {probe.scales[-1]} not below Nyquist radius {nyquist:.4g}")
        self._check_base(f, z)

        n = probe.n_directions
        angles = 2 * np.pi * np.arange(n) / n
        radii = np.asarray(probe.scales, dtype=float)
        directions = np.stack([np.cos(angles), np.sin(angles)], axis=1)
        ks = (directions[:, None, :] * radii[None, :, None]).reshape(-1, 2)
        magnitudes = np.abs(self._coefficients(f, z, ks, probe.window_width)).reshape(n, len(radii))

        floor = NOISE_FLOOR * self.grid.norm(f, NormKind.L1)
        logs = np.log(np.maximum(magnitudes, np.finfo(float).tiny))
        slopes = np.polyfit(np.log(radii), logs.T, 1)[0]
        singular = (slopes > probe.decay_threshold) & (magnitudes[:, -1] >= floor)

        boundary = [0, n // 2]
        considered = np.ones(n, dtype=bool)
        if probe.exclude_boundary_bins:
            considered[boundary] = False
        flagged = singular & considered
        asymmetry_ok = not np.any(flagged & np.roll(flagged, -(n // 2)))

        report = ConeReport(
            base=(float(z[0]), float(z[1])),
            angles=angles.tolist(),
            slopes=slopes.tolist(),
            singular_directions=np.flatnonzero(singular).tolist(),
            boundary_bins=boundary,
            asymmetry_ok=bool(asymmetry_ok),
        )
        logger.debug(
            f"cone_at {report.base}: singular {report.singular_directions}, asymmetry_ok={asymmetry_ok}"
        )
        return report

    def brummelhuis_scan(
        self, f: GridField, base_points: Sequence[Point], probe: Optional[GaborProbe] = None
    ) -> ScanReport:
        """Run cone_at at every base point; all_ok is the conjunction of asymmetry_ok."""
        probe = probe or GaborProbe()
        with ThreadPoolExecutor(max_workers=self.threads) as executor:
            reports: List[ConeReport] = list(
                executor.map(lambda z: self.cone_at(f, z, probe), base_points)
            )
        all_ok = all(r.asymmetry_ok for r in reports)
        logger.info(f"brummelhuis_scan over {len(reports)} base points: all_ok={all_ok}")
        return ScanReport(all_ok=all_ok, reports=reports)

    @staticmethod
    def rotate_quarter(f: GridField) -> GridField:
        """The field rotated by +90 degrees, g(x, y) = f(y, -x), on a square box."""
        if f.box.nx != f.box.ny or f.box.lx != f.box.ly:
            raise ValueError("quarter rotation needs a square box")
        n = f.box.nx
        index = (n - np.arange(n)) % n
        return f.with_values(f.values[:, index].T)
