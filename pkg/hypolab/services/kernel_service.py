"""
Oscillatory kernel K_pq of the P-operator gain: evaluation, pointwise
bounds and the sup-L1 decay study.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import qmc

from hypolab.core.config import Settings, settings
from hypolab.core.logging import logger
from hypolab.schemas.kernels import KernelParams
from hypolab.schemas.outputs.kernels import BoundsReport, DecayRow, DecayTable, RegionSplit
from hypolab.utils.cutoffs import frequency_window, radial_cutoff
from hypolab.utils.quadrature import composite_gauss_legendre

# (x', y') rectangle of the sup and the y-extent of the L1 integral
Y_LIMITS = (-2.0, 2.0)
WORST_CASE = ((0.999, 0.0), (0.99, 0.0), (0.9, 0.0))

ETA_NODES = 10
TRANSITION_PANELS = 4
X_NODES = 8
Y_NODES = 10


class KernelService:
    """Service class for the kernel K_pq(x, y, x', y')."""

    def __init__(self, config: Settings = settings):
        self.config = config
        self.threads = max(1, config.threads)

    def chi_pq(self, eta: np.ndarray, p: float, q: float) -> np.ndarray:
        """Window chi_p - chi_q; identically zero for p == q."""
        return frequency_window(eta, p, q)

    def eval_kernel(
        self,
        params: KernelParams,
        x: float,
        y: float,
        x_prime: float,
        y_prime: float,
        refine: int = 1,
    ) -> complex:
        """
        K_pq(x, y, x', y') = 1_{(x,1)}(x') phi(x) int e^{i(y-y') eta + d eta / 2} |eta|^delta chi_pq d eta.

        Args:
            params: Window and order
            x, y, x_prime, y_prime: Evaluation point, d = x'^2 - x^2
            refine: Panel multiplier for the eta rule

        Returns:
            The kernel value; exactly zero outside 0 < x < x' < 1 or for p == q
        """
        if params.empty or not 0.0 < x < x_prime < 1.0:
            return 0j
        phi = float(radial_cutoff(abs(x)))
        d = x_prime**2 - x**2
        value = self._kernel_matrix(params, np.array([d]), np.array([y - y_prime]), refine)
        return complex(phi * value[0, 0])

    def _eta_rule(
        self, params: KernelParams, s_max: float, refine: int
    ) -> Tuple[np.ndarray, np.ndarray]:
        """
        Composite Gauss-Legendre rule on (-p - 1, -q).

        The plateau uses panels no longer than half an oscillation period of
        e^{i s eta} for |s| <= s_max; each transition zone gets at least four
        panels and never coarser ones than the plateau.
        """
        p, q = params.p, params.q
        panel = min(1.0, math.pi / s_max) if s_max > 0 else 1.0
        edge = max(TRANSITION_PANELS, int(math.ceil(1.0 / panel))) * refine
        panel /= refine
        left = np.linspace(-p - 1.0, -p, edge + 1)
        right = np.linspace(-q - 1.0, -q, edge + 1)
        count = max(1, int(math.ceil(abs(p - q - 1.0) / panel)))
        middle = np.linspace(-p, -q - 1.0, count + 1)
        breaks = np.unique(np.concatenate([left, middle, right]))
        return composite_gauss_legendre(breaks, ETA_NODES)

    def _kernel_matrix(
        self, params: KernelParams, d: np.ndarray, s: np.ndarray, refine: int = 1
    ) -> np.ndarray:
        """K at y - y' = s[j] and x'^2 - x^2 = d[i], shape (len(s), len(d))."""
        nodes, weights = self._eta_rule(params, float(np.max(np.abs(s))), refine)
        base = weights * np.abs(nodes) ** params.delta * self.chi_pq(nodes, params.p, params.q)
        amplitude = base[:, None] * np.exp(np.outer(nodes, d) / 2.0)
        phase = np.exp(1j * np.outer(s, nodes))
        return phase @ amplitude

    # ------------------------------------------------------------------
    # L1 norms

    def _y_rule(
        self, params: KernelParams, a: float, b: float, refine: int, nodes: int = Y_NODES
    ) -> Tuple[np.ndarray, np.ndarray]:
        """|K| varies on the scale 1 / (window width); panels resolve that."""
        panel = math.pi / (params.p - params.q + 2.0) / refine
        count = max(1, int(math.ceil((b - a) / panel)))
        return composite_gauss_legendre(np.linspace(a, b, count + 1), nodes)

    def _x_rule(self, params: KernelParams, x_prime: float, refine: int) -> Tuple[np.ndarray, np.ndarray]:
        """Panels on (0, x') that are dyadic in d = x'^2 - x^2 towards x = x'."""
        top = x_prime**2
        levels = max(0, int(math.ceil(math.log2(max(8.0 * params.p * top, 1.0)))))
        d_levels = top * 2.0 ** -np.arange(1, levels + 1)
        inner = np.sqrt(top - d_levels)
        coarse = np.concatenate([[0.0], inner, [x_prime]])
        breaks = np.unique(
            np.concatenate(
                [np.linspace(a, b, refine + 1) for a, b in zip(coarse[:-1], coarse[1:])]
            )
        )
        return composite_gauss_legendre(breaks, X_NODES)

    def l1_norm(self, params: KernelParams, x_prime: float, y_prime: float, refine: int = 1) -> float:
        """
        ||K_pq(., ., x', y')||_{L1} over (0, 1) x (-2, 2).

        Args:
            params: Window and order
            x_prime, y_prime: Source point
            refine: Panel multiplier for all three rules

        Returns:
            The L1 norm estimate
        """
        if params.empty or x_prime <= 0.0:
            return 0.0
        x_nodes, x_weights = self._x_rule(params, min(x_prime, 1.0), refine)
        y_nodes, y_weights = self._y_rule(params, *Y_LIMITS, refine)
        d = x_prime**2 - x_nodes**2
        kernel = self._kernel_matrix(params, d, y_nodes - y_prime, refine)
        return float(y_weights @ np.abs(kernel) @ x_weights)

    def region_split(
        self, params: KernelParams, x: float, x_prime: float, y_prime: float, refine: int = 1
    ) -> RegionSplit:
        """
        y-integrals of |K| at fixed x over the three regions |y - y'| < d,
        d < |y - y'| < d^delta and d^delta < |y - y'|, against the direct integral.
        """
        if not 0.0 < x < x_prime < 1.0:
            raise ValueError("region_split needs 0 < x < x' < 1")
        d = x_prime**2 - x**2
        r = d**params.delta
        lo, hi = Y_LIMITS
        layout = [
            [(y_prime - d, y_prime + d)],
            [(y_prime - r, y_prime - d), (y_prime + d, y_prime + r)],
            [(lo, y_prime - r), (y_prime + r, hi)],
        ]
        regions = []
        for intervals in layout:
            total = 0.0
            for a, b in intervals:
                a, b = max(a, lo), min(b, hi)
                if b > a:
                    total += self._y_integral(params, d, a, b, y_prime, refine)
            regions.append(total)
        direct = self._y_integral(params, d, lo, hi, y_prime, refine)
        return RegionSplit(x=x, d=d, regions=regions, direct=direct)

    def _y_integral(
        self, params: KernelParams, d: float, a: float, b: float, y_prime: float, refine: int
    ) -> float:
        nodes, weights = self._y_rule(params, a, b, refine, nodes=16)
        kernel = self._kernel_matrix(params, np.array([d]), nodes - y_prime, refine)
        return float(weights @ np.abs(kernel[:, 0]))

    # ------------------------------------------------------------------
    # Bounds and decay

    def _bound_sample(self, sample_points: int, seed) -> Tuple[np.ndarray, np.ndarray]:
        """Latin-hypercube (d, s) with 0 < x < x' < 1 and |s| < 2."""
        unit = qmc.LatinHypercube(d=3, seed=np.random.default_rng(seed)).random(sample_points)
        x = np.minimum(unit[:, 0], unit[:, 1])
        x_prime = np.maximum(unit[:, 0], unit[:, 1])
        s = 4.0 * unit[:, 2] - 2.0
        keep = x < x_prime
        return x_prime[keep] ** 2 - x[keep] ** 2, s[keep]

    def _bound_ratios(
        self, params: KernelParams, d: np.ndarray, s: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray]:
        """
        |K| over the unit-constant bounds, shape (3, len(d)), and the same
        ratios for the e^{-p d} variant.
        """
        if params.empty:
            values = np.zeros_like(d)
        else:
            values = np.array(
                [abs(self._kernel_matrix(params, np.array([di]), np.array([si]))[0, 0]) for di, si in zip(d, s)]
            )
        spread = 2.0 * np.abs(s) + d
        denominators = np.array([d ** (1.0 + params.delta), spread * d**params.delta, spread**2])
        ratios = values * denominators * np.exp(params.q * d / 2.0)
        p_ratios = values * denominators * np.exp(params.p * d)
        return ratios, p_ratios

    def count_violations(
        self, params: KernelParams, constants: Sequence[float], sample_points: int = 1000, seed=0
    ) -> List[int]:
        """
        Number of sample points where |K| exceeds c_N (1 + 1e-6) times the N-th bound.

        Args:
            params: Window and order
            constants: c_0, c_1, c_2
            sample_points: Latin-hypercube sample size
            seed: Sampler seed (int or SeedSequence)

        Returns:
            One count per bound
        """
        if len(constants) != 3:
            raise ValueError("constants must hold c_0, c_1 and c_2")
        ratios, _ = self._bound_ratios(params, *self._bound_sample(sample_points, seed))
        return [int(np.sum(row > c * (1.0 + 1e-6))) for row, c in zip(ratios, constants)]

    def verify_pointwise_bounds(
        self, params: KernelParams, sample_points: int = 1000, seed: int = 0
    ) -> BoundsReport:
        """
        Fit the constants of the bounds obtained by N = 0, 1, 2 integrations by parts.

        With d = x'^2 - x^2 and s = |y - y'| the right-hand sides are
        e^{-q d / 2} over d^{1+delta}, (2s + d) d^delta and (2s + d)^2. The
        constant c_N is the largest ratio on a fitting draw. A second,
        independent draw of the same size is then checked against
        bound_margin * c_N; its largest ratio over c_N is reported as the
        excess. Constants for the e^{-p d} variant are reported for information.

        Args:
            params: Window and order
            sample_points: Latin-hypercube sample size of each draw, at least 100
            seed: Sampler seed

        Returns:
            BoundsReport
        """
        if sample_points < 100:
            raise ValueError("sample_points must be at least 100")
        fit_seed, holdout_seed = np.random.SeedSequence(seed).spawn(2)
        d, s = self._bound_sample(sample_points, fit_seed)
        ratios, p_ratios = self._bound_ratios(params, d, s)
        constants = [float(np.max(row)) if row.size else 0.0 for row in ratios]
        p_constants = [float(np.max(row)) if row.size else 0.0 for row in p_ratios]

        held_d, held_s = self._bound_sample(sample_points, holdout_seed)
        held, _ = self._bound_ratios(params, held_d, held_s)
        margin = self.config.bound_margin
        violations = [int(np.sum(row > margin * c * (1.0 + 1e-6))) for row, c in zip(held, constants)]
        excess = [float(np.max(row)) / c if row.size and c > 0 else 0.0 for row, c in zip(held, constants)]

        logger.info(
            f"verify_pointwise_bounds p={params.p} q={params.q}: constants "
            f"{[f'{c:.3e}' for c in constants]}, held-out excess "
            f"{[f'{e:.3f}' for e in excess]}, violations {violations}"
        )
        return BoundsReport(
            samples=int(d.size),
            holdout_samples=int(held_d.size),
            constants=constants,
            violations=violations,
            holdout_excess=excess,
            p_version_constants=p_constants,
        )

    def bound_ratios(
        self, params: KernelParams, x: float, x_prime: float, separations: Sequence[float]
    ) -> np.ndarray:
        """
        |K| over the unit-constant bounds at fixed x < x' along |y - y'|.

        Returns:
            Array of shape (3, len(separations)), row N for the N-th bound
        """
        if not 0.0 < x < x_prime < 1.0:
            raise ValueError("bound_ratios needs 0 < x < x' < 1")
        s = np.asarray(separations, dtype=float)
        d = np.array([x_prime**2 - x**2])
        if params.empty:
            return np.zeros((3, s.size))
        values = np.abs(self._kernel_matrix(params, d, s)[:, 0])
        spread = 2.0 * np.abs(s) + d[0]
        denominators = np.array(
            [np.full_like(s, d[0] ** (1.0 + params.delta)), spread * d[0] ** params.delta, spread**2]
        )
        return values * denominators * math.exp(params.q * d[0] / 2.0)

    def source_points(self, samples: int, seed: int) -> List[Tuple[float, float]]:
        """Latin-hypercube (x', y') in (0, 1) x (-2, 2) plus the worst-case candidates."""
        unit = qmc.LatinHypercube(d=2, seed=seed).random(samples)
        lo, hi = Y_LIMITS
        points = [(float(u), float(lo + (hi - lo) * v)) for u, v in unit]
        return points + list(WORST_CASE)

    def decay_study(
        self,
        p_list: Sequence[float],
        ratio: float = 0.5,
        delta: float = 0.25,
        samples: Optional[int] = None,
        seed: int = 0,
        refine: int = 1,
    ) -> DecayTable:
        """
        Sampled sup over (x', y') of ||K_pq||_{L1} for q = ratio * p.

        Args:
            p_list: Increasing p values
            ratio: q / p
            delta: Order in [0, 1/2)
            samples: Latin-hypercube size (defaults to settings.kernel_samples)
            seed: Sampler seed
            refine: Panel multiplier of the quadrature rules

        Returns:
            DecayTable with one row per p
        """
        samples = samples or self.config.kernel_samples
        if samples < 64:
            raise ValueError("samples must be at least 64")
        if not 0.0 < ratio <= 1.0:
            raise ValueError("ratio must lie in (0, 1]")
        if any(b <= a for a, b in zip(p_list, p_list[1:])):
            raise ValueError("p_list must be increasing")

        points = self.source_points(samples, seed)
        rows = []
        for p in p_list:
            params = KernelParams(p=p, q=ratio * p, delta=delta)
            with ThreadPoolExecutor(max_workers=self.threads) as executor:
                norms = list(
                    executor.map(lambda point: self.l1_norm(params, point[0], point[1], refine), points)
                )
            best = int(np.argmax(norms))
            rows.append(
                DecayRow(
                    p=p,
                    q=params.q,
                    delta=delta,
                    sup_l1=norms[best],
                    samples=len(points),
                    x_prime=points[best][0],
                    y_prime=points[best][1],
                )
            )
            logger.info(f"decay_study p={p}: sup L1 {norms[best]:.6g} at {points[best]}")
        return DecayTable(rows=rows)
