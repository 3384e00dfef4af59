"""
Explicit non-smooth solutions of A u = 0: pointwise evaluation, grid
realization, the L2 growth law and the trace on x = 0.
"""

import math
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.fft
from scipy import integrate

from hypolab.core.config import Settings, settings
from hypolab.core.exceptions import DivergentIntegralError
from hypolab.core.logging import logger
from hypolab.models.fields import GridField
from hypolab.schemas.grid import Box
from hypolab.schemas.outputs.singular import (
    GrowthRow,
    GrowthTable,
    TraceConstants,
    TracePairing,
)
from hypolab.schemas.singular import (
    ChiKind,
    ChiSpec,
    CounterexampleSolution,
    TestFunctionKind,
    TestFunctionSpec,
)
from hypolab.services.grid_service import GridService, NormKind
from hypolab.utils import catalog
from hypolab.utils.quadrature import fourier_quad, panel_breaks, panel_quad, panel_sum

# ||u1||^2 = 2 pi^{3/2} int |chi|^2 / sqrt(eta): Plancherel in y, then the Gaussian x-integral.
GROWTH_CONSTANT = 2.0 * math.pi**1.5

# Test functions are integrated over |y| <= TRACE_SPAN * width.
TRACE_SPAN = 12.0


class EvalMethod(str, Enum):
    AUTO = "auto"
    QUADRATURE = "quadrature"
    CLOSED_FORM = "closed_form"


class SingularService:
    """Service class for the counterexample family u1_hat = chi(eta) e^{-x^2 eta / 2}."""

    def __init__(self, config: Settings = settings):
        self.config = config
        self.grid = GridService(config)
        self.system_a = catalog.first_order_system()

    def eval_u1(
        self,
        sol: CounterexampleSolution,
        x: float,
        y: float,
        method: EvalMethod = EvalMethod.AUTO,
    ) -> complex:
        """
        First component u1(x, y) e^{i theta} of the solution.

        Args:
            sol: Profile chi and rotation theta
            x: Abscissa
            y: Ordinate
            method: auto uses the closed form for indicators and quadrature otherwise

        Returns:
            The complex value

        Raises:
            DivergentIntegralError: At x = 0 with an untruncated infinite support
        """
        chi = sol.chi
        method = EvalMethod(method)
        if x == 0 and not math.isfinite(chi.upper):
            raise DivergentIntegralError("u1 diverges on x = 0 without a frequency cutoff")
        if method == EvalMethod.AUTO:
            method = EvalMethod.CLOSED_FORM if chi.kind == ChiKind.INDICATOR else EvalMethod.QUADRATURE

        if method == EvalMethod.CLOSED_FORM:
            if chi.kind != ChiKind.INDICATOR:
                raise ValueError("closed form is available for indicator profiles only")
            value = self._indicator_closed_form(chi.a, chi.upper, x, y)
        else:
            value = self._quadrature(chi, x, y)
        return sol.phase * value

    @staticmethod
    def _indicator_closed_form(a: float, b: float, x: float, y: float) -> complex:
        """int_a^b e^{z eta} d eta with z = i y - x^2 / 2."""
        z = complex(-(x**2) / 2, y)
        if z == 0:
            return complex(b - a)
        if not math.isfinite(b):
            return complex(-np.exp(a * z) / z)
        return complex(np.exp(a * z) * np.expm1((b - a) * z) / z)

    def _quadrature(self, chi: ChiSpec, x: float, y: float) -> complex:
        damping = x**2 / 2

        def amplitude(eta: float) -> float:
            return float(chi.evaluate(eta)) * math.exp(-damping * eta)

        if chi.kind == ChiKind.INDICATOR:
            return fourier_quad(amplitude, chi.a, chi.upper, y, self.config)
        return panel_quad(
            lambda eta: amplitude(eta) * complex(math.cos(y * eta), math.sin(y * eta)),
            chi.a,
            chi.upper,
            frequency=y,
            damping=damping,
            points=chi.breakpoints,
            config=self.config,
        )

    def realize_u1(
        self, sol: CounterexampleSolution, box: Optional[Box] = None
    ) -> Tuple[GridField, GridField]:
        """
        Grid samples of (u1 e^{i theta}, -i u1 e^{i theta}) for a smooth profile.

        Each x-row is the inverse FFT of chi(eta_m) e^{-x^2 eta_m / 2} on the
        y-frequency lattice, i.e. the Riemann sum of the eta-integral.
        """
        if sol.chi.kind != ChiKind.SMOOTH_BUMP:
            raise ValueError("grid realization needs a smooth chi")
        box = box or Box()
        x = box.x_nodes()
        eta = box.ky()
        d_eta = 2 * np.pi / box.ly
        sign = (-1.0) ** np.arange(box.ny)
        coefficients = (
            box.ny
            * d_eta
            * (sol.chi.evaluate(eta) * sign)[None, :]
            * np.exp(-np.outer(x**2, np.clip(eta, 0.0, None)) / 2)
        )
        u1 = scipy.fft.ifft(coefficients, axis=1, workers=self.config.threads) * sol.phase
        return GridField(box, u1), GridField(box, -1j * u1)

    def residual_au(self, sol: CounterexampleSolution, box: Optional[Box] = None) -> float:
        """||A u||_{L2} / ||u||_{L2} for the gridded pair."""
        u = self.realize_u1(sol, box)
        image = self.grid.apply_diffop(self.system_a, list(u))
        num = math.hypot(*(self.grid.norm(f, NormKind.L2) for f in image))
        den = math.hypot(*(self.grid.norm(f, NormKind.L2) for f in u))
        residual = num / den
        logger.debug(f"residual_au theta={sol.theta:.4f}: {residual:.3e}")
        return residual

    def l2_growth(
        self, cutoffs: Sequence[float], chi: Optional[ChiSpec] = None
    ) -> GrowthTable:
        """
        ||u1||^2_{L2} for the truncations chi = 1_{(0, Lambda)} (or `chi` cut at Lambda).

        Args:
            cutoffs: Increasing truncations Lambda
            chi: Optional fixed profile; an infinite upper edge is cut at each Lambda

        Returns:
            Table of the exact reduction and the 2D quadrature, with the log-log slope
        """
        cutoffs = [float(c) for c in cutoffs]
        if len(cutoffs) < 2 or any(b <= a for a, b in zip(cutoffs, cutoffs[1:])):
            raise ValueError("cutoffs must be increasing, at least two")
        rows = []
        for cutoff in cutoffs:
            profile = self._truncated(chi, cutoff)
            rows.append(
                GrowthRow(
                    cutoff=cutoff,
                    exact=self._exact_norm2(profile),
                    quadrature=self._quadrature_norm2(profile),
                )
            )
        slope = float(
            np.polyfit(np.log(cutoffs), np.log([row.exact for row in rows]), 1)[0]
        )
        logger.info(f"l2_growth: slope {slope:.4f} over {len(rows)} cutoffs")
        return GrowthTable(rows=rows, slope=slope)

    @staticmethod
    def _truncated(chi: Optional[ChiSpec], cutoff: float) -> ChiSpec:
        if chi is None:
            return ChiSpec.indicator(0.0, cutoff)
        if math.isfinite(chi.b):
            return chi
        return chi.model_copy(update={"cutoff": cutoff})

    def _exact_norm2(self, chi: ChiSpec) -> float:
        if chi.kind == ChiKind.INDICATOR:
            return GROWTH_CONSTANT * 2.0 * (math.sqrt(chi.upper) - math.sqrt(chi.a))
        value, _ = integrate.quad(
            lambda eta: float(chi.evaluate(eta)) ** 2 / math.sqrt(eta),
            chi.a,
            chi.upper,
            points=chi.breakpoints,
            epsabs=self.config.quad_epsabs,
            epsrel=self.config.quad_epsrel,
            limit=self.config.quad_limit,
        )
        return GROWTH_CONSTANT * value

    def _quadrature_norm2(self, chi: ChiSpec) -> float:
        """2 pi int_R int chi(eta)^2 e^{-x^2 eta} d eta dx with eta = t^2."""
        value, _ = integrate.dblquad(
            lambda t, x: 2.0 * t * float(chi.evaluate(t * t)) ** 2 * math.exp(-((x * t) ** 2)),
            0.0,
            math.inf,
            math.sqrt(chi.a),
            math.sqrt(chi.upper),
            epsabs=1e-12,
            epsrel=1e-9,
        )
        return 2.0 * math.pi * 2.0 * value

    def trace_pairing(self, cutoff: float, phi: TestFunctionSpec) -> TracePairing:
        """
        <u1(0, .), phi> for chi = 1_{(0, Lambda)}.

        The eta-integral is done in closed form, int_0^Lambda e^{i y eta} d eta
        = sin(Lambda y)/y + i (1 - cos(Lambda y))/y, and the y-integral on
        mirrored panels so that parity cancellations are exact.
        """
        if cutoff <= 0:
            raise ValueError("cutoff must be positive")
        half = panel_breaks(0.0, TRACE_SPAN * phi.width, frequency=cutoff)
        breaks = np.concatenate([-half[::-1], half[1:]])

        def integrand(y: float) -> complex:
            real = cutoff * np.sinc(cutoff * y / np.pi)
            imag = cutoff * np.sin(cutoff * y / 2) * np.sinc(cutoff * y / (2 * np.pi))
            return complex(real, imag) * float(phi.evaluate(y))

        value = panel_sum(integrand, breaks, self.config)
        logger.debug(f"trace_pairing Lambda={cutoff} {phi.kind.value}: {value:.12g}")
        return TracePairing(re_pair=value.real, im_pair=value.imag)

    def trace_constants(self, cutoff: float, width: float = 1.0) -> TraceConstants:
        """C from the even Gaussian pairing, C~ from the odd one against <PV(1/y), phi>."""
        even = TestFunctionSpec(kind=TestFunctionKind.GAUSSIAN, width=width)
        odd = TestFunctionSpec(kind=TestFunctionKind.ODD_GAUSSIAN, width=width)
        c = self.trace_pairing(cutoff, even).re_pair / even.value_at_zero
        c_tilde = self.trace_pairing(cutoff, odd).im_pair / odd.pv_pairing
        logger.info(f"trace_constants Lambda={cutoff}: C={c:.10f}, C~={c_tilde:.10f}")
        return TraceConstants(cutoff=cutoff, c=c, c_tilde=c_tilde)
