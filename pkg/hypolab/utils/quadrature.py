"""
Adaptive quadrature helpers for damped oscillatory integrands.

Intervals are split into panels no longer than a quarter of the oscillation
half-period and twice the damping length; each panel goes through
scipy.integrate.quad on the real and imaginary parts separately.
"""

from typing import Callable, Iterable, Tuple

import numpy as np
from scipy import integrate

from hypolab.core.config import Settings, settings
from hypolab.core.logging import logger

# e^{-40} is below the quadrature tolerances used throughout.
DAMPING_HORIZON = 40.0


def panel_breaks(
    a: float,
    b: float,
    frequency: float = 0.0,
    damping: float = 0.0,
    points: Iterable[float] = (),
) -> np.ndarray:
    """
    Breakpoints for panelled quadrature on [a, b].

    Args:
        a: Lower limit
        b: Upper limit (finite)
        frequency: Oscillation frequency of the integrand
        damping: Exponential damping rate
        points: Extra breakpoints (kinks, plateau edges) inside (a, b)

    Returns:
        Sorted unique breakpoints including a and b
    """
    if not np.isfinite(b) or b <= a:
        raise ValueError("panel_breaks needs a finite interval with a < b")
    length = b - a
    if frequency:
        length = min(length, np.pi / (4 * abs(frequency)))
    if damping > 0:
        length = min(length, 2.0 / damping)
    count = int(np.ceil((b - a) / length))
    breaks = np.linspace(a, b, count + 1)
    extra = [p for p in points if a < p < b]
    return np.unique(np.concatenate([breaks, extra]))


def _quad_real(fn: Callable[[float], float], a: float, b: float, config: Settings, **kwargs) -> float:
    result = integrate.quad(
        fn,
        a,
        b,
        epsabs=config.quad_epsabs,
        epsrel=config.quad_epsrel,
        limit=config.quad_limit,
        full_output=1,
        **kwargs,
    )
    if len(result) >= 4:
        logger.warning(f"quad on [{a:.4g}, {b:.4g}]: {result[3].splitlines()[0]}")
    return result[0]


def panel_quad(
    fn: Callable[[float], complex],
    a: float,
    b: float,
    frequency: float = 0.0,
    damping: float = 0.0,
    points: Iterable[float] = (),
    config: Settings = settings,
) -> complex:
    """
    Integrate a complex integrand over [a, b] panel by panel.

    An infinite upper limit is truncated where the damping has decayed by
    e^{-DAMPING_HORIZON}; it requires damping > 0.
    """
    if not np.isfinite(b):
        if damping <= 0:
            raise ValueError("infinite interval without damping")
        b = a + DAMPING_HORIZON / damping
    return panel_sum(fn, panel_breaks(a, b, frequency, damping, points), config)


def panel_sum(fn: Callable[[float], complex], breaks: np.ndarray, config: Settings = settings) -> complex:
    """Sum of per-panel quad results over consecutive breakpoints."""
    real = 0.0
    imag = 0.0
    for left, right in zip(breaks[:-1], breaks[1:]):
        real += _quad_real(lambda t: fn(t).real, left, right, config)
        imag += _quad_real(lambda t: fn(t).imag, left, right, config)
    return complex(real, imag)


def fourier_quad(
    amplitude: Callable[[float], float],
    a: float,
    b: float,
    frequency: float,
    config: Settings = settings,
) -> complex:
    """
    Integrate amplitude(t) e^{i frequency t} over [a, b] with QUADPACK's
    cosine/sine weights (QAWO, or QAWF when b is infinite).
    """
    if frequency == 0.0:
        return complex(_quad_real(amplitude, a, b, config), 0.0)
    real = _quad_real(amplitude, a, b, config, weight="cos", wvar=frequency)
    imag = _quad_real(amplitude, a, b, config, weight="sin", wvar=frequency)
    return complex(real, imag)


def gauss_legendre(a: float, b: float, nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to [a, b]."""
    t, w = np.polynomial.legendre.leggauss(nodes)
    half = (b - a) / 2.0
    return a + half * (t + 1.0), half * w


def composite_gauss_legendre(
    breaks: np.ndarray, nodes: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Concatenated Gauss-Legendre rules on consecutive panels."""
    t, w = np.polynomial.legendre.leggauss(nodes)
    left, right = breaks[:-1, None], breaks[1:, None]
    half = (right - left) / 2.0
    return (left + half * (t + 1.0)).ravel(), (half * w).ravel()
