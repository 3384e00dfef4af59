"""
Smooth cutoff profiles built from the standard bump exp(-1/(1 - t^2)).
"""

import numpy as np


def bump(t: np.ndarray) -> np.ndarray:
    """exp(-1/(1 - t^2)) on |t| < 1, exactly zero elsewhere."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        return np.where(np.abs(t) < 1.0, np.exp(-1.0 / (1.0 - t**2)), 0.0)


def _edge(t: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        return np.where(t > 0, np.exp(-1.0 / t), 0.0)


def smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, monotone in between."""
    t = np.asarray(t, dtype=float)
    left, right = _edge(t), _edge(1.0 - t)
    return left / (left + right)


def radial_cutoff(r: np.ndarray, inner: float = 1.0, outer: float = 2.0) -> np.ndarray:
    """1 on r <= inner, 0 on r >= outer."""
    return 1.0 - smooth_step((np.asarray(r, dtype=float) - inner) / (outer - inner))


def plateau(t: np.ndarray, a: float, b: float, margin: float) -> np.ndarray:
    """1 on [a + margin, b - margin], 0 outside (a, b)."""
    t = np.asarray(t, dtype=float)
    return smooth_step((t - a) / margin) * smooth_step((b - t) / margin)


def angular_bump(theta: np.ndarray, center: float, half_width: float) -> np.ndarray:
    """Bump in the angle, supported in |theta - center| < half_width (mod 2 pi)."""
    delta = np.angle(np.exp(1j * (np.asarray(theta, dtype=float) - center)))
    return bump(delta / half_width)


def frequency_window(eta: np.ndarray, p: float, q: float) -> np.ndarray:
    """
    chi_p - chi_q with chi_p(eta) = S(eta + p + 1).

    For p > q this is 1 on [-p, -q - 1] and vanishes outside (-p - 1, -q);
    for p == q it is identically zero.
    """
    eta = np.asarray(eta, dtype=float)
    return smooth_step(eta + p + 1.0) - smooth_step(eta + q + 1.0)
