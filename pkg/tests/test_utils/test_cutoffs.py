"""
Unit tests for the smooth cutoff profiles.
"""

import numpy as np

from hypolab.utils.cutoffs import (
    angular_bump,
    bump,
    frequency_window,
    plateau,
    radial_cutoff,
    smooth_step,
)


class TestCutoffs:
    """Test cases for the bump-based profiles."""

    def test_bump_support(self):
        """Test that the bump vanishes exactly outside (-1, 1)."""
        t = np.array([-1.5, -1.0, 0.0, 1.0, 2.0])
        values = bump(t)
        assert values[0] == 0.0 and values[1] == 0.0 and values[3] == 0.0
        assert np.isclose(values[2], np.exp(-1.0))

    def test_smooth_step_limits(self):
        """Test the step values and monotonicity."""
        t = np.linspace(-1.0, 2.0, 301)
        s = smooth_step(t)
        assert np.all(s[t <= 0] == 0.0)
        assert np.all(s[t >= 1] == 1.0)
        assert np.all(np.diff(s) >= 0)
        assert np.isclose(smooth_step(0.5), 0.5)

    def test_radial_cutoff(self):
        """Test the radial cutoff is 1 inside and 0 outside."""
        assert radial_cutoff(0.5) == 1.0
        assert radial_cutoff(2.5) == 0.0

    def test_plateau(self):
        """Test the plateau on [a + margin, b - margin]."""
        t = np.array([0.9, 1.5, 2.0, 3.5, 4.1])
        values = plateau(t, 1.0, 4.0, 0.5)
        assert values[0] == 0.0 and values[-1] == 0.0
        assert values[1] == 1.0 and values[2] == 1.0 and values[3] == 1.0

    def test_angular_bump_wraps(self):
        """Test that the angular bump is periodic in the angle."""
        assert np.isclose(angular_bump(np.pi - 0.1, np.pi, 0.5), angular_bump(-np.pi - 0.1, np.pi, 0.5))
        assert angular_bump(0.0, np.pi, 0.5) == 0.0

    def test_frequency_window(self):
        """Test chi_p - chi_q: 1 on [-p, -q - 1], 0 outside (-p - 1, -q)."""
        eta = np.array([-9.5, -8.0, -6.0, -5.0, -3.5])
        values = frequency_window(eta, 8.0, 4.0)
        np.testing.assert_array_equal(values, [0.0, 1.0, 1.0, 1.0, 0.0])

    def test_frequency_window_empty(self):
        """Test that p == q gives the zero window."""
        eta = np.linspace(-20, 0, 41)
        assert np.all(frequency_window(eta, 5.0, 5.0) == 0.0)
