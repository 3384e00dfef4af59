"""
Unit tests for the explicit non-smooth solutions.
"""

import math

import numpy as np
import pytest

from hypolab.core.exceptions import DivergentIntegralError
from hypolab.schemas.grid import Box
from hypolab.schemas.singular import ChiSpec, CounterexampleSolution
from hypolab.schemas.singular import TestFunctionKind as PhiKind
from hypolab.schemas.singular import TestFunctionSpec as PhiSpec
from hypolab.services.singular_service import GROWTH_CONSTANT, EvalMethod, SingularService


class TestSingularService:
    """Test cases for SingularService."""

    def setup_method(self):
        """Set up the service with a sharp and a smooth profile."""
        self.service = SingularService()
        self.sharp = CounterexampleSolution(chi=ChiSpec.indicator(0.0, 20.0))
        self.smooth = CounterexampleSolution(chi=ChiSpec.smooth_bump(1.0, 4.0))

    def test_closed_form_matches_quadrature(self):
        """Test both evaluation routes for an indicator profile."""
        closed = self.service.eval_u1(self.sharp, 0.5, 0.3, EvalMethod.CLOSED_FORM)
        quad = self.service.eval_u1(self.sharp, 0.5, 0.3, EvalMethod.QUADRATURE)
        assert abs(closed - quad) < 1e-8 * abs(closed)

    def test_closed_form_on_the_degenerate_line(self):
        """Test u1(0, 0) = Lambda for chi = 1_(0, Lambda)."""
        assert self.service.eval_u1(self.sharp, 0.0, 0.0) == pytest.approx(20.0)

    def test_rotation_multiplies_by_phase(self):
        """Test that theta only rotates the value."""
        rotated = CounterexampleSolution(chi=self.sharp.chi, theta=math.pi / 2)
        value = self.service.eval_u1(self.sharp, 0.5, 0.3)
        assert self.service.eval_u1(rotated, 0.5, 0.3) == pytest.approx(1j * value)

    def test_untruncated_profile_values(self):
        """Test int_0^inf e^{(i y - x^2 / 2) eta} d eta = 1 / (x^2 / 2 - i y)."""
        sol = CounterexampleSolution(chi=ChiSpec.indicator(0.0))
        assert self.service.eval_u1(sol, 1.0, 0.0) == pytest.approx(2.0)
        quad = self.service.eval_u1(sol, 1.0, 1.0, EvalMethod.QUADRATURE)
        assert abs(quad - 1 / (0.5 - 1j)) < 1e-10

    def test_divergent_on_degenerate_line(self):
        """Test that the untruncated profile diverges at x = 0."""
        sol = CounterexampleSolution(chi=ChiSpec.indicator(0.0))
        with pytest.raises(DivergentIntegralError):
            self.service.eval_u1(sol, 0.0, 0.3)
        assert abs(self.service.eval_u1(sol, 1.0, 0.3)) > 0

    def test_closed_form_needs_indicator(self):
        """Test that the closed form refuses smooth profiles."""
        with pytest.raises(ValueError, match="indicator"):
            self.service.eval_u1(self.smooth, 0.5, 0.3, EvalMethod.CLOSED_FORM)

    def test_realize_needs_smooth_profile(self):
        """Test that sharp profiles are not gridded."""
        with pytest.raises(ValueError, match="smooth"):
            self.service.realize_u1(self.sharp, Box.square(8 * math.pi, 64))

    def test_residual_is_spectrally_small(self):
        """Test A u = 0 on the grid for two rotations."""
        box = Box.square(8 * math.pi, 128)
        for theta in (0.0, math.pi / 3):
            sol = CounterexampleSolution(chi=self.smooth.chi, theta=theta)
            assert self.service.residual_au(sol, box) <= 1e-8

    def test_l2_growth_square_root(self):
        """Test ||u1||^2 = 4 pi^{3/2} sqrt(Lambda) and its quadrature."""
        table = self.service.l2_growth([5.0, 10.0, 20.0])
        assert table.slope == pytest.approx(0.5, abs=1e-12)
        for row in table.rows:
            assert row.exact == pytest.approx(2.0 * GROWTH_CONSTANT * math.sqrt(row.cutoff))
            assert row.quadrature == pytest.approx(row.exact, rel=1e-6)

    def test_l2_growth_arguments(self):
        """Test that cutoffs must increase."""
        with pytest.raises(ValueError):
            self.service.l2_growth([10.0, 5.0])
        with pytest.raises(ValueError):
            self.service.l2_growth([10.0])

    def test_trace_pairing_even(self):
        """Test <u1(0, .), gaussian> = pi erf(Lambda / sqrt 2)."""
        pairing = self.service.trace_pairing(20.0, PhiSpec(kind=PhiKind.GAUSSIAN))
        assert pairing.re_pair == pytest.approx(math.pi, abs=1e-6)
        assert abs(pairing.im_pair) < 1e-10

    def test_trace_pairing_odd(self):
        """Test that the odd pairing is purely imaginary."""
        pairing = self.service.trace_pairing(20.0, PhiSpec(kind=PhiKind.ODD_GAUSSIAN))
        assert abs(pairing.re_pair) < 1e-10
        assert pairing.im_pair == pytest.approx(math.sqrt(2 * math.pi), rel=1e-6)

    def test_trace_pairing_rejects_cutoff(self):
        """Test that the cutoff must be positive."""
        with pytest.raises(ValueError):
            self.service.trace_pairing(0.0, PhiSpec())

    def test_trace_constants(self):
        """Test C = pi and C~ = 1."""
        constants = self.service.trace_constants(20.0)
        assert constants.c == pytest.approx(math.pi, abs=1e-6)
        assert constants.c_tilde == pytest.approx(1.0, abs=1e-6)

    def test_conjugate_symmetry_in_y(self):
        """Test u1(x, -y) = conj(u1(x, y)) for a real profile."""
        for sol in (self.sharp, self.smooth):
            for x, y in ((0.5, 0.3), (1.2, -2.0), (0.0, 0.7)):
                value = self.service.eval_u1(sol, x, y)
                mirrored = self.service.eval_u1(sol, x, -y)
                assert abs(mirrored - value.conjugate()) <= 1e-10 * max(abs(value), 1.0)

    def test_grid_rows_have_the_profile_as_fourier_slice(self):
        """Test that the y-transform of a gridded row is 2 pi chi(eta) e^{-x^2 eta / 2}."""
        box = Box.square(8 * math.pi, 128)
        u1, _ = self.service.realize_u1(self.smooth, box)
        i = int(np.argmin(np.abs(box.x_nodes() - 0.5)))
        x, y, eta = box.x_nodes()[i], box.y_nodes(), box.ky()
        transform = np.exp(-1j * np.outer(eta, y)) @ u1.values[i] * box.dy
        expected = 2 * math.pi * self.smooth.chi.evaluate(eta) * np.exp(-(x**2) * np.clip(eta, 0.0, None) / 2)
        assert np.max(np.abs(transform - expected)) <= 1e-6 * np.max(np.abs(expected))

    def test_closed_form_matches_quadrature_on_random_points(self):
        """Test both routes at random points off the degenerate line."""
        rng = np.random.default_rng(23)
        for x, y in zip(rng.uniform(0.2, 3.0, 100), rng.uniform(-3.0, 3.0, 100)):
            closed = self.service.eval_u1(self.sharp, x, y, EvalMethod.CLOSED_FORM)
            quad = self.service.eval_u1(self.sharp, x, y, EvalMethod.QUADRATURE)
            assert abs(closed - quad) <= 1e-9 * abs(closed)
