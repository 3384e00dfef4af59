"""
Unit tests for the oscillatory kernel study.
"""

import numpy as np
import pytest
from pydantic import ValidationError

from hypolab.schemas.kernels import KernelParams
from hypolab.services.kernel_service import KernelService


class TestKernelService:
    """Test cases for KernelService."""

    def setup_method(self):
        """Set up the service and a nonempty window."""
        self.service = KernelService()
        self.params = KernelParams(p=8.0, q=4.0, delta=0.25)
        self.empty = KernelParams(p=4.0, q=4.0)

    def test_chi_pq_empty_window(self):
        """Test that chi_pp vanishes identically."""
        eta = np.linspace(-10.0, 10.0, 201)
        assert np.all(self.service.chi_pq(eta, 4.0, 4.0) == 0.0)

    def test_chi_pq_support(self):
        """Test that the window lives in (-p - 1, -q)."""
        eta = np.linspace(-12.0, 2.0, 561)
        window = self.service.chi_pq(eta, 8.0, 4.0)
        assert np.all(window[(eta <= -9.0) | (eta >= -4.0)] == 0.0)
        assert np.max(window) == pytest.approx(1.0)

    def test_kernel_params_order(self):
        """Test that p below q is rejected."""
        with pytest.raises(ValidationError):
            KernelParams(p=4.0, q=8.0)

    def test_eval_kernel_outside_support(self):
        """Test the factor 1_{(x, 1)}(x')."""
        assert self.service.eval_kernel(self.params, 0.5, 0.0, 0.4, 0.0) == 0j
        assert self.service.eval_kernel(self.params, 0.5, 0.0, 1.2, 0.0) == 0j
        assert self.service.eval_kernel(self.empty, 0.2, 0.0, 0.5, 0.0) == 0j

    def test_eval_kernel_converged(self):
        """Test that refining the eta rule does not move the value."""
        coarse = self.service.eval_kernel(self.params, 0.3, 0.4, 0.6, -0.1)
        fine = self.service.eval_kernel(self.params, 0.3, 0.4, 0.6, -0.1, refine=2)
        assert abs(coarse) > 0
        assert abs(coarse - fine) < 1e-10 * abs(fine)

    def test_l1_norm_empty(self):
        """Test that the empty window has zero norm."""
        assert self.service.l1_norm(self.empty, 0.9, 0.0) == 0.0
        assert self.service.l1_norm(self.params, 0.9, 0.0) > 0.0

    def test_region_split_adds_up(self):
        """Test that the three regions reproduce the direct integral."""
        split = self.service.region_split(self.params, 0.5, 0.9, 0.0)
        assert split.d == pytest.approx(0.9**2 - 0.5**2)
        assert all(region >= 0.0 for region in split.regions)
        assert split.total == pytest.approx(split.direct, rel=1e-5)

    def test_region_split_arguments(self):
        """Test that x must lie below x'."""
        with pytest.raises(ValueError):
            self.service.region_split(self.params, 0.9, 0.5, 0.0)

    def test_pointwise_bounds(self):
        """Test that the fitted constants hold on an independent held-out draw."""
        report = self.service.verify_pointwise_bounds(self.params, sample_points=400, seed=3)
        assert 0 < report.samples <= 400
        assert 0 < report.holdout_samples <= 400
        assert report.total_violations == 0
        assert all(c > 0 for c in report.constants)
        assert all(0.0 < e <= self.service.config.bound_margin for e in report.holdout_excess)

    def test_undersized_constants_are_violated(self):
        """Test that halving the fitted constants produces violations on a fresh draw."""
        report = self.service.verify_pointwise_bounds(self.params, sample_points=400, seed=3)
        halved = [c / 2.0 for c in report.constants]
        violations = self.service.count_violations(self.params, halved, sample_points=400, seed=11)
        assert all(count > 0 for count in violations)
        zero = self.service.count_violations(self.params, [0.0, 0.0, 0.0], sample_points=100, seed=11)
        assert zero[0] > 0 and len(set(zero)) == 1

    def test_count_violations_arguments(self):
        """Test that three constants are required."""
        with pytest.raises(ValueError):
            self.service.count_violations(self.params, [1.0, 1.0])

    def test_second_bound_ratio_vanishes_at_large_separation(self):
        """Test that |K| (2s + d)^2 e^{qd/2} decays along |y - y'| at fixed x < x'."""
        params = KernelParams(p=32.0, q=16.0, delta=0.25)
        windows = [(8.0, 16.0), (16.0, 32.0), (32.0, 64.0)]
        envelope = []
        for a, b in windows:
            ratios = self.service.bound_ratios(params, 0.3, 0.6, np.linspace(a, b, 33))
            assert ratios.shape == (3, 33)
            envelope.append(float(np.max(ratios[2])))
        assert envelope[0] > envelope[1] > envelope[2]
        assert envelope[2] < 0.1 * envelope[0]

    def test_bound_ratios_arguments(self):
        """Test that x must lie below x' inside (0, 1)."""
        with pytest.raises(ValueError):
            self.service.bound_ratios(self.params, 0.6, 0.3, [1.0])
        assert np.all(self.service.bound_ratios(self.empty, 0.3, 0.6, [1.0, 2.0]) == 0.0)

    def test_kernel_translation_invariant_in_y(self):
        """Test that K depends on y and y' only through y - y'."""
        base = self.service.eval_kernel(self.params, 0.3, 0.4, 0.6, -0.1)
        for shift in (-1.3, 0.25, 1.7):
            moved = self.service.eval_kernel(self.params, 0.3, 0.4 + shift, 0.6, -0.1 + shift)
            assert abs(moved - base) <= 1e-12 * abs(base)

    def test_kernel_decreases_with_q(self):
        """Test that raising q at fixed p shrinks |K| on the diagonal and the L1 norm."""
        values = [
            abs(self.service.eval_kernel(KernelParams(p=32.0, q=q), 0.3, 0.0, 0.6, 0.0)) for q in (8.0, 16.0, 24.0)
        ]
        norms = [self.service.l1_norm(KernelParams(p=32.0, q=q), 0.9, 0.0) for q in (8.0, 16.0, 24.0)]
        assert values[0] > values[1] > values[2] > 0
        assert norms[0] > norms[1] > norms[2] > 0

    def test_pointwise_bounds_sample_size(self):
        """Test the minimum sample size."""
        with pytest.raises(ValueError):
            self.service.verify_pointwise_bounds(self.params, sample_points=50)

    def test_decay_study_rows(self):
        """Test the table layout of a small decay study."""
        table = self.service.decay_study([4.0, 8.0], samples=64, seed=1)
        assert [row.p for row in table.rows] == [4.0, 8.0]
        assert [row.q for row in table.rows] == [2.0, 4.0]
        for row in table.rows:
            assert row.samples == 64 + 3
            assert row.sup_l1 > 0
            assert 0.0 < row.x_prime < 1.0

    def test_decay_study_arguments(self):
        """Test ratio, ordering and sample checks."""
        with pytest.raises(ValueError):
            self.service.decay_study([4.0, 8.0], ratio=1.5, samples=64)
        with pytest.raises(ValueError):
            self.service.decay_study([8.0, 4.0], samples=64)
        with pytest.raises(ValueError):
            self.service.decay_study([4.0, 8.0], samples=32)

    def test_decay_study_strictly_decreasing(self):
        """Test that the sampled sup of the L1 norm falls as p doubles."""
        table = self.service.decay_study([4.0, 8.0, 16.0], delta=0.0, samples=64, seed=2)
        norms = [row.sup_l1 for row in table.rows]
        assert norms[0] > norms[1] > norms[2] > 0
