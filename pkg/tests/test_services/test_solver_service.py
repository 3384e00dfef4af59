"""
Unit tests for the solver service.
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import integrate

from hypolab.core.exceptions import MicrolocalizationError
from hypolab.models.fields import GridField
from hypolab.models.operators import DiffOpMatrix
from hypolab.schemas.grid import Box, MeasureKind, MeasureSpec
from hypolab.schemas.solvers import PolarizedInput, ProbeOperator
from hypolab.services.grid_service import GridService, NormKind
from hypolab.services.solver_service import SolverService
from hypolab.utils import catalog


class TestSolverService:
    """Test cases for SolverService."""

    def setup_method(self):
        """Set up services and a 4 pi box with a decaying odd profile."""
        self.service = SolverService()
        self.grid = GridService()
        self.box = Box.square(4 * math.pi, 128)
        self.v = GridField.from_function(self.box, lambda X, Y: X * np.exp(-(X**2 + Y**2) / 2))

    def relative_error(self, approx: GridField, exact: GridField) -> float:
        return self.grid.norm(approx - exact, NormKind.L2) / self.grid.norm(exact, NormKind.L2)

    def test_solve_grushin_manufactured(self):
        """Test the Grushin solver against a manufactured solution at N = 256."""
        box = Box.square(4 * math.pi, 256)
        v = GridField.from_function(box, lambda X, Y: X * np.exp(-(X**2 + Y**2) / 2))
        (f,) = self.grid.apply_diffop(DiffOpMatrix.from_scalar(catalog.grushin()), [v])
        result = self.service.solve_grushin(f)
        assert self.relative_error(result.field, v) <= 2e-3
        assert result.diagnostics["gauge_deviation"] < 1e-10

    def test_solve_grushin_second_order(self):
        """Test that doubling the resolution cuts the error by about four."""
        errors = []
        for n in (64, 128):
            box = Box.square(4 * math.pi, n)
            v = GridField.from_function(box, lambda X, Y: X * np.exp(-(X**2 + Y**2) / 2))
            (f,) = self.grid.apply_diffop(DiffOpMatrix.from_scalar(catalog.grushin()), [v])
            errors.append(self.relative_error(self.service.solve_grushin(f).field, v))
        assert 3.0 < errors[0] / errors[1] < 5.0

    def test_solve_grushin_projects_mean(self):
        """Test the zero-mean gauge on constant forcing."""
        f = GridField(self.box, np.full(self.box.shape, 2.0))
        result = self.service.solve_grushin(f)
        assert result.diagnostics["gauge_deviation"] == pytest.approx(2.0)
        assert np.max(np.abs(result.field.values)) < 1e-10

    def test_solve_p_manufactured(self):
        """Test the P solver on a field microlocalized in eta < 0."""
        nu = GridField.from_function(
            self.box, lambda X, Y: np.exp(-(X**2 + Y**2) / 2) * np.exp(-8j * Y)
        )
        (forcing,) = self.grid.apply_diffop(DiffOpMatrix.from_scalar(catalog.p_operator()), [nu])
        result = self.service.solve_p(forcing, 0.0)
        assert self.relative_error(result.field, nu) < 2e-3
        assert result.diagnostics["spectral_leak"] < 1e-10

    def test_solve_p_rejects_positive_frequencies(self):
        """Test that forcing with eta >= 0 energy is refused."""
        f = GridField.from_function(self.box, lambda X, Y: np.exp(-(X**2 + Y**2) / 2))
        with pytest.raises(MicrolocalizationError):
            self.service.solve_p(f, 0.0)

    def test_solve_p_rejects_delta(self):
        """Test the order range."""
        with pytest.raises(ValueError):
            self.service.solve_p(self.v, 0.5)

    def test_polarized_reduction_round_trip(self):
        """Test that v is recovered from A(lambda v)."""
        lam = (0.6, 0.8)
        f1, f2 = self.grid.apply_diffop(catalog.first_order_system(), [self.v * lam[0], self.v * lam[1]])
        result = self.service.polarized_reduction(PolarizedInput(**{"lambda": lam, "f1": f1, "f2": f2}))
        assert self.relative_error(result.field, self.v) < 1e-6
        assert result.residual < 1e-6

    def test_polarized_input_needs_unit_lambda(self):
        """Test that lambda must be a unit vector."""
        with pytest.raises(ValidationError):
            PolarizedInput(**{"lambda": (1.0, 1.0), "f1": self.v, "f2": self.v})

    def test_solve_hypo_system_manufactured(self):
        """Test the cofactor solver against a manufactured pair at N = 256."""
        box = Box.square(4 * math.pi, 256)
        X, Y = box.coordinates()
        gauss = np.exp(-(X**2 + Y**2) / 2)
        exact = [GridField(box, X * gauss), GridField(box, Y * gauss)]
        forcing = self.grid.apply_diffop(catalog.hypo_system(), exact)
        result = self.service.solve_hypo_system(*forcing)
        assert len(result.fields) == 2
        for solved, expected in zip(result.fields, exact):
            assert self.relative_error(solved, expected) <= 5e-3

    def test_solve_laplacian(self):
        """Test the spectral Laplacian solve."""
        (f,) = self.grid.apply_diffop(DiffOpMatrix.from_scalar(catalog.laplacian()), [self.v])
        result = self.service.solve_laplacian(f)
        assert self.relative_error(result.field, self.v) < 1e-8

    def test_energy_gain(self):
        """Test the H1 / L2 pair for G u = f."""
        f = self.grid.realize_measure(MeasureSpec(kind=MeasureKind.POINT_ATOM, width=0.5), self.box)
        h1, l2 = self.service.energy_gain(f)
        assert h1 > 0 and l2 > 0

    def test_polarized_gain_profile(self):
        """Test bounded L2 ratios and growing H1 ratios."""
        profile = self.service.polarized_gain_profile((0.6, 0.8), (2.0, 4.0, 8.0), self.box)
        assert [row.frequency for row in profile.rows] == [2.0, 4.0, 8.0]
        assert all(row.l2_ratio <= 1.0 for row in profile.rows)
        h1 = [row.h1_ratio for row in profile.rows]
        assert h1[0] < h1[1] < h1[2]
        assert profile.h1_exponent > 0

    def test_regularity_probe_elliptic_failure(self):
        """Test that Delta^{-1} of an atom is not bounded in W^{2.5,1}."""
        box = Box.square(2 * math.pi, 64)
        atom = MeasureSpec(kind=MeasureKind.POINT_ATOM, width=0.8)
        report = self.service.regularity_probe(ProbeOperator.LAPLACIAN, atom, 2.5, [0.8, 0.4, 0.2], box)
        assert report.operator == "laplacian"
        assert len(report.norms) == 3
        assert report.norms[0] < report.norms[1] < report.norms[2]
        assert not report.bounded

    def test_regularity_probe_rejects_negative_s(self):
        """Test that s must be non-negative."""
        atom = MeasureSpec(kind=MeasureKind.POINT_ATOM, width=0.4)
        with pytest.raises(ValueError):
            self.service.regularity_probe(ProbeOperator.GRUSHIN, atom, -0.1, [0.4, 0.2])

    def test_solve_grushin_linear(self):
        """Test that the solution map is linear at a fixed gauge."""
        (f,) = self.grid.apply_diffop(DiffOpMatrix.from_scalar(catalog.grushin()), [self.v])
        g = self.grid.realize_measure(MeasureSpec(kind=MeasureKind.POINT_ATOM, width=0.5), self.box)
        combined = self.service.solve_grushin(f * 2.0 + g * (-0.5j)).field
        separate = self.service.solve_grushin(f).field * 2.0 + self.service.solve_grushin(g).field * (-0.5j)
        assert self.grid.norm(combined - separate, NormKind.L2) <= 1e-10 * self.grid.norm(separate, NormKind.L2)

    def test_solve_grushin_single_mode_stays_single(self):
        """Test that a forcing on one y-mode produces a solution on that mode only."""
        ky = self.box.ky()
        m = int(np.argmin(np.abs(ky - 1.0)))
        f = GridField.from_function(self.box, lambda X, Y: np.exp(-(X**2)) * np.exp(1j * ky[m] * Y))
        u = self.service.solve_grushin(f).field
        slices = np.abs(np.fft.fft(u.values, axis=1))
        others = np.delete(slices, m, axis=1)
        assert np.max(slices[:, m]) > 0
        assert np.max(others) <= 1e-12 * np.max(slices[:, m])

    def test_solvers_map_zero_to_zero(self):
        """Test that zero forcing gives the zero solution."""
        zero = GridField(self.box, np.zeros(self.box.shape))
        assert np.all(self.service.solve_grushin(zero).field.values == 0)
        assert np.all(self.service.solve_p(zero, 0.25).field.values == 0)

    def test_polarized_reduction_axis_lambda(self):
        """Test lambda = (1, 0): f1 = dx v, f2 = -x dy v recovers v."""
        f1, f2 = self.grid.apply_diffop(catalog.first_order_system(), [self.v, self.v * 0.0])
        result = self.service.polarized_reduction(PolarizedInput(**{"lambda": (1.0, 0.0), "f1": f1, "f2": f2}))
        assert self.relative_error(result.field, self.v) < 1e-6
        assert result.diagnostics["residual_dx"] < 1e-6
        assert result.diagnostics["residual_xdy"] < 1e-6

    def test_solve_p_single_mode_matches_integral(self):
        """Test one eta-slice against the integrating-factor integral done by adaptive quadrature."""
        ky = self.box.ky()
        m = int(np.argmin(np.abs(ky + 2.0)))
        eta, c, half = ky[m], 1.5, self.box.lx / 2
        forcing = GridField.from_function(self.box, lambda X, Y: c * np.exp(1j * eta * Y))
        nu = self.service.solve_p(forcing, 0.0).field
        slices = np.fft.fft(nu.values, axis=1) / self.box.ny
        others = np.delete(np.abs(slices), m, axis=1)
        assert np.max(others) <= 1e-12 * np.max(np.abs(slices[:, m]))

        def kernel(t: float, x: float) -> float:
            return math.exp((t**2 - x**2) * eta / 2)

        for j, x in enumerate(self.box.x_nodes()):
            if x >= 0:
                expected = -c * integrate.quad(kernel, x, half, args=(x,), epsabs=1e-13, epsrel=1e-12)[0]
            else:
                expected = c * integrate.quad(kernel, -half, x, args=(x,), epsabs=1e-13, epsrel=1e-12)[0]
            assert abs(slices[j, m] - expected) < 1e-8

    def test_regularity_probe_grushin_bounded(self):
        """Test that G^{-1} of a shrinking atom stays bounded in W^{0.45,1} of the unit disc."""
        box = Box.square(2 * math.pi, 256)
        atom = MeasureSpec(kind=MeasureKind.POINT_ATOM, width=0.4)
        report = self.service.regularity_probe(ProbeOperator.GRUSHIN, atom, 0.45, [0.4, 0.2, 0.1, 0.05], box)
        assert report.fitted_exponent <= 0.1
        assert report.bounded
