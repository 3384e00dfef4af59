"""
Solver service: Grushin equation, the complex operator P, the polarized
reduction, the cofactor system and the regularity-gain probe.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.fft
import scipy.sparse
import scipy.sparse.linalg

from hypolab.core.config import Settings, settings
from hypolab.core.exceptions import MicrolocalizationError, SingularSystemError
from hypolab.core.logging import logger
from hypolab.models.fields import GridField
from hypolab.models.operators import DiffOpMatrix
from hypolab.schemas.grid import Box, MeasureSpec, MultiplierSpec, Region
from hypolab.schemas.outputs.solvers import (
    GainProfile,
    GainProfileRow,
    RegularityProbeReport,
    SolveResult,
)
from hypolab.schemas.solvers import GrushinSolveParams, PolarizedInput, ProbeOperator
from hypolab.services.algebra_service import AlgebraService
from hypolab.services.grid_service import GridService, NormKind
from hypolab.utils import catalog
from hypolab.utils.parsing import parse_operator


def _relative(numerator: float, denominator: float) -> float:
    return numerator / denominator if denominator > 0 else numerator


class SolverService:
    """Service class for the per-frequency and spectral solvers."""

    def __init__(self, config: Settings = settings):
        self.config = config
        self.threads = max(1, config.threads)
        self.grid = GridService(config)
        self.algebra = AlgebraService(config)
        self.grushin_op = catalog.grushin()
        self.p_op = catalog.p_operator()
        self.system_a = catalog.first_order_system()
        self.hypo_system = catalog.hypo_system()

    # ------------------------------------------------------------------
    # Grushin

    def solve_grushin(
        self, f: GridField, params: Optional[GrushinSolveParams] = None
    ) -> SolveResult:
        """
        Solve G u = f: FFT in y, periodic second-order finite differences in x.

        Args:
            f: Forcing
            params: Gauge and boundary choices (zero-mean, periodic)

        Returns:
            SolveResult with u, the spectral residual of G u against the
            mean-free forcing, and the projected mean as gauge_deviation

        Raises:
            SingularSystemError: If a per-frequency system cannot be factored
        """
        params = params or GrushinSolveParams()
        box = f.box
        x = box.x_nodes()
        h = box.dx
        spectrum = scipy.fft.fft(f.values, axis=1, workers=self.threads)
        out = np.zeros_like(spectrum)

        out[:, 0], mean = self._solve_zero_slice(spectrum[:, 0], box)

        groups = self._frequency_groups(box)
        ky = box.ky()

        def solve_group(indices: List[int]) -> np.ndarray:
            return self._solve_periodic_tridiagonal(x, h, ky[indices[0]] ** 2, spectrum[:, indices])

        with ThreadPoolExecutor(max_workers=self.threads) as executor:
            for indices, solution in zip(groups, executor.map(solve_group, groups)):
                out[:, indices] = solution

        u = GridField(box, scipy.fft.ifft(out, axis=1, workers=self.threads))
        forcing = f - GridField(box, np.full(box.shape, mean))
        residual = self._residual(DiffOpMatrix.from_scalar(self.grushin_op), [u], [forcing])
        deviation = abs(mean)
        if deviation > 1e-12 * max(float(np.max(np.abs(f.values))), 1.0):
            logger.warning(f"solve_grushin: projected out mean {deviation:.3e} ({params.gauge.value} gauge)")
        logger.debug(f"solve_grushin on {box.shape}: residual {residual:.3e}")
        return SolveResult(fields=[u], residual=residual, diagnostics={"gauge_deviation": deviation})

    @staticmethod
    def _frequency_groups(box: Box) -> List[List[int]]:
        """Index groups sharing eta^2 (m and -m), excluding eta = 0."""
        n = box.ny
        groups = [[m, n - m] for m in range(1, n // 2)]
        groups.append([n // 2])
        return groups

    def _solve_zero_slice(self, rhs: np.ndarray, box: Box) -> Tuple[np.ndarray, complex]:
        """u'' = rhs on the periodic x-grid with the FD eigenvalues; mean set to zero."""
        h = box.dx
        coefficients = scipy.fft.fft(rhs, workers=self.threads)
        mean = coefficients[0] / (box.nx * box.ny)
        eigenvalues = -(4.0 / h**2) * np.sin(box.kx() * h / 2) ** 2
        eigenvalues[0] = 1.0
        solution = coefficients / eigenvalues
        solution[0] = 0.0
        return scipy.fft.ifft(solution, workers=self.threads), complex(mean)

    @staticmethod
    def _solve_periodic_tridiagonal(
        x: np.ndarray, h: float, eta2: float, rhs: np.ndarray
    ) -> np.ndarray:
        n = len(x)
        off = np.full(n - 1, 1.0 / h**2)
        main = -2.0 / h**2 - x**2 * eta2
        matrix = scipy.sparse.diags([off, main, off], [-1, 0, 1], format="lil")
        matrix[0, n - 1] = 1.0 / h**2
        matrix[n - 1, 0] = 1.0 / h**2
        try:
            lu = scipy.sparse.linalg.splu(matrix.tocsc())
        except RuntimeError as e:
            raise SingularSystemError(f"tridiagonal system singular at eta^2={eta2:.4g}: {e}")
        k = rhs.shape[1]
        solution = lu.solve(np.ascontiguousarray(np.hstack([rhs.real, rhs.imag])))
        if not np.all(np.isfinite(solution)):
            raise SingularSystemError(f"non-finite solution at eta^2={eta2:.4g}")
        return solution[:, :k] + 1j * solution[:, k:]

    # ------------------------------------------------------------------
    # P = dx - i x dy

    def solve_p(
        self,
        F: GridField,
        delta: float,
        leak_tolerance: float = 1e-10,
        quadrature_nodes: int = 8,
    ) -> SolveResult:
        """
        Solve (dx + x eta) nu_hat = |eta|^delta <eta>^(-delta) F_hat for eta < 0.

        Each eta-slice is integrated with the exact integrating factor
        exp(x^2 eta / 2), sweeping from the right edge for x >= 0 and from the
        left edge for x < 0 so that the factor always decays. Cell integrals
        use Gauss-Legendre nodes with spectral interpolation in x.

        Args:
            F: Forcing with spectrum in {eta < 0}
            delta: Order in [0, 1/2)
            leak_tolerance: Allowed relative energy of F at eta >= 0
            quadrature_nodes: Gauss-Legendre nodes per cell

        Returns:
            SolveResult with nu; residual is P nu against the multiplied forcing

        Raises:
            MicrolocalizationError: If F carries energy at eta >= 0
        """
        if not 0.0 <= delta < 0.5:
            raise ValueError("delta must lie in [0, 1/2)")
        box = F.box
        ky = box.ky()
        spectrum = scipy.fft.fft(F.values, axis=1, workers=self.threads)
        energy = np.abs(spectrum) ** 2
        total = float(np.sum(energy))
        leak = float(np.sum(energy[:, ky >= 0]))
        if total > 0 and leak > leak_tolerance * total:
            raise MicrolocalizationError(
                f"forcing has relative energy {leak / total:.3e} at eta >= 0"
            )

        # |eta|^delta <D_y>^(-delta) restricted to eta < 0
        bracket = MultiplierSpec.bracket_y(-delta).evaluate(np.zeros_like(ky), ky)
        factor = np.where(ky < 0, np.abs(ky) ** delta * bracket, 0.0)
        forcing_hat = spectrum * factor[None, :]
        nu_hat = self._integrate_p(box, forcing_hat, ky, quadrature_nodes)

        nu = GridField(box, scipy.fft.ifft(nu_hat, axis=1, workers=self.threads))
        rhs = GridField(box, scipy.fft.ifft(forcing_hat, axis=1, workers=self.threads))
        residual = self._residual(DiffOpMatrix.from_scalar(self.p_op), [nu], [rhs])
        deviation = _relative(
            self.grid.norm(rhs - F, NormKind.L2), self.grid.norm(F, NormKind.L2)
        )
        logger.debug(f"solve_p delta={delta}: residual {residual:.3e}")
        return SolveResult(
            fields=[nu],
            residual=residual,
            diagnostics={
                "forcing_deviation": deviation,
                "spectral_leak": leak / total if total > 0 else 0.0,
            },
        )

    def _integrate_p(
        self, box: Box, forcing_hat: np.ndarray, eta: np.ndarray, nodes: int
    ) -> np.ndarray:
        n = box.nx
        x = box.x_nodes()
        h = box.dx
        kx = box.kx()
        t, w = np.polynomial.legendre.leggauss(nodes)
        offsets = h * (t + 1.0) / 2.0
        weights = h * w / 2.0

        negative = eta < 0
        eta_n = eta[negative]
        g_k = scipy.fft.fft(forcing_hat[:, negative], axis=0, workers=self.threads)

        def shifted(c: float) -> np.ndarray:
            # forcing at x_j + c on every slice, by spectral interpolation
            return scipy.fft.ifft(g_k * np.exp(1j * kx * c)[:, None], axis=0, workers=self.threads)

        right = [shifted(c) for c in offsets]
        left = [shifted(-c) for c in offsets]

        nu = np.zeros((n, len(eta_n)), dtype=complex)
        origin = n // 2
        x_next = np.append(x[1:], box.lx / 2)

        carry = np.zeros(len(eta_n), dtype=complex)
        for j in range(n - 1, origin - 1, -1):
            decay = np.exp((x_next[j] ** 2 - x[j] ** 2) * eta_n / 2)
            cell = sum(
                weights[q] * np.exp(((x[j] + offsets[q]) ** 2 - x[j] ** 2) * eta_n / 2) * right[q][j]
                for q in range(nodes)
            )
            carry = decay * carry - cell
            nu[j] = carry

        carry = np.zeros(len(eta_n), dtype=complex)
        for j in range(1, origin):
            decay = np.exp((x[j - 1] ** 2 - x[j] ** 2) * eta_n / 2)
            cell = sum(
                weights[q] * np.exp(((x[j] - offsets[q]) ** 2 - x[j] ** 2) * eta_n / 2) * left[q][j]
                for q in range(nodes)
            )
            carry = decay * carry + cell
            nu[j] = carry

        out = np.zeros_like(forcing_hat)
        out[:, negative] = nu
        return out

    # ------------------------------------------------------------------
    # Polarized reduction and the cofactor system

    def polarized_reduction(self, inp: PolarizedInput) -> SolveResult:
        """
        Recover v from A(lambda v) = f through Delta v = dx a + dxy b - x dy^2 a.

        Here a = l1 f1 + l2 f2 (equal to dx v) and b = l2 f1 - l1 f2 (equal to
        x dy v) for consistent input; both consistency residuals are reported.
        """
        l1, l2 = inp.lam
        a = inp.f1 * l1 + inp.f2 * l2
        b = inp.f1 * l2 - inp.f2 * l1
        apply = self.grid.apply_scalar
        rhs = (
            apply(parse_operator("dx").op, a)
            + apply(parse_operator("dx*dy").op, b)
            - apply(parse_operator("x*dy^2").op, a)
        )
        v, mean = self.grid.laplacian_inverse(rhs)
        res_a = _relative(
            self.grid.norm(apply(parse_operator("dx").op, v) - a, NormKind.L2),
            self.grid.norm(a, NormKind.L2),
        )
        res_b = _relative(
            self.grid.norm(apply(parse_operator("x*dy").op, v) - b, NormKind.L2),
            self.grid.norm(b, NormKind.L2),
        )
        logger.debug(f"polarized_reduction: residuals {res_a:.3e}, {res_b:.3e}")
        return SolveResult(
            fields=[v],
            residual=max(res_a, res_b),
            diagnostics={"residual_dx": res_a, "residual_xdy": res_b, "gauge_deviation": abs(mean)},
        )

    def solve_hypo_system(self, f1: GridField, f2: GridField) -> SolveResult:
        """
        Solve S u = f for S = [[dx, dy], [-x^2 dy, dx]] by cofactor reduction.

        adj(S) o S is lower triangular with G on the diagonal, so u1 solves a
        Grushin equation and u2 a second one with the coupling term moved to
        the right-hand side. The coupling entry is taken from the symbolic
        cofactor product.

        Returns:
            SolveResult with fields [u1, u2] and the residual of S u = f
        """
        product = self.algebra.cofactor_product(self.hypo_system)
        if (
            product.entry(0, 0) != self.grushin_op
            or product.entry(1, 1) != self.grushin_op
            or not product.entry(0, 1).is_zero
        ):
            raise SingularSystemError("cofactor product is not triangular with G on the diagonal")
        coupling = product.entry(1, 0)
        adj = self.algebra.adjugate(self.hypo_system)
        rhs1, rhs2 = self.grid.apply_diffop(adj, [f1, f2])

        first = self.solve_grushin(rhs1)
        u1 = first.field
        second = self.solve_grushin(rhs2 - self.grid.apply_scalar(coupling, u1))
        u2 = second.field

        residual = self._residual(self.hypo_system, [u1, u2], [f1, f2])
        logger.info(f"solve_hypo_system: residual {residual:.3e}")
        return SolveResult(
            fields=[u1, u2],
            residual=residual,
            diagnostics={
                "gauge_deviation_u1": first.diagnostics["gauge_deviation"],
                "gauge_deviation_u2": second.diagnostics["gauge_deviation"],
            },
        )

    def solve_laplacian(self, f: GridField) -> SolveResult:
        u, mean = self.grid.laplacian_inverse(f)
        forcing = f - GridField(f.box, np.full(f.box.shape, mean))
        residual = self._residual(
            DiffOpMatrix.from_scalar(catalog.laplacian()), [u], [forcing]
        )
        return SolveResult(fields=[u], residual=residual, diagnostics={"gauge_deviation": abs(mean)})

    def energy_gain(self, f: GridField) -> Tuple[float, float]:
        """(||u||_H1, ||f||_L2) for G u = f."""
        u = self.solve_grushin(f).field
        return self.grid.norm(u, NormKind.HS, s=1.0), self.grid.norm(f, NormKind.L2)

    def polarized_gain_profile(
        self,
        lam: Tuple[float, float],
        frequencies: Sequence[float] = (2.0, 4.0, 8.0, 16.0),
        box: Optional[Box] = None,
    ) -> GainProfile:
        """
        Norm ratios of v against f = A(lambda v) for v_k = e^{-k x^2/2} e^{-y^2/2} sin(k y).

        The L2 ratio stays bounded while the H1 ratio grows, so the system
        does not gain a full derivative in L2.
        """
        box = box or Box.square(4 * np.pi, 256)
        rows = []
        for k in frequencies:
            v = GridField.from_function(
                box, lambda X, Y: np.exp(-k * X**2 / 2) * np.exp(-(Y**2) / 2) * np.sin(k * Y)
            )
            f1, f2 = self.grid.apply_diffop(self.system_a, [v * lam[0], v * lam[1]])
            result = self.polarized_reduction(PolarizedInput(**{"lambda": lam, "f1": f1, "f2": f2}))
            f_norm = np.hypot(self.grid.norm(f1, NormKind.L2), self.grid.norm(f2, NormKind.L2))
            rows.append(
                GainProfileRow(
                    frequency=float(k),
                    l2_ratio=self.grid.norm(result.field, NormKind.L2) / f_norm,
                    h1_ratio=self.grid.norm(result.field, NormKind.HS, s=1.0) / f_norm,
                    residual=result.residual,
                )
            )
        exponent = float(
            np.polyfit(np.log([r.frequency for r in rows]), np.log([r.h1_ratio for r in rows]), 1)[0]
        )
        logger.info(f"polarized_gain_profile: H1 ratio exponent {exponent:.3f}")
        return GainProfile(rows=rows, h1_exponent=exponent)

    # ------------------------------------------------------------------
    # Regularity probe

    def regularity_probe(
        self,
        op: ProbeOperator,
        spec: MeasureSpec,
        s: float,
        widths: Sequence[float],
        box: Optional[Box] = None,
        region: Optional[Region] = None,
        exploratory: bool = False,
    ) -> RegularityProbeReport:
        """
        Track local W^{s,1}-type norms of op^{-1} applied to a shrinking measure.

        Args:
            op: grushin, p_operator (fed with conical piece 3) or laplacian
            spec: Measure family; its width is replaced by each entry of widths
            s: Smoothness index, s >= 0
            widths: Strictly decreasing mollification widths
            box: Periodic box (defaults to the probe box from settings)
            region: Localization (defaults to the unit disc)
            exploratory: Mark the report as informational only

        Returns:
            Report with the fitted slope of log-norm against log(1/w)
        """
        op = ProbeOperator(op)
        if s < 0:
            raise ValueError("s must be non-negative")
        box = box or Box.square(self.config.probe_length, self.config.probe_points)
        region = region or Region.unit_disc()

        norms = []
        for w in widths:
            forcing = self.grid.realize_measure(spec.with_width(w), box)
            u = self._probe_solve(op, forcing)
            norms.append(self.grid.norm(u, NormKind.WS1, s=s, region=region))
            logger.debug(f"regularity_probe {op.value} s={s} w={w}: norm {norms[-1]:.6g}")

        slope = float(np.polyfit(np.log(1.0 / np.asarray(widths)), np.log(norms), 1)[0])
        bounded = slope < self.config.bounded_slope
        logger.info(f"regularity_probe {op.value} s={s}: slope {slope:.4f} (bounded={bounded})")
        return RegularityProbeReport(
            operator=op.value,
            measure=spec.kind.value,
            s=s,
            widths=list(widths),
            norms=norms,
            fitted_exponent=slope,
            bounded=bounded,
            exploratory=exploratory,
        )

    def _probe_solve(self, op: ProbeOperator, forcing: GridField) -> GridField:
        if op == ProbeOperator.LAPLACIAN:
            return self.grid.laplacian_inverse(forcing)[0]
        if op == ProbeOperator.GRUSHIN:
            return self.solve_grushin(forcing).field
        piece = self.grid.conical_partition(forcing)[3]
        return self.solve_p(piece, 0.0).field

    # ------------------------------------------------------------------

    def _residual(
        self, op: DiffOpMatrix, solution: Sequence[GridField], forcing: Sequence[GridField]
    ) -> float:
        image = self.grid.apply_diffop(op, solution)
        error = np.sqrt(sum(self.grid.norm(a - b, NormKind.L2) ** 2 for a, b in zip(image, forcing)))
        scale = np.sqrt(sum(self.grid.norm(b, NormKind.L2) ** 2 for b in forcing))
        return float(_relative(error, scale))
