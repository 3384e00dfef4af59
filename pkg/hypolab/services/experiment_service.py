"""
Experiment runner: named experiments, stored acceptance checks, report
persistence and verification.
"""

import math
import time
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from dotenv import dotenv_values
from pydantic import BaseModel, ValidationError

from hypolab.core.config import Settings, settings
from hypolab.core.exceptions import ConfigError, ExperimentError
from hypolab.core.logging import logger
from hypolab.models.fields import GridField
from hypolab.models.operators import ETA, XI, DiffOp, DiffOpMatrix, SymbolPoly, X
from hypolab.schemas.experiments import ExperimentConfig, ExperimentName
from hypolab.schemas.grid import Box, MeasureKind, MeasureSpec
from hypolab.schemas.kernels import KernelParams
from hypolab.schemas.outputs.experiments import (
    Check,
    Comparison,
    ExperimentReport,
    Reduction,
    StepRecord,
    TableRef,
    VerificationReport,
)
from hypolab.schemas.outputs.wavefront import ScanReport
from hypolab.schemas.singular import (
    ChiSpec,
    CounterexampleSolution,
    TestFunctionKind,
    TestFunctionSpec,
)
from hypolab.schemas.solvers import PolarizedInput, ProbeOperator
from hypolab.services.algebra_service import AlgebraService
from hypolab.services.grid_service import GridService, NormKind
from hypolab.services.kernel_service import KernelService
from hypolab.services.singular_service import EvalMethod, SingularService
from hypolab.services.solver_service import SolverService
from hypolab.services.wavefront_service import WavefrontService
from hypolab.utils import catalog
from hypolab.utils.plotting import PlotKind, emit_plot, field_table, loglog_slope
from hypolab.utils.serialization import (
    check_manifest,
    read_json,
    read_table_csv,
    save_field,
    write_json_atomic,
    write_manifest,
    write_table_csv,
)

REPORT_NAME = "report.json"

PROBE_WIDTHS = (0.4, 0.2, 0.1, 0.05)
GRUSHIN_ORDERS = (0.0, 0.25, 0.45)
ELLIPTIC_CONTROL_ORDER = 1.5
ELLIPTIC_FAILURE_ORDER = 2.5
P_GAIN_ORDERS = (0.0, 0.4)
EXPLORATORY_ORDERS = (0.6, 0.75)
DECAY_P_LIST = (4.0, 8.0, 16.0, 32.0, 64.0)
DECAY_RATIO = 0.5
BOUND_SAMPLES = 1000
GROWTH_CUTOFFS = (5.0, 10.0, 20.0, 40.0, 80.0)
TRACE_CUTOFF = 20.0
POLARIZATION = (0.6, 0.8)
GAIN_FREQUENCIES = (2.0, 4.0, 8.0, 16.0)

# Manufactured solutions live on a 4 pi box so that 256 nodes resolve the
# second-order x-discretization to the required accuracy.
MANUFACTURED_LENGTH = 4 * math.pi
MANUFACTURED_POINTS = 256

COUNTEREXAMPLE_CHI = ChiSpec.smooth_bump(1.0, 4.0)
WAVEFRONT_CHI = ChiSpec.smooth_bump(1.0, math.inf, cutoff=48.0)
WAVEFRONT_OFFSETS = (-1.0, -0.5, 0.0, 0.5, 1.0)
WAVEFRONT_BASE_POINTS = tuple((x, y) for x in WAVEFRONT_OFFSETS for y in WAVEFRONT_OFFSETS)
ATOM_CELLS = 4

# Acceptance thresholds
MANUFACTURED_TOLERANCE = 2e-3
HYPO_ROUND_TRIP_TOLERANCE = 5e-3
REDUCTION_TOLERANCE = 1e-6
ORDER_TARGET = 4.0
ORDER_BAND = 0.5
BOUNDED_SLOPE = 0.1
UNBOUNDED_SLOPE = 0.4
RESIDUAL_TOLERANCE = 1e-8
GROWTH_SLOPE = 0.5
GROWTH_BAND = 0.01
TRACE_TOLERANCE = 1e-6
PARITY_TOLERANCE = 1e-10
CHAR_TOLERANCE = 1e-9
REFINEMENT_TOLERANCE = 0.01
H1_STABILITY = 0.05
GAIN_L2_BOUND = 1.0


@dataclass(frozen=True)
class ExperimentInfo:
    handler: str
    claim: str


EXPERIMENTS: Dict[ExperimentName, ExperimentInfo] = {
    ExperimentName.BRACKET_CHECK: ExperimentInfo(
        "_run_bracket_check",
        "[dx, x dy] = dy; bracket rank 2 at step 2 on x = 0; char set of G is {0} x R",
    ),
    ExperimentName.THM1_GAIN: ExperimentInfo(
        "_run_thm1_gain",
        "G mu = f in L1 gives <D>^s mu in L1_loc for s in [0, 1/2); elliptic control",
    ),
    ExperimentName.POLARIZED: ExperimentInfo(
        "_run_polarized",
        "constant polarized A(lambda nu) = f in L1 gives nu in L1_loc, no full L2 gain",
    ),
    ExperimentName.COUNTEREXAMPLE: ExperimentInfo(
        "_run_counterexample",
        "A u = 0 has non-L2 solutions with trace (C delta_0, C~ PV(1/y)) on x = 0",
    ),
    ExperimentName.HYP_SET: ExperimentInfo(
        "_run_hyp_set",
        "{Re p, Im p} = -eta, positive exactly on eta < 0",
    ),
    ExperimentName.KERNEL_DECAY: ExperimentInfo(
        "_run_kernel_decay",
        "pointwise bounds of K_pq and sup ||K_pq||_L1 -> 0",
    ),
    ExperimentName.P_GAIN: ExperimentInfo(
        "_run_p_gain",
        "P nu = F with line-measure forcing gives <D_y>^s nu in L1_loc for s in [0, 1/2)",
    ),
    ExperimentName.HYPO_SYSTEM: ExperimentInfo(
        "_run_hypo_system",
        "cofactor system: f1, f2 in H1 gives u1, u2 in H1",
    ),
    ExperimentName.WAVEFRONT: ExperimentInfo(
        "_run_wavefront",
        "WF_z(mu) and -WF_z(mu) are disjoint for the counterexample, not for an atom",
    ),
}


def _plain(value: Any) -> Any:
    """JSON-ready copy of step data."""
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json")
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def reduce_column(frame: pd.DataFrame, ref: TableRef) -> float:
    """Derive a check value from a stored table column."""
    column = frame[ref.column].to_numpy(dtype=float)
    reduction = Reduction(ref.reduction)
    if reduction == Reduction.FIRST:
        value = column[0]
    elif reduction == Reduction.LAST:
        value = column[-1]
    elif reduction == Reduction.MAX:
        value = np.max(column)
    elif reduction == Reduction.MIN:
        value = np.min(column)
    elif reduction == Reduction.RATIO:
        value = column[0] / column[-1]
    elif reduction == Reduction.LOGLOG_SLOPE:
        value = loglog_slope(frame[ref.x].to_numpy(dtype=float), column)
    elif reduction == Reduction.INCREASING:
        value = float(np.all(np.diff(column) > 0))
    else:
        value = float(np.all(np.diff(column) < 0))
    if ref.target is not None:
        value = abs(value - ref.target)
    return float(value)


class _RunContext:
    """Collects steps, checks and artifacts of one run in its output directory."""

    def __init__(self, directory: Path):
        self.directory = directory
        self.steps: List[StepRecord] = []
        self.checks: List[Check] = []
        self.artifacts: List[str] = []
        self.frames: Dict[str, pd.DataFrame] = {}

    def _emit(self, name: str) -> Path:
        self.artifacts.append(name)
        return self.directory / name

    def table(self, name: str, data: Mapping[str, Sequence[Any]]) -> pd.DataFrame:
        frame = pd.DataFrame(dict(data))
        filename = f"{name}.csv"
        write_table_csv(frame, self._emit(filename))
        self.frames[filename] = frame
        return frame

    def plot(self, name: str, frame: pd.DataFrame, kind: PlotKind, **kwargs) -> None:
        emit_plot(frame, kind, self._emit(f"{name}.svg"), **kwargs)

    def snapshot(self, name: str, field: GridField) -> None:
        save_field(field, self._emit(f"{name}.hypl"))

    def json(self, name: str, payload: BaseModel) -> None:
        write_json_atomic(payload.model_dump(mode="json"), self._emit(f"{name}.json"))

    def step(self, name: str, exploratory: bool = False, **data) -> None:
        self.steps.append(StepRecord(name=name, data=_plain(data), exploratory=exploratory))
        logger.info(f"step {name}: {self.steps[-1].data}")

    def check(
        self,
        name: str,
        value: float,
        op: Comparison,
        threshold: float,
        source: Optional[TableRef] = None,
    ) -> Check:
        check = Check.evaluate(name, value, op, threshold, source)
        self.checks.append(check)
        logger.info(
            f"check {name}: {check.value:.6g} {check.op.value} {threshold:g} -> "
            f"{'pass' if check.passed else 'FAIL'}"
        )
        return check

    def check_table(
        self,
        name: str,
        table: str,
        column: str,
        reduction: Reduction,
        op: Comparison,
        threshold: float,
        x: Optional[str] = None,
        target: Optional[float] = None,
    ) -> Check:
        ref = TableRef(table=f"{table}.csv", column=column, reduction=reduction, x=x, target=target)
        return self.check(name, reduce_column(self.frames[ref.table], ref), op, threshold, ref)


class ExperimentService:
    """Service class for running and verifying named experiments."""

    def __init__(self, config: Settings = settings):
        self.config = config

    # ------------------------------------------------------------------
    # Configuration

    def list_experiments(self) -> List[Tuple[str, str]]:
        return [(name.value, info.claim) for name, info in EXPERIMENTS.items()]

    def load_config(
        self,
        experiment: Optional[str] = None,
        config_file: Optional[str] = None,
        overrides: Optional[Mapping[str, Any]] = None,
    ) -> ExperimentConfig:
        """
        Merge a KEY=value file with command-line overrides and validate.

        Args:
            experiment: Experiment name (wins over the file's `experiment` key)
            config_file: Optional flat KEY=value file
            overrides: `--key value` pairs

        Returns:
            Validated ExperimentConfig

        Raises:
            ConfigError: If the file is missing or validation fails
        """
        values: Dict[str, Any] = {}
        if config_file:
            if not Path(config_file).is_file():
                raise ConfigError(f"config file not found: {config_file}")
            values.update(self._normalize(dotenv_values(config_file)))
        values.update(self._normalize(overrides or {}))
        if experiment:
            values["experiment"] = experiment
        try:
            return ExperimentConfig(**values)
        except ValidationError as e:
            raise ConfigError(f"invalid experiment configuration: {e}") from e

    @staticmethod
    def _normalize(values: Mapping[str, Any]) -> Dict[str, Any]:
        return {
            key.strip().lower().replace("-", "_"): value
            for key, value in values.items()
            if value is not None and str(value).strip() != ""
        }

    def _settings(self, cfg: ExperimentConfig) -> Settings:
        if cfg.threads:
            return self.config.model_copy(update={"threads": cfg.threads})
        return self.config

    # ------------------------------------------------------------------
    # Run / verify

    def run(self, cfg: ExperimentConfig) -> Tuple[ExperimentReport, Path]:
        """
        Execute one experiment and persist its artifacts.

        Args:
            cfg: Validated configuration

        Returns:
            (report, run directory); the directory holds report.json, the CSV
            tables, SVG plots, field snapshots and manifest.txt

        Raises:
            ExperimentError: If a module raises while the experiment runs
        """
        name = ExperimentName(cfg.experiment)
        info = EXPERIMENTS[name]
        conf = self._settings(cfg)
        stamp = datetime.now().strftime("%Y%m%dT%H%M%S%f")
        directory = Path(cfg.output_dir) / f"{name.value}-{stamp}"
        directory.mkdir(parents=True, exist_ok=False)
        ctx = _RunContext(directory)

        logger.info(f"Running experiment {name.value} (threads={conf.threads}) into {directory}")
        start = time.perf_counter()
        try:
            getattr(self, info.handler)(ctx, cfg, conf)
        except Exception as e:
            logger.error(f"Experiment {name.value} failed: {e}", exc_info=True)
            raise ExperimentError(name.value, e) from e
        wall_time = time.perf_counter() - start

        passed = bool(ctx.checks) and all(check.passed for check in ctx.checks)
        report = ExperimentReport(
            experiment=name.value,
            claim=info.claim,
            version=conf.app_version,
            config=cfg.model_dump(mode="json", exclude={"threads"}),
            steps=ctx.steps,
            checks=ctx.checks,
            passed=passed,
            artifacts=list(ctx.artifacts),
            wall_time=wall_time,
        )
        write_json_atomic(report.model_dump(mode="json"), directory / REPORT_NAME)
        write_manifest(directory, ctx.artifacts + [REPORT_NAME])
        logger.info(
            f"Experiment {name.value}: {'PASS' if passed else 'FAIL'} "
            f"({sum(c.passed for c in ctx.checks)}/{len(ctx.checks)} checks, {wall_time:.1f}s)"
        )
        return report, directory

    def verify(self, report_path: str) -> VerificationReport:
        """
        Re-check a stored report: recompute table-backed values, re-evaluate
        every predicate and compare the manifest hashes.

        Args:
            report_path: Path to report.json

        Returns:
            VerificationReport

        Raises:
            ConfigError: If the report cannot be read
        """
        path = Path(report_path)
        directory = path.parent
        try:
            report = ExperimentReport(**read_json(path))
        except (OSError, ValueError) as e:
            raise ConfigError(f"cannot read report {path}: {e}") from e

        failures: List[str] = []
        for check in report.checks:
            value = check.value
            if check.source is not None:
                try:
                    frame = read_table_csv(directory / check.source.table)
                    value = reduce_column(frame, check.source)
                except (OSError, KeyError, ValueError) as e:
                    failures.append(f"{check.name}: cannot recompute from {check.source.table}: {e}")
                    continue
                same = math.isclose(value, check.value, rel_tol=1e-9, abs_tol=1e-300) or (
                    math.isnan(value) and math.isnan(check.value)
                )
                if not same:
                    failures.append(f"{check.name}: stored {check.value!r}, table gives {value!r}")
            holds = Comparison(check.op).holds(value, check.threshold)
            if not holds:
                failures.append(f"{check.name}: {value:.6g} {check.op.value} {check.threshold:g} fails")
            if holds != check.passed:
                failures.append(f"{check.name}: stored pass flag disagrees")
        if report.passed != (bool(report.checks) and all(c.passed for c in report.checks)):
            failures.append("stored overall pass flag disagrees with the checks")
        checks_ok = not failures and bool(report.checks)

        try:
            hashes = check_manifest(directory)
            bad = sorted(name for name, ok in hashes.items() if not ok)
            missing = sorted(set(report.artifacts + [REPORT_NAME]) - set(hashes))
            manifest_ok = not bad and not missing
            failures.extend(f"manifest mismatch: {name}" for name in bad)
            failures.extend(f"not in manifest: {name}" for name in missing)
        except FileNotFoundError:
            manifest_ok = False
            failures.append("manifest.txt missing")

        result = VerificationReport(
            report=str(path), checks_ok=checks_ok, manifest_ok=manifest_ok, failures=failures
        )
        logger.info(f"verify {path}: {'PASS' if result.passed else 'FAIL'} ({len(failures)} problems)")
        return result

    # ------------------------------------------------------------------
    # Experiments

    def _run_bracket_check(self, ctx: _RunContext, cfg: ExperimentConfig, conf: Settings) -> None:
        algebra = AlgebraService(conf)
        fields = catalog.grushin_fields()

        bracket = algebra.commutator(*fields)
        ctx.step("commutator", dx_xdy=str(bracket.terms))
        ctx.check("commutator_is_dy", float(bracket == DiffOp.derivative(0, 1)), Comparison.EQ, 1.0)

        bases = [(0.0, 0.0), (0.0, 1.0), (0.0, -2.0), (0.5, 0.0), (-1.0, 1.0)]
        ranks = [algebra.hormander_rank(fields, base, 3) for base in bases]
        ctx.table(
            "hormander",
            {
                "x": [b[0] for b in bases],
                "y": [b[1] for b in bases],
                "rank": [r for r, _ in ranks],
                "step": [s if s is not None else -1 for _, s in ranks],
            },
        )
        on_line = [r for b, r in zip(bases, ranks) if b[0] == 0.0]
        off_line = [r for b, r in zip(bases, ranks) if b[0] != 0.0]
        ctx.check("rank_on_x0", min(r for r, _ in on_line), Comparison.EQ, 2.0)
        ctx.check("step_on_x0_is_2", float(all(s == 2 for _, s in on_line)), Comparison.EQ, 1.0)
        ctx.check("step_off_x0_is_1", float(all(s == 1 for _, s in off_line)), Comparison.EQ, 1.0)

        grushin = catalog.grushin()
        symbol = algebra.principal_symbol(grushin, 2)
        expected = SymbolPoly.from_expr(-(XI**2) - X**2 * ETA**2)
        ctx.step("principal_symbol", g=str(symbol.as_expr()))
        ctx.check("principal_symbol_of_G", float(symbol == expected), Comparison.EQ, 1.0)

        det = algebra.det_symbol(catalog.first_order_system(), (1, 1))
        ctx.step("det_symbol", det=str(det.as_expr()))
        ctx.check("det_symbol_A_is_symbol_of_G", float(det == symbol), Comparison.EQ, 1.0)

        samples = [-1.0, 0.0, 1.0]
        directions = [algebra.char_directions(symbol, (0.0, y)) for y in samples]
        ctx.table(
            "char_set",
            {
                "y": samples,
                "n_directions": [len(d) for d in directions],
                "max_abs_xi": [max((abs(xi) for xi, _ in d), default=0.0) for d in directions],
                "eta_signs": [len({math.copysign(1.0, eta) for _, eta in d}) for d in directions],
            },
        )
        ctx.check_table("char_directions_min", "char_set", "n_directions", Reduction.MIN, Comparison.EQ, 2.0)
        ctx.check_table("char_directions_max", "char_set", "n_directions", Reduction.MAX, Comparison.EQ, 2.0)
        ctx.check_table("char_directions_both_signs", "char_set", "eta_signs", Reduction.MIN, Comparison.EQ, 2.0)
        ctx.check_table(
            "char_directions_vertical", "char_set", "max_abs_xi", Reduction.MAX, Comparison.LE, CHAR_TOLERANCE
        )
        ctx.check("elliptic_off_x0", float(algebra.is_elliptic_at(symbol, (0.5, 0.0))), Comparison.EQ, 1.0)

    def _run_hyp_set(self, ctx: _RunContext, cfg: ExperimentConfig, conf: Settings) -> None:
        algebra = AlgebraService(conf)
        p_symbol = algebra.principal_symbol(catalog.p_operator(), 1)
        bracket = algebra.poisson_bracket(p_symbol.real_part(), p_symbol.imag_part())
        ctx.step("poisson_bracket", p=str(p_symbol.as_expr()), bracket=str(bracket.as_expr()))
        ctx.check("bracket_is_minus_eta", float(bracket == SymbolPoly.from_expr(-ETA)), Comparison.EQ, 1.0)

        eta = np.linspace(-2.0, 2.0, 41)
        values = bracket.evaluate(0.0, 0.0, 0.0, eta).real
        ctx.table(
            "bracket_sign",
            {"eta": eta, "bracket": values, "mismatch": ((values > 0) != (eta < 0)).astype(float)},
        )
        ctx.check_table("sign_map_mismatches", "bracket_sign", "mismatch", Reduction.MAX, Comparison.EQ, 0.0)

        rows = {"y": [], "xi": [], "eta": [], "bracket": [], "mismatch": []}
        for y in (-1.0, 0.0, 1.0):
            for xi, et in algebra.char_directions(p_symbol, (0.0, y)):
                value = float(bracket.evaluate(0.0, y, xi, et).real)
                rows["y"].append(y)
                rows["xi"].append(xi)
                rows["eta"].append(et)
                rows["bracket"].append(value)
                rows["mismatch"].append(float((value > 0) != (et < 0)))
        ctx.table("hyp_set", rows)
        ctx.check("char_points_of_p", len(rows["y"]), Comparison.GE, 2.0)
        ctx.check_table("hyp_set_mismatches", "hyp_set", "mismatch", Reduction.MAX, Comparison.EQ, 0.0)

    def _run_thm1_gain(self, ctx: _RunContext, cfg: ExperimentConfig, conf: Settings) -> None:
        solver = SolverService(conf)
        box = cfg.box(Box.square(conf.probe_length, conf.probe_points))
        widths = list(cfg.widths or PROBE_WIDTHS)
        atom = MeasureSpec(kind=MeasureKind.POINT_ATOM, width=widths[0])

        columns: Dict[str, List[float]] = {"width": widths, "inv_width": [1.0 / w for w in widths]}
        for s in cfg.s or GRUSHIN_ORDERS:
            report = solver.regularity_probe(ProbeOperator.GRUSHIN, atom, s, widths, box)
            columns[f"grushin_s{s:g}"] = report.norms
        for s in (ELLIPTIC_CONTROL_ORDER, ELLIPTIC_FAILURE_ORDER):
            report = solver.regularity_probe(ProbeOperator.LAPLACIAN, atom, s, widths, box)
            columns[f"laplacian_s{s:g}"] = report.norms
        frame = ctx.table("probe", columns)
        ctx.plot("probe", frame.drop(columns="width"), PlotKind.LOGLOG, x="inv_width")

        for column in columns:
            if column.startswith("grushin") or column == f"laplacian_s{ELLIPTIC_CONTROL_ORDER:g}":
                ctx.check_table(
                    f"slope_{column}", "probe", column, Reduction.LOGLOG_SLOPE,
                    Comparison.LT, BOUNDED_SLOPE, x="inv_width",
                )
        ctx.check_table(
            f"slope_laplacian_s{ELLIPTIC_FAILURE_ORDER:g}", "probe",
            f"laplacian_s{ELLIPTIC_FAILURE_ORDER:g}", Reduction.LOGLOG_SLOPE,
            Comparison.GE, UNBOUNDED_SLOPE, x="inv_width",
        )

        h1, l2 = solver.energy_gain(GridService(conf).realize_measure(atom.with_width(widths[-1]), box))
        ctx.step("energy_gain", exploratory=True, h1_solution=h1, l2_forcing=l2)

        errors = [self._grushin_error(solver, n) for n in (MANUFACTURED_POINTS, 2 * MANUFACTURED_POINTS)]
        ctx.table("grushin_convergence", {"n": [MANUFACTURED_POINTS, 2 * MANUFACTURED_POINTS], "error": errors})
        ctx.check_table(
            "grushin_manufactured_error", "grushin_convergence", "error", Reduction.FIRST,
            Comparison.LE, MANUFACTURED_TOLERANCE,
        )
        ctx.check_table(
            "grushin_order_ratio", "grushin_convergence", "error", Reduction.RATIO,
            Comparison.LE, ORDER_BAND, target=ORDER_TARGET,
        )

    def _run_polarized(self, ctx: _RunContext, cfg: ExperimentConfig, conf: Settings) -> None:
        solver = SolverService(conf)
        grid = GridService(conf)
        box = cfg.box(Box.square(MANUFACTURED_LENGTH, MANUFACTURED_POINTS))
        v = _odd_gaussian(box)
        f1, f2 = grid.apply_diffop(catalog.first_order_system(), [v * POLARIZATION[0], v * POLARIZATION[1]])
        result = solver.polarized_reduction(PolarizedInput(**{"lambda": POLARIZATION, "f1": f1, "f2": f2}))
        error = _relative_error(grid, result.field, v)
        ctx.step("polarized_reduction", error=error, residual=result.residual, **result.diagnostics)
        ctx.check("polarized_manufactured_error", error, Comparison.LE, REDUCTION_TOLERANCE)
        ctx.check("polarized_residual_dx", result.diagnostics["residual_dx"], Comparison.LE, REDUCTION_TOLERANCE)
        ctx.check("polarized_residual_xdy", result.diagnostics["residual_xdy"], Comparison.LE, REDUCTION_TOLERANCE)

        profile = solver.polarized_gain_profile(POLARIZATION, GAIN_FREQUENCIES, box)
        frame = ctx.table(
            "gain_profile",
            {
                "frequency": [r.frequency for r in profile.rows],
                "l2_ratio": [r.l2_ratio for r in profile.rows],
                "h1_ratio": [r.h1_ratio for r in profile.rows],
                "residual": [r.residual for r in profile.rows],
            },
        )
        ctx.plot("gain_profile", frame[["frequency", "l2_ratio", "h1_ratio"]], PlotKind.LOGLOG)
        ctx.step("h1_exponent", exploratory=True, exponent=profile.h1_exponent)
        ctx.check_table("l2_ratio_bounded", "gain_profile", "l2_ratio", Reduction.MAX, Comparison.LE, GAIN_L2_BOUND)
        ctx.check_table("h1_ratio_increasing", "gain_profile", "h1_ratio", Reduction.INCREASING, Comparison.EQ, 1.0)

    def _run_counterexample(self, ctx: _RunContext, cfg: ExperimentConfig, conf: Settings) -> None:
        singular = SingularService(conf)
        box = cfg.box(Box())
        chi = cfg.chi or COUNTEREXAMPLE_CHI

        residuals = [singular.residual_au(CounterexampleSolution(chi=chi, theta=t), box) for t in cfg.theta]
        ctx.table("residuals", {"theta": cfg.theta, "residual": residuals})
        ctx.check_table("residual_au", "residuals", "residual", Reduction.MAX, Comparison.LE, RESIDUAL_TOLERANCE)

        u1, _ = singular.realize_u1(CounterexampleSolution(chi=chi), box)
        ctx.snapshot("u1", u1)
        stride = max(1, box.nx // 64)
        heat = field_table(np.abs(u1.values)[::stride, ::stride], box.x_nodes()[::stride], box.y_nodes()[::stride])
        ctx.plot("u1_modulus", heat, PlotKind.HEATMAP)

        growth = singular.l2_growth(GROWTH_CUTOFFS)
        frame = ctx.table(
            "growth",
            {
                "cutoff": [r.cutoff for r in growth.rows],
                "exact": [r.exact for r in growth.rows],
                "quadrature": [r.quadrature for r in growth.rows],
            },
        )
        ctx.plot("growth", frame, PlotKind.LOGLOG)
        ctx.check_table(
            "growth_slope", "growth", "exact", Reduction.LOGLOG_SLOPE,
            Comparison.LE, GROWTH_BAND, x="cutoff", target=GROWTH_SLOPE,
        )

        even = TestFunctionSpec(kind=TestFunctionKind.GAUSSIAN)
        odd = TestFunctionSpec(kind=TestFunctionKind.ODD_GAUSSIAN)
        pair_even = singular.trace_pairing(TRACE_CUTOFF, even)
        pair_odd = singular.trace_pairing(TRACE_CUTOFF, odd)
        ctx.table(
            "trace",
            {
                "test_function": [even.kind.value, odd.kind.value],
                "re_pair": [pair_even.re_pair, pair_odd.re_pair],
                "im_pair": [pair_even.im_pair, pair_odd.im_pair],
            },
        )
        delta_error = abs(pair_even.re_pair - math.pi * even.value_at_zero)
        ctx.check("trace_delta_part", delta_error, Comparison.LE, TRACE_TOLERANCE)
        ctx.check("trace_even_imaginary", abs(pair_even.im_pair), Comparison.LE, PARITY_TOLERANCE)
        ctx.check("trace_odd_real", abs(pair_odd.re_pair), Comparison.LE, PARITY_TOLERANCE)

        constants = singular.trace_constants(TRACE_CUTOFF)
        ctx.step("trace_constants", exploratory=True, c=constants.c, c_tilde=constants.c_tilde)

        point = CounterexampleSolution(chi=ChiSpec.indicator(0.0, TRACE_CUTOFF))
        closed = singular.eval_u1(point, 0.5, 0.3, EvalMethod.CLOSED_FORM)
        quadrature = singular.eval_u1(point, 0.5, 0.3, EvalMethod.QUADRATURE)
        ctx.step("pointwise_u1", exploratory=True, closed_form=closed, quadrature=quadrature)

    def _run_kernel_decay(self, ctx: _RunContext, cfg: ExperimentConfig, conf: Settings) -> None:
        kernels = KernelService(conf)
        p_list = list(cfg.p_list or DECAY_P_LIST)
        table = kernels.decay_study(p_list, DECAY_RATIO, cfg.delta, cfg.samples, cfg.seed)
        frame = ctx.table(
            "decay",
            {
                "p": [r.p for r in table.rows],
                "q": [r.q for r in table.rows],
                "sup_l1": [r.sup_l1 for r in table.rows],
                "x_prime": [r.x_prime for r in table.rows],
                "y_prime": [r.y_prime for r in table.rows],
            },
        )
        ctx.plot("decay", frame[["p", "sup_l1"]], PlotKind.LOGLOG)
        ctx.check_table("sup_l1_strictly_decreasing", "decay", "sup_l1", Reduction.DECREASING, Comparison.EQ, 1.0)

        bounds = {"p": [], "c0": [], "c1": [], "c2": [], "holdout_excess": [], "violations": []}
        for p in p_list:
            report = kernels.verify_pointwise_bounds(
                KernelParams(p=p, q=DECAY_RATIO * p, delta=cfg.delta), BOUND_SAMPLES, cfg.seed
            )
            bounds["p"].append(p)
            for n, c in enumerate(report.constants):
                bounds[f"c{n}"].append(c)
            bounds["holdout_excess"].append(max(report.holdout_excess))
            bounds["violations"].append(report.total_violations)
        ctx.table("bounds", bounds)
        ctx.check_table("bound_violations", "bounds", "violations", Reduction.MAX, Comparison.EQ, 0.0)

        refined = []
        for row in table.rows:
            params = KernelParams(p=row.p, q=row.q, delta=row.delta)
            value = kernels.l1_norm(params, row.x_prime, row.y_prime, refine=2)
            refined.append(abs(value - row.sup_l1) / row.sup_l1 if row.sup_l1 > 0 else 0.0)
        ctx.table("refinement", {"p": p_list, "relative_change": refined})
        ctx.check_table(
            "refinement_stability", "refinement", "relative_change", Reduction.MAX,
            Comparison.LT, REFINEMENT_TOLERANCE,
        )

        middle = p_list[len(p_list) // 2]
        split = kernels.region_split(KernelParams(p=middle, q=DECAY_RATIO * middle, delta=cfg.delta), 0.5, 0.9, 0.0)
        ctx.step("region_split", exploratory=True, **split.model_dump(), total=split.total)
        separations = [8.0, 16.0, 32.0, 64.0]
        ratios = kernels.bound_ratios(
            KernelParams(p=middle, q=DECAY_RATIO * middle, delta=cfg.delta), 0.3, 0.6, separations
        )
        ctx.step("bound_ratio_decay", exploratory=True, separations=separations, ratios=ratios[2])

    def _run_p_gain(self, ctx: _RunContext, cfg: ExperimentConfig, conf: Settings) -> None:
        solver = SolverService(conf)
        grid = GridService(conf)
        box = cfg.box(Box.square(conf.probe_length, conf.probe_points))
        widths = list(cfg.widths or PROBE_WIDTHS)
        line = MeasureSpec(kind=MeasureKind.LINE_ON_X0, width=widths[0])

        columns: Dict[str, List[float]] = {"width": widths, "inv_width": [1.0 / w for w in widths]}
        checked = list(cfg.s or P_GAIN_ORDERS)
        for s in checked:
            columns[f"p_s{s:g}"] = solver.regularity_probe(ProbeOperator.P_OPERATOR, line, s, widths, box).norms
        for s in EXPLORATORY_ORDERS:
            report = solver.regularity_probe(ProbeOperator.P_OPERATOR, line, s, widths, box, exploratory=True)
            columns[f"p_s{s:g}"] = report.norms
            ctx.step(f"exploratory_s{s:g}", exploratory=True, slope=report.fitted_exponent)
        frame = ctx.table("probe", columns)
        ctx.plot("probe", frame.drop(columns="width"), PlotKind.LOGLOG, x="inv_width")
        for s in checked:
            ctx.check_table(
                f"slope_p_s{s:g}", "probe", f"p_s{s:g}", Reduction.LOGLOG_SLOPE,
                Comparison.LT, BOUNDED_SLOPE, x="inv_width",
            )

        manufactured = Box.square(MANUFACTURED_LENGTH, MANUFACTURED_POINTS)
        nu = GridField.from_function(
            manufactured, lambda X, Y: np.exp(-(X**2 + Y**2) / 2) * np.exp(-8j * Y)
        )
        forcing = grid.apply_diffop(DiffOpMatrix.from_scalar(catalog.p_operator()), [nu])[0]
        result = solver.solve_p(forcing, 0.0)
        error = _relative_error(grid, result.field, nu)
        ctx.step("solve_p_manufactured", error=error, residual=result.residual, **result.diagnostics)
        ctx.check("p_manufactured_error", error, Comparison.LE, MANUFACTURED_TOLERANCE)

    def _run_hypo_system(self, ctx: _RunContext, cfg: ExperimentConfig, conf: Settings) -> None:
        solver = SolverService(conf)
        grid = GridService(conf)
        coarse = cfg.box(Box.square(MANUFACTURED_LENGTH, MANUFACTURED_POINTS))
        boxes = [coarse, coarse.refined(2)]
        system = catalog.hypo_system()

        rows = {"n": [], "error": [], "h1_u1": [], "h1_u2": []}
        for box in boxes:
            X, Y = box.coordinates()
            gauss = np.exp(-(X**2 + Y**2) / 2)
            exact = [GridField(box, X * gauss), GridField(box, Y * gauss)]
            forcing = grid.apply_diffop(system, exact)
            solved = solver.solve_hypo_system(*forcing).fields
            error = math.sqrt(
                sum(grid.norm(a - b, NormKind.L2) ** 2 for a, b in zip(solved, exact))
                / sum(grid.norm(b, NormKind.L2) ** 2 for b in exact)
            )

            data = [GridField(box, np.exp(-(X**2 + Y**2))), GridField(box, X * np.exp(-(X**2 + Y**2)))]
            u1, u2 = solver.solve_hypo_system(*data).fields
            rows["n"].append(box.nx)
            rows["error"].append(error)
            rows["h1_u1"].append(grid.norm(u1, NormKind.HS, s=1.0))
            rows["h1_u2"].append(grid.norm(u2, NormKind.HS, s=1.0))
        ctx.table("hypo_system", rows)
        ctx.check_table(
            "round_trip_error", "hypo_system", "error", Reduction.FIRST, Comparison.LE, HYPO_ROUND_TRIP_TOLERANCE
        )
        ctx.check_table(
            "order_ratio", "hypo_system", "error", Reduction.RATIO, Comparison.LE, ORDER_BAND, target=ORDER_TARGET
        )
        ctx.check_table(
            "h1_u1_stable", "hypo_system", "h1_u1", Reduction.RATIO, Comparison.LE, H1_STABILITY, target=1.0
        )
        ctx.check_table(
            "h1_u2_stable", "hypo_system", "h1_u2", Reduction.RATIO, Comparison.LE, H1_STABILITY, target=1.0
        )

    def _run_wavefront(self, ctx: _RunContext, cfg: ExperimentConfig, conf: Settings) -> None:
        wavefront = WavefrontService(conf)
        singular = SingularService(conf)
        grid = GridService(conf)
        box = cfg.box(Box.square(conf.wavefront_length, conf.wavefront_points))
        bases = list(cfg.base_points or WAVEFRONT_BASE_POINTS)

        u1, _ = singular.realize_u1(CounterexampleSolution(chi=cfg.chi or WAVEFRONT_CHI), box)
        scan = wavefront.brummelhuis_scan(u1, bases)
        ctx.json("scan_counterexample", scan)
        lower = [
            j
            for report in scan.reports
            for j in report.singular_directions
            if math.sin(report.angles[j]) < -1e-9
        ]
        ctx.table("cones_counterexample", _cone_rows(scan))
        ctx.check("counterexample_all_ok", float(scan.all_ok), Comparison.EQ, 1.0)
        ctx.check("counterexample_lower_half_plane", len(lower), Comparison.EQ, 0.0)
        on_line = [r for r in scan.reports if abs(r.base[0]) < 1e-12]
        if on_line:
            ctx.check(
                "counterexample_singular_on_x0",
                min(len(r.singular_directions) for r in on_line),
                Comparison.GE,
                1.0,
            )
        ctx.step(
            "counterexample_off_line",
            exploratory=True,
            singular_counts=[len(r.singular_directions) for r in scan.reports if abs(r.base[0]) >= 1e-12],
        )

        width = ATOM_CELLS * max(box.dx, box.dy)
        atom = grid.realize_measure(MeasureSpec(kind=MeasureKind.POINT_ATOM, width=width), box)
        atom_scan = wavefront.brummelhuis_scan(atom, [(0.0, 0.0)])
        ctx.json("scan_atom", atom_scan)
        ctx.check("atom_all_ok", float(atom_scan.all_ok), Comparison.EQ, 0.0)

        line = grid.realize_measure(MeasureSpec(kind=MeasureKind.LINE_ON_X0, width=width), box)
        line_scan = wavefront.brummelhuis_scan(line, [(0.0, 0.0)])
        ctx.step("line_measure", exploratory=True, all_ok=line_scan.all_ok,
                 singular_directions=line_scan.reports[0].singular_directions)

        rotated = wavefront.brummelhuis_scan(wavefront.rotate_quarter(u1), [(-y, x) for x, y in bases])
        ctx.step("rotated_counterexample", exploratory=True, all_ok=rotated.all_ok,
                 singular_directions=[r.singular_directions for r in rotated.reports])


def _odd_gaussian(box: Box) -> GridField:
    return GridField.from_function(box, lambda X, Y: X * np.exp(-(X**2 + Y**2) / 2))


def _relative_error(grid: GridService, approx: GridField, exact: GridField) -> float:
    return grid.norm(approx - exact, NormKind.L2) / grid.norm(exact, NormKind.L2)


def _cone_rows(scan: ScanReport) -> Dict[str, List[float]]:
    rows = {"base_x": [], "base_y": [], "angle": [], "slope": [], "singular": []}
    for report in scan.reports:
        singular = set(report.singular_directions)
        for j, (angle, slope) in enumerate(zip(report.angles, report.slopes)):
            rows["base_x"].append(report.base[0])
            rows["base_y"].append(report.base[1])
            rows["angle"].append(angle)
            rows["slope"].append(slope)
            rows["singular"].append(float(j in singular))
    return rows
