"""
Unit tests for the experiment runner.
"""

import json

import numpy as np
import pandas as pd
import pytest

from hypolab.core.exceptions import ConfigError
from hypolab.schemas.experiments import ExperimentName
from hypolab.schemas.outputs.experiments import Reduction, TableRef
from hypolab.services.experiment_service import REPORT_NAME, ExperimentService, reduce_column


class TestExperimentService:
    """Test cases for ExperimentService."""

    def setup_method(self):
        """Set up the service."""
        self.service = ExperimentService()

    def run_into(self, tmp_path, experiment: str, **overrides):
        cfg = self.service.load_config(experiment, overrides={"output_dir": str(tmp_path), **overrides})
        return self.service.run(cfg)

    def test_list_experiments(self):
        """Test that every experiment is listed with a claim."""
        listed = dict(self.service.list_experiments())
        assert set(listed) == {e.value for e in ExperimentName}
        assert all(claim for claim in listed.values())

    def test_load_config_file_and_overrides(self, tmp_path):
        """Test that overrides win over the file and keys are normalized."""
        path = tmp_path / "gain.env"
        path.write_text("EXPERIMENT=polarized\nS=0, 0.25\nNX=128\nWIDTHS=\n")
        cfg = self.service.load_config("thm1-gain", str(path), {"nx": "64", "base-points": "0:0"})
        assert cfg.experiment == ExperimentName.THM1_GAIN
        assert cfg.s == [0.0, 0.25]
        assert cfg.nx == 64
        assert cfg.widths is None
        assert cfg.base_points == [(0.0, 0.0)]

    def test_load_config_errors(self, tmp_path):
        """Test that unknown keys, unknown experiments and missing files raise ConfigError."""
        with pytest.raises(ConfigError):
            self.service.load_config("bracket-check", overrides={"bogus": "1"})
        with pytest.raises(ConfigError, match="unknown experiment"):
            self.service.load_config("nope")
        with pytest.raises(ConfigError, match="not found"):
            self.service.load_config("bracket-check", str(tmp_path / "missing.env"))
        with pytest.raises(ConfigError):
            self.service.load_config("thm1-gain", overrides={"nx": "96"})

    def test_reduce_column(self):
        """Test the table reductions behind checks."""
        frame = pd.DataFrame({"cutoff": [1.0, 4.0, 16.0], "norm": [2.0, 4.0, 8.0]})

        def ref(reduction, **kwargs):
            return TableRef(table="t.csv", column="norm", reduction=reduction, **kwargs)

        assert reduce_column(frame, ref(Reduction.FIRST)) == 2.0
        assert reduce_column(frame, ref(Reduction.MAX)) == 8.0
        assert reduce_column(frame, ref(Reduction.RATIO)) == 0.25
        assert reduce_column(frame, ref(Reduction.INCREASING)) == 1.0
        assert reduce_column(frame, ref(Reduction.DECREASING)) == 0.0
        slope = reduce_column(frame, ref(Reduction.LOGLOG_SLOPE, x="cutoff"))
        assert slope == pytest.approx(0.5)
        assert reduce_column(frame, ref(Reduction.LAST, target=7.5)) == pytest.approx(0.5)

    def test_run_bracket_check(self, tmp_path):
        """Test a passing symbolic run and its artifacts."""
        report, directory = self.run_into(tmp_path, "bracket-check")
        assert report.passed
        assert directory.parent == tmp_path
        assert directory.name.startswith("bracket-check-")
        assert {"hormander.csv", "char_set.csv"} <= set(report.artifacts)
        assert (directory / REPORT_NAME).exists()
        assert (directory / "manifest.txt").exists()
        assert "threads" not in report.config
        stored = json.loads((directory / REPORT_NAME).read_text())
        assert stored["passed"] is True

    def test_run_hyp_set(self, tmp_path):
        """Test the bracket sign map."""
        report, directory = self.run_into(tmp_path, "hyp-set")
        assert report.passed
        frame = pd.read_csv(directory / "bracket_sign.csv")
        np.testing.assert_allclose(frame["bracket"], -frame["eta"], atol=1e-15)

    def test_verify_passes(self, tmp_path):
        """Test that an untouched run verifies."""
        _, directory = self.run_into(tmp_path, "hyp-set")
        result = self.service.verify(str(directory / REPORT_NAME))
        assert result.passed
        assert result.failures == []

    def test_verify_detects_table_tampering(self, tmp_path):
        """Test that an edited table fails both the recomputation and the manifest."""
        _, directory = self.run_into(tmp_path, "bracket-check")
        table = directory / "char_set.csv"
        frame = pd.read_csv(table)
        frame.loc[0, "n_directions"] = 3
        frame.to_csv(table, index=False)
        result = self.service.verify(str(directory / REPORT_NAME))
        assert not result.passed
        assert not result.checks_ok
        assert not result.manifest_ok
        assert "manifest mismatch: char_set.csv" in result.failures

    def test_verify_missing_manifest(self, tmp_path):
        """Test that a run without a manifest does not verify."""
        _, directory = self.run_into(tmp_path, "hyp-set")
        (directory / "manifest.txt").unlink()
        result = self.service.verify(str(directory / REPORT_NAME))
        assert result.checks_ok
        assert not result.manifest_ok

    def test_verify_unreadable_report(self, tmp_path):
        """Test that a missing report is a configuration error."""
        with pytest.raises(ConfigError):
            self.service.verify(str(tmp_path / REPORT_NAME))

    def test_run_is_deterministic_across_threads(self, tmp_path):
        """Test identical reports and tables for one and two threads."""
        _, first = self.run_into(tmp_path, "bracket-check", threads="1")
        _, second = self.run_into(tmp_path, "bracket-check", threads="2")
        reports = []
        for directory in (first, second):
            data = json.loads((directory / REPORT_NAME).read_text())
            data.pop("wall_time")
            reports.append(data)
        assert reports[0] == reports[1]
        for name in ("hormander.csv", "char_set.csv"):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    @pytest.mark.slow
    def test_run_counterexample(self, tmp_path):
        """Test the counterexample run on its default grid and profile."""
        report, directory = self.run_into(tmp_path, "counterexample")
        assert report.passed, [c.name for c in report.checks if not c.passed]
        assert {"u1.hypl", "growth.csv", "growth.svg", "trace.csv"} <= set(report.artifacts)
        assert self.service.verify(str(directory / REPORT_NAME)).passed

    @pytest.mark.slow
    @pytest.mark.parametrize(
        "experiment", ["thm1-gain", "polarized", "kernel-decay", "p-gain", "hypo-system", "wavefront"]
    )
    def test_run_default_experiment_passes(self, tmp_path, experiment):
        """Test that each experiment passes its checks on the default grids."""
        report, directory = self.run_into(tmp_path, experiment)
        assert report.passed, [c.name for c in report.checks if not c.passed]
        assert self.service.verify(str(directory / REPORT_NAME)).passed

    @pytest.mark.slow
    def test_run_polarized_checks_reduction_accuracy(self, tmp_path):
        """Test that the polarized run gates the reduction error and both residuals at 1e-6."""
        report, _ = self.run_into(tmp_path, "polarized")
        checks = {c.name: c for c in report.checks}
        for name in ("polarized_manufactured_error", "polarized_residual_dx", "polarized_residual_xdy"):
            assert checks[name].threshold == 1e-6
            assert checks[name].passed

    @pytest.mark.slow
    def test_run_wavefront_scans_the_base_grid(self, tmp_path):
        """Test the 5 x 5 base grid and the presence check restricted to x = 0."""
        report, _ = self.run_into(tmp_path, "wavefront")
        names = {c.name for c in report.checks}
        assert "counterexample_singular_on_x0" in names
        assert "counterexample_lower_half_plane" in names
        off_line = next(s for s in report.steps if s.name == "counterexample_off_line")
        assert len(off_line.data["singular_counts"]) == 20
