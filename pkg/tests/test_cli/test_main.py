"""
Tests for the command-line entry point.
"""

import pytest

from hypolab.core.exceptions import ConfigError
from hypolab.main import EXIT_CONFIG, EXIT_FAIL, EXIT_PASS, main, parse_overrides


class TestParseOverrides:
    """Test cases for trailing --key value overrides."""

    def test_pairs_and_equals(self):
        """Test both spellings."""
        assert parse_overrides(["--nx", "64", "--s=0,0.25"]) == {"nx": "64", "s": "0,0.25"}

    def test_negative_values_need_equals(self):
        """Test that a value starting with -- is not swallowed."""
        with pytest.raises(ConfigError, match="needs a value"):
            parse_overrides(["--seed", "--nx", "64"])

    def test_bare_value(self):
        """Test that a value without a key is rejected."""
        with pytest.raises(ConfigError, match="unexpected argument"):
            parse_overrides(["64"])


class TestMain:
    """Test cases for main()."""

    def test_list(self, capsys):
        """Test that list prints every experiment."""
        assert main(["list"]) == EXIT_PASS
        out = capsys.readouterr().out
        assert "bracket-check" in out
        assert "wavefront" in out

    def test_unknown_experiment(self, tmp_path, capsys):
        """Test the configuration exit code."""
        assert main(["run", "nope", "--output-dir", str(tmp_path)]) == EXIT_CONFIG
        assert "unknown experiment" in capsys.readouterr().err

    def test_bad_override(self, tmp_path):
        """Test that an unknown override key is a configuration error."""
        assert main(["run", "bracket-check", "--output-dir", str(tmp_path), "--bogus", "1"]) == EXIT_CONFIG

    def test_extra_arguments_outside_run(self):
        """Test that list takes no overrides."""
        with pytest.raises(SystemExit) as exc:
            main(["list", "--nx", "64"])
        assert exc.value.code == 2

    def test_run_and_verify(self, tmp_path, capsys):
        """Test a passing run followed by verification of its report."""
        code = main(["run", "bracket-check", "--output-dir", str(tmp_path), "--threads", "1"])
        assert code == EXIT_PASS
        out = capsys.readouterr().out
        assert "bracket-check: PASS" in out
        [directory] = [p for p in tmp_path.iterdir() if p.is_dir()]
        report = directory / "report.json"
        assert main(["verify", str(report)]) == EXIT_PASS

        (directory / "hormander.csv").write_text("x,y,rank,step\n0,0,1,1\n")
        assert main(["verify", str(report)]) == EXIT_FAIL
        assert "manifest mismatch: hormander.csv" in capsys.readouterr().out
