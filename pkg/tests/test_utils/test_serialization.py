"""
Unit tests for artifact I/O.
"""

import numpy as np
import pandas as pd
import pytest

from hypolab.models.fields import GridField
from hypolab.schemas.grid import Box
from hypolab.utils.serialization import (
    HEADER,
    check_manifest,
    export_slice_csv,
    load_field,
    read_json,
    read_manifest,
    read_table_csv,
    save_field,
    sha256_file,
    slice_frame,
    write_json_atomic,
    write_manifest,
    write_table_csv,
)


class TestSerialization:
    """Test cases for HYPL1 snapshots, CSV tables and manifests."""

    def setup_method(self):
        """Set up a small complex field."""
        self.box = Box(lx=2.0, ly=3.0, nx=16, ny=32)
        rng = np.random.default_rng(7)
        self.field = GridField(self.box, rng.normal(size=(16, 32)) + 1j * rng.normal(size=(16, 32)))

    def test_field_round_trip_bit_exact(self, tmp_path):
        """Test that a saved field loads back bit for bit."""
        path = save_field(self.field, tmp_path / "u.hypl")
        loaded = load_field(path)
        assert loaded.box == self.box
        assert loaded.values.tobytes() == self.field.values.tobytes()

    def test_file_size(self, tmp_path):
        """Test the header plus payload layout."""
        path = save_field(self.field, tmp_path / "u.hypl")
        assert path.stat().st_size == HEADER.size + 16 * 32 * 16

    def test_rejects_foreign_magic(self, tmp_path):
        """Test that a file with a different magic is refused."""
        path = tmp_path / "bad.hypl"
        path.write_bytes(b"NOPE!" + bytes(HEADER.size))
        with pytest.raises(ValueError, match="not a HYPL1 file"):
            load_field(path)

    def test_rejects_truncated_payload(self, tmp_path):
        """Test that a short payload is refused."""
        path = save_field(self.field, tmp_path / "u.hypl")
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(ValueError, match="payload"):
            load_field(path)

    def test_slice_frame(self):
        """Test the default slice through coordinate zero."""
        frame = slice_frame(self.field, axis="y")
        assert list(frame.columns) == ["y", "real", "imag", "abs"]
        assert len(frame) == 32
        np.testing.assert_array_equal(frame["real"], self.field.values[8].real)

    def test_slice_frame_bad_axis(self):
        """Test that an unknown axis is rejected."""
        with pytest.raises(ValueError):
            slice_frame(self.field, axis="z")

    def test_export_slice_csv(self, tmp_path):
        """Test the CSV export of a slice."""
        path = export_slice_csv(self.field, tmp_path / "slice.csv")
        frame = read_table_csv(path)
        np.testing.assert_array_equal(frame["abs"].to_numpy(), np.abs(self.field.values[:, 16]))

    def test_table_csv_round_trip(self, tmp_path):
        """Test that floats survive the CSV format exactly."""
        table = {"p": [4.0, 8.0], "sup_l1": [0.1 + 1e-17, 1.0 / 3.0]}
        path = write_table_csv(table, tmp_path / "t.csv")
        pd.testing.assert_frame_equal(read_table_csv(path), pd.DataFrame(table))

    def test_json_atomic(self, tmp_path):
        """Test the JSON writer leaves no temporary files behind."""
        path = write_json_atomic({"b": 1, "a": [1.5, None]}, tmp_path / "report.json")
        assert read_json(path) == {"a": [1.5, None], "b": 1}
        assert sorted(p.name for p in tmp_path.iterdir()) == ["report.json"]

    def test_manifest(self, tmp_path):
        """Test manifest hashes and tamper detection."""
        write_table_csv({"x": [1.0]}, tmp_path / "a.csv")
        write_json_atomic({"k": 1}, tmp_path / "report.json")
        write_manifest(tmp_path, ["report.json", "a.csv"])
        assert read_manifest(tmp_path) == {
            "a.csv": sha256_file(tmp_path / "a.csv"),
            "report.json": sha256_file(tmp_path / "report.json"),
        }
        assert all(check_manifest(tmp_path).values())

        (tmp_path / "a.csv").write_text("x\n2.0\n")
        assert check_manifest(tmp_path) == {"a.csv": False, "report.json": True}
