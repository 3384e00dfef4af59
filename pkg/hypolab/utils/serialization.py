"""
Artifact I/O: HYPL1 field snapshots, CSV tables, atomic JSON reports and
SHA-256 manifests.
"""

import hashlib
import json
import os
import struct
import tempfile
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd

from hypolab.core.logging import logger
from hypolab.models.fields import GridField
from hypolab.schemas.grid import Box

PathLike = Union[str, Path]

MAGIC = b"HYPL1"
FORMAT_VERSION = 1
# magic, version, Nx, Ny, Lx, Ly
HEADER = struct.Struct("<5sIIIdd")
VALUE_DTYPE = np.dtype("<c16")

MANIFEST_NAME = "manifest.txt"


def save_field(field: GridField, path: PathLike) -> Path:
    """
    Write a HYPL1 snapshot: header followed by Nx*Ny little-endian complex doubles, row-major.

    Args:
        field: Field to store
        path: Target file

    Returns:
        The written path
    """
    box = field.box
    header = HEADER.pack(MAGIC, FORMAT_VERSION, box.nx, box.ny, box.lx, box.ly)
    payload = np.ascontiguousarray(field.values, dtype=VALUE_DTYPE).tobytes(order="C")
    return write_bytes_atomic(header + payload, path)


def load_field(path: PathLike) -> GridField:
    """
    Read a HYPL1 snapshot written by save_field.

    Raises:
        ValueError: On a foreign magic, unknown version or truncated payload
    """
    data = Path(path).read_bytes()
    if len(data) < HEADER.size:
        raise ValueError(f"{path}: file shorter than the HYPL1 header")
    magic, version, nx, ny, lx, ly = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"{path}: not a HYPL1 file")
    if version != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported HYPL1 version {version}")
    expected = nx * ny * VALUE_DTYPE.itemsize
    payload = data[HEADER.size:]
    if len(payload) != expected:
        raise ValueError(f"{path}: expected {expected} payload bytes, found {len(payload)}")
    values = np.frombuffer(payload, dtype=VALUE_DTYPE).reshape(nx, ny)
    return GridField(Box(lx=lx, ly=ly, nx=nx, ny=ny), values)


def slice_frame(field: GridField, axis: str = "x", index: Optional[int] = None) -> pd.DataFrame:
    """
    1D slice of a field as a table.

    axis="x" runs along x at the y-node `index`, axis="y" along y at the x-node
    `index`; the default index is the node at coordinate 0.
    """
    box = field.box
    if axis == "x":
        index = box.ny // 2 if index is None else index
        coordinate, values = box.x_nodes(), field.values[:, index]
    elif axis == "y":
        index = box.nx // 2 if index is None else index
        coordinate, values = box.y_nodes(), field.values[index, :]
    else:
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    return pd.DataFrame(
        {axis: coordinate, "real": values.real, "imag": values.imag, "abs": np.abs(values)}
    )


def export_slice_csv(field: GridField, path: PathLike, axis: str = "x", index: Optional[int] = None) -> Path:
    return write_table_csv(slice_frame(field, axis, index), path)


def write_table_csv(table: Union[pd.DataFrame, Mapping[str, Sequence[Any]]], path: PathLike) -> Path:
    frame = table if isinstance(table, pd.DataFrame) else pd.DataFrame(dict(table))
    text = frame.to_csv(index=False, float_format="%.17g")
    return write_bytes_atomic(text.encode("utf-8"), path)


def read_table_csv(path: PathLike) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")


def write_bytes_atomic(data: bytes, path: PathLike) -> Path:
    """Write through a temporary file in the target directory and rename over `path`."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_json_atomic(payload: Dict[str, Any], path: PathLike) -> Path:
    text = json.dumps(payload, indent=2, sort_keys=True, allow_nan=True)
    return write_bytes_atomic((text + "\n").encode("utf-8"), path)


def read_json(path: PathLike) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def sha256_file(path: PathLike) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(directory: PathLike, names: Iterable[str]) -> Path:
    """manifest.txt with one '<sha256>  <name>' line per artifact, sorted by name."""
    directory = Path(directory)
    lines = [f"{sha256_file(directory / name)}  {name}" for name in sorted(set(names))]
    logger.debug(f"manifest for {directory}: {len(lines)} artifacts")
    return write_bytes_atomic(("\n".join(lines) + "\n").encode("utf-8"), directory / MANIFEST_NAME)


def read_manifest(directory: PathLike) -> Dict[str, str]:
    entries = {}
    for line in (Path(directory) / MANIFEST_NAME).read_text(encoding="utf-8").splitlines():
        if line.strip():
            digest, name = line.split("  ", 1)
            entries[name] = digest
    return entries


def check_manifest(directory: PathLike) -> Dict[str, bool]:
    """Per-artifact hash agreement; a missing file counts as a mismatch."""
    directory = Path(directory)
    result = {}
    for name, digest in read_manifest(directory).items():
        target = directory / name
        result[name] = target.exists() and sha256_file(target) == digest
    return result
