"""Raw binary tensor files used for spectrograms, embeddings and checkpoints.

Layout: a 16-byte header (magic ``MSPC``, u32 rows, u32 cols, u32 reserved,
all little-endian) followed by row-major little-endian float32 values.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"MSPC"
_HEADER = struct.Struct("<4sIII")


class TensorFileError(ValueError):
    """Raised when a tensor file is malformed or truncated."""


def write_tensor(path: str | Path, values: np.ndarray) -> None:
    """Write a 2-D float array to ``path`` in MSPC layout."""
    arr = np.ascontiguousarray(values, dtype="<f4")
    if arr.ndim != 2:
        raise TensorFileError(f"expected a 2-D array, got shape {arr.shape}")
    rows, cols = arr.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, rows, cols, 0))
        fh.write(arr.tobytes(order="C"))


def read_tensor(path: str | Path) -> np.ndarray:
    """Read an MSPC tensor file back into a float32 array of shape (rows, cols)."""
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise TensorFileError(f"{path}: truncated header")
        magic, rows, cols, _ = _HEADER.unpack(header)
        if magic != MAGIC:
            raise TensorFileError(f"{path}: bad magic {magic!r}")
        payload = fh.read(rows * cols * 4)
    if len(payload) != rows * cols * 4:
        raise TensorFileError(f"{path}: expected {rows * cols} float32 values")
    return np.frombuffer(payload, dtype="<f4").reshape(rows, cols).copy()
