"""Flat binary array format and CSV cross-section export.

Layout (all little-endian):

    bytes 0-3    magic  b"GFB1"
    byte  4      dtype code: 1 = float64, 2 = complex128, 3 = uint8 (frame stacks)
    byte  5      ndim
    bytes 6-7    reserved, zero
    ndim * 8     shape, uint64 each
    ndim * 8     per-axis sample spacings, float64 each
    payload      row-major values; complex stored as interleaved (re, im)
                 float64 pairs

Frame stacks reuse the same header with ndim = 3: the leading axis is the
frame index (spacing 1.0) followed by the two detector axes.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ShapeError

MAGIC = b"GFB1"

_DTYPE_CODES = {1: np.float64, 2: np.complex128, 3: np.uint8}
_CODE_FOR_KIND = {"f": 1, "c": 2, "u": 3}

__all__ = ["MAGIC", "write_array", "read_array", "write_csv"]


def write_array(path, values: np.ndarray, spacings: Sequence[float]) -> Path:
    """Serialize an array plus per-axis spacings to the flat binary format."""
    path = Path(path)
    values = np.ascontiguousarray(values)
    if values.dtype.kind not in _CODE_FOR_KIND:
        values = values.astype(np.complex128 if values.dtype.kind == "c" else np.float64)
    code = _CODE_FOR_KIND[values.dtype.kind]
    values = values.astype({1: "<f8", 2: "<c16", 3: "u1"}[code], copy=False)
    spacings = tuple(float(s) for s in spacings)
    if len(spacings) != values.ndim:
        raise ShapeError(f"{len(spacings)} spacings for a {values.ndim}-dimensional array")
    header = struct.pack("<4sBBH", MAGIC, code, values.ndim, 0)
    header += struct.pack(f"<{values.ndim}Q", *values.shape)
    header += struct.pack(f"<{values.ndim}d", *spacings)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(values.tobytes())
    return path


def read_array(path) -> tuple[np.ndarray, tuple[float, ...]]:
    """Read back an array written by :func:`write_array`.

    Returns ``(values, spacings)``.
    """
    with open(path, "rb") as fh:
        magic, code, ndim, _ = struct.unpack("<4sBBH", fh.read(8))
        if magic != MAGIC:
            raise ShapeError(f"{path}: bad magic {magic!r}, not a grid-array file")
        if code not in _DTYPE_CODES:
            raise ShapeError(f"{path}: unknown dtype code {code}")
        shape = struct.unpack(f"<{ndim}Q", fh.read(8 * ndim))
        spacings = struct.unpack(f"<{ndim}d", fh.read(8 * ndim))
        dtype = {1: "<f8", 2: "<c16", 3: "u1"}[code]
        count = int(np.prod(shape))
        data = np.frombuffer(fh.read(), dtype=dtype, count=count)
        if data.size != count:
            raise ShapeError(f"{path}: truncated payload")
    return data.reshape(shape).astype(_DTYPE_CODES[code], copy=False), spacings


def write_csv(path, coords: np.ndarray, values: np.ndarray, labels=("coordinate", "value")) -> Path:
    """Write a 1D cross-section as a two-column (or three for complex) CSV."""
    path = Path(path)
    coords = np.asarray(coords, dtype=np.float64)
    values = np.asarray(values)
    if coords.shape != values.shape:
        raise ShapeError(f"coordinate/value length mismatch: {coords.shape} vs {values.shape}")
    if values.dtype.kind == "c":
        columns = np.column_stack([coords, values.real, values.imag])
        names = (labels[0], f"{labels[1]}_re", f"{labels[1]}_im")
    else:
        columns = np.column_stack([coords, values.astype(np.float64)])
        names = labels
    np.savetxt(path, columns, delimiter=",", header=",".join(names), comments="", fmt="%.17g")
    return path
