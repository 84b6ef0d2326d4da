"""Deterministic array file I/O: NPY v1.0 matrices and PGM heatmaps.

The reader and writer are self-contained so the on-disk contract stays
explicit: NPY version 1.0 only, C order, little-endian, 1-D or 2-D,
dtype in {f32, f64, i64}.  Malformed input is always rejected, never
truncated into a partial array.
"""

from __future__ import annotations

import ast
from typing import NamedTuple

import numpy as np

from .errors import (
    FortranOrderUnsupported,
    InvalidParameter,
    IoFailure,
    MalformedHeader,
    NonFiniteInput,
    UnsupportedDtype,
    UnsupportedRank,
)

_MAGIC = b"\x93NUMPY"

# dtype token <-> NPY descr string
_DESCR_OF = {"f32": "<f4", "f64": "<f8", "i64": "<i8"}
_TOKEN_OF = {v: k for k, v in _DESCR_OF.items()}


class LoadedMatrix(NamedTuple):
    """An array promoted to f64/i64 plus its on-disk dtype token."""

    data: np.ndarray
    dtype: str


def read_matrix(path) -> LoadedMatrix:
    """Read a 1-D or 2-D NPY v1.0 array.

    f32 payloads are promoted to f64; f64 and i64 round-trip bit-exactly.
    """
    try:
        with open(path, "rb") as fh:
            buf = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc

    if len(buf) < 10 or buf[:6] != _MAGIC:
        raise MalformedHeader(f"{path}: missing NPY magic bytes")
    major, minor = buf[6], buf[7]
    if (major, minor) != (1, 0):
        raise MalformedHeader(f"{path}: NPY version {major}.{minor} not supported (need 1.0)")
    header_len = int.from_bytes(buf[8:10], "little")
    data_start = 10 + header_len
    if data_start > len(buf):
        raise MalformedHeader(f"{path}: header length {header_len} exceeds file size")

    try:
        header = ast.literal_eval(buf[10:data_start].decode("latin-1").strip())
    except (ValueError, SyntaxError) as exc:
        raise MalformedHeader(f"{path}: header is not a Python literal dict") from exc
    if not isinstance(header, dict) or set(header) != {"descr", "fortran_order", "shape"}:
        raise MalformedHeader(f"{path}: header keys must be descr/fortran_order/shape")

    if header["fortran_order"]:
        raise FortranOrderUnsupported(f"{path}: Fortran-ordered arrays are not supported")
    descr = header["descr"]
    if descr not in _TOKEN_OF:
        raise UnsupportedDtype(f"{path}: dtype {descr!r} not in {sorted(_TOKEN_OF)}")
    shape = header["shape"]
    if (
        not isinstance(shape, tuple)
        or not all(isinstance(s, int) and s >= 0 for s in shape)
    ):
        raise MalformedHeader(f"{path}: shape {shape!r} is not a tuple of sizes")
    if len(shape) not in (1, 2):
        raise UnsupportedRank(f"{path}: rank {len(shape)} arrays are not supported")

    dt = np.dtype(descr)
    expected = int(np.prod(shape, dtype=np.int64)) * dt.itemsize
    actual = len(buf) - data_start
    if actual != expected:
        raise MalformedHeader(
            f"{path}: payload has {actual} bytes, header implies {expected}"
        )
    raw = np.frombuffer(buf, dtype=dt, offset=data_start).reshape(shape)
    promoted = raw.astype(np.int64 if descr == "<i8" else np.float64)
    return LoadedMatrix(promoted, _TOKEN_OF[descr])


def _header_bytes(descr: str, shape: tuple[int, ...]) -> bytes:
    header = "{'descr': '%s', 'fortran_order': False, 'shape': %s, }" % (
        descr,
        str(tuple(int(s) for s in shape)),
    )
    # Pad with spaces so magic+version+length+header is a 64-byte multiple,
    # with a single trailing newline.
    unpadded = len(_MAGIC) + 2 + 2 + len(header) + 1
    padding = (64 - unpadded % 64) % 64
    header_ascii = (header + " " * padding + "\n").encode("latin-1")
    if len(header_ascii) > 0xFFFF:
        raise InvalidParameter("header too long for NPY version 1.0")
    return (
        _MAGIC
        + bytes((1, 0))
        + len(header_ascii).to_bytes(2, "little")
        + header_ascii
    )


def write_matrix(path, data, dtype: str = "f64") -> None:
    """Write a 1-D or 2-D array as NPY v1.0 (C order, little-endian)."""
    if dtype not in _DESCR_OF:
        raise InvalidParameter(f"dtype must be one of {sorted(_DESCR_OF)}, got {dtype!r}")
    a = np.asarray(data)
    if a.ndim not in (1, 2):
        raise UnsupportedRank(f"can only write 1-D or 2-D arrays, got rank {a.ndim}")
    descr = _DESCR_OF[dtype]
    payload = np.ascontiguousarray(a.astype(np.dtype(descr)))
    try:
        with open(path, "wb") as fh:
            fh.write(_header_bytes(descr, payload.shape))
            fh.write(payload.tobytes())
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def write_heatmap(path, matrix, normalization: str = "minmax") -> None:
    """Write a matrix as an 8-bit binary PGM image, one pixel per cell.

    Rows map to source indices and columns to target frames.  With
    ``minmax`` the values are scaled linearly to 0..255; ``log`` treats
    the input as log-domain, exponentiates relative to its maximum and
    then scales, which keeps contrast near the high-probability cells.
    A constant matrix renders as all-black.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise InvalidParameter(f"heatmap input must be a non-empty 2-D matrix, got {m.shape}")
    if not np.isfinite(m).all():
        raise NonFiniteInput("heatmap input contains NaN or Inf")
    if normalization == "log":
        m = np.exp(m - m.max())
    elif normalization != "minmax":
        raise InvalidParameter(f"normalization must be 'minmax' or 'log', got {normalization!r}")
    lo = m.min()
    hi = m.max()
    if hi > lo:
        pixels = np.rint((m - lo) / (hi - lo) * 255.0).astype(np.uint8)
    else:
        pixels = np.zeros(m.shape, dtype=np.uint8)
    header = f"P5\n{m.shape[1]} {m.shape[0]}\n255\n".encode("ascii")
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(pixels.tobytes())
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
