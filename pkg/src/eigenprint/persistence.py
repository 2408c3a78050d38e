"""Bit-exact binary serialization for trained spaces and ingested databases.

Both file kinds share a fixed 53-byte little-endian header (magic, version,
dims, edge method code, four edge parameters) followed by dense float64
payloads, so corruption is detectable from length arithmetic alone.

Space file ("FPCS"): header, mean (N*K), basis U (N*K x M, row-major),
eigenvalues (M), omega (M x M, row-major).

Database file ("FPDB"): header (method code 0, parameters zeroed), data
matrix (N*K x M, row-major), then M label records: finger int32 (-1 when
unknown), impression int32 (-1 when unknown), parsed flag uint8, and the
source path as a uint16 length-prefixed UTF-8 string.
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .edges import EdgeConfig
from .eigenspace import EigenSpace, effective_rank_of
from .imaging import FingerprintDatabase, ImageLabel

__all__ = [
    "FileFormatError",
    "SPACE_MAGIC",
    "DATABASE_MAGIC",
    "FORMAT_VERSION",
    "atomic_write_bytes",
    "save_space",
    "load_space",
    "save_database",
    "load_database",
]

SPACE_MAGIC = b"FPCS"
DATABASE_MAGIC = b"FPDB"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<4sIIIIB4d")  # magic, version, N, K, M, method, 4 params
_LABEL_FIXED = struct.Struct("<iiBH")  # finger, impression, parsed, path byte length

_METHOD_CODES = {"none": 0, "sobel": 1, "canny": 2}
_METHOD_NAMES = {code: name for name, code in _METHOD_CODES.items()}


class FileFormatError(ValueError):
    """Raised when a space or database file fails structural validation."""


def atomic_write_bytes(path, payload: bytes) -> None:
    """Write via a temp file in the same directory plus rename.

    An interrupted write leaves the destination untouched; there is never a
    partial file at the final path.
    """
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(payload)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _pack_header(magic: bytes, n: int, k: int, m: int, method: int, params) -> bytes:
    return _HEADER.pack(magic, FORMAT_VERSION, n, k, m, method, *params)


def _f8(a: np.ndarray) -> bytes:
    """Row-major little-endian float64 bytes of an array."""
    return np.ascontiguousarray(a, dtype="<f8").tobytes()


def _unpack_header(data: bytes, expect_magic: bytes, path) -> tuple[int, int, int, int, tuple]:
    if len(data) < _HEADER.size:
        raise FileFormatError(f"{path}: unexpected end of file inside header")
    magic, version, n, k, m, method, p0, p1, p2, p3 = _HEADER.unpack_from(data)
    if magic != expect_magic:
        raise FileFormatError(f"{path}: bad magic {magic!r}, expected {expect_magic!r}")
    if version != FORMAT_VERSION:
        raise FileFormatError(f"{path}: unsupported version {version}")
    if n == 0 or k == 0 or m == 0:
        raise FileFormatError(f"{path}: zero dimension in header (N={n}, K={k}, M={m})")
    return n, k, m, method, (p0, p1, p2, p3)


def save_space(space: EigenSpace, path) -> None:
    """Serialize a trained space; see the module docstring for the layout."""
    cfg = space.edge_config
    header = _pack_header(
        SPACE_MAGIC,
        space.height,
        space.width,
        space.size,
        _METHOD_CODES[cfg.method],
        (
            cfg.canny_sigma,
            cfg.canny_high_percentile,
            cfg.canny_low_ratio,
            cfg.sobel_threshold_factor,
        ),
    )
    payload = header + _f8(space.mean) + _f8(space.basis) + _f8(space.eigenvalues) + _f8(space.omega)
    atomic_write_bytes(path, payload)


def load_space(path) -> EigenSpace:
    """Load and structurally validate a space file; effective rank is recomputed."""
    data = Path(path).read_bytes()
    n, k, m, method, params = _unpack_header(data, SPACE_MAGIC, path)
    if method not in _METHOD_NAMES:
        raise FileFormatError(f"{path}: unknown edge method code {method}")
    nk = n * k
    expected = _HEADER.size + 8 * (nk * (m + 1) + m * (m + 1))
    if len(data) < expected:
        raise FileFormatError(f"{path}: unexpected end of file in payload")
    if len(data) != expected:
        raise FileFormatError(f"{path}: length mismatch, {len(data)} bytes where header implies {expected}")

    floats = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).astype(np.float64)
    pos = 0
    mean = floats[pos : pos + nk].copy()
    pos += nk
    basis = floats[pos : pos + nk * m].reshape(nk, m).copy()
    pos += nk * m
    eigenvalues = floats[pos : pos + m].copy()
    pos += m
    omega = floats[pos : pos + m * m].reshape(m, m).copy()

    sigma, high_pct, low_ratio, sobel_factor = params
    cfg = EdgeConfig(
        method=_METHOD_NAMES[method],
        canny_sigma=sigma,
        canny_high_percentile=high_pct,
        canny_low_ratio=low_ratio,
        sobel_threshold_factor=sobel_factor,
    )
    return EigenSpace(
        mean=mean,
        basis=basis,
        eigenvalues=eigenvalues,
        omega=omega,
        effective_rank=effective_rank_of(eigenvalues),
        edge_config=cfg,
        height=n,
        width=k,
    )


def save_database(db: FingerprintDatabase, path) -> None:
    """Serialize an ingested database with its labels."""
    header = _pack_header(DATABASE_MAGIC, db.height, db.width, db.size, 0, (0.0, 0.0, 0.0, 0.0))
    parts = [header, _f8(db.data)]
    for lab in db.labels:
        encoded = lab.path.encode("utf-8")
        if len(encoded) > 0xFFFF:
            raise ValueError(f"path too long to store: {lab.path!r}")
        finger = -1 if lab.finger is None else int(lab.finger)
        impression = -1 if lab.impression is None else int(lab.impression)
        parts.append(_LABEL_FIXED.pack(finger, impression, 1 if lab.parsed else 0, len(encoded)))
        parts.append(encoded)
    atomic_write_bytes(path, b"".join(parts))


def load_database(path) -> FingerprintDatabase:
    """Load and structurally validate a database file."""
    data = Path(path).read_bytes()
    n, k, m, _method, _params = _unpack_header(data, DATABASE_MAGIC, path)
    nk = n * k
    matrix_end = _HEADER.size + 8 * nk * m
    if len(data) < matrix_end:
        raise FileFormatError(f"{path}: unexpected end of file in data matrix")
    matrix = (
        np.frombuffer(data, dtype="<f8", count=nk * m, offset=_HEADER.size)
        .reshape(nk, m)
        .astype(np.float64)
    )

    labels = []
    pos = matrix_end
    for _ in range(m):
        if len(data) < pos + _LABEL_FIXED.size:
            raise FileFormatError(f"{path}: unexpected end of file in label records")
        finger, impression, parsed, path_len = _LABEL_FIXED.unpack_from(data, pos)
        pos += _LABEL_FIXED.size
        if len(data) < pos + path_len:
            raise FileFormatError(f"{path}: unexpected end of file in label path")
        label_path = data[pos : pos + path_len].decode("utf-8")
        pos += path_len
        labels.append(
            ImageLabel(
                finger=None if finger < 0 else finger,
                impression=None if impression < 0 else impression,
                path=label_path,
                parsed=bool(parsed),
            )
        )
    if pos != len(data):
        raise FileFormatError(f"{path}: length mismatch, {len(data) - pos} trailing bytes")
    return FingerprintDatabase(matrix, labels, n, k)
