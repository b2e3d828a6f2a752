"""On-disk formats: basis cache, checkpoints, grid snapshots, CSV tables.

Binary layouts (all little-endian):

basis cache       magic "ZEB1", version u32, N u32, then for each m
                  ascending and each l ascending the stored eigenvector
                  as f64 values (length N - m).

checkpoint        magic "ZCK1", version u32, N u32, step u64, time f64,
                  seed u64, rng-state blob (u32 length + bytes), then the
                  N^2 complex state entries as interleaved f64 pairs in
                  column-major order.

grid snapshot     magic "ZGD1", n_lat u32, n_lon u32, time f64, then
                  row-major f64 samples (n_lat rows of n_lon values).

CSV files are UTF-8 with a header row; floats are written with 17
significant digits so a byte-identical rerun produces byte-identical
files.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "FileFormatError",
    "BASIS_MAGIC",
    "CHECKPOINT_MAGIC",
    "GRID_MAGIC",
    "Checkpoint",
    "write_basis_cache",
    "read_basis_cache",
    "write_checkpoint",
    "read_checkpoint",
    "write_grid",
    "read_grid",
    "format_float",
]

BASIS_MAGIC = b"ZEB1"
CHECKPOINT_MAGIC = b"ZCK1"
GRID_MAGIC = b"ZGD1"
FORMAT_VERSION = 1


class FileFormatError(ValueError):
    """A file does not conform to its declared binary layout."""


def format_float(x: float) -> str:
    return f"{float(x):.17g}"


def _read_exact(fh, count: int, what: str) -> bytes:
    data = fh.read(count)
    if len(data) != count:
        raise FileFormatError(f"truncated file while reading {what}")
    return data


def _check_magic(fh, magic: bytes, path) -> None:
    found = fh.read(len(magic))
    if found != magic:
        raise FileFormatError(f"{path}: bad magic {found!r}, expected {magic!r}")


def _atomic_write(path, payload: bytes) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(payload)
    tmp.replace(path)


# ---------------------------------------------------------------------------
# basis cache


def write_basis_cache(path, n: int, vectors: list[np.ndarray]) -> None:
    parts = [BASIS_MAGIC, struct.pack("<II", FORMAT_VERSION, n)]
    for m in range(n):
        block = vectors[m]
        for col in range(block.shape[1]):
            parts.append(np.ascontiguousarray(block[:, col], dtype="<f8").tobytes())
    _atomic_write(path, b"".join(parts))


def read_basis_cache(path) -> tuple[int, list[np.ndarray]]:
    with open(path, "rb") as fh:
        _check_magic(fh, BASIS_MAGIC, path)
        version, n = struct.unpack("<II", _read_exact(fh, 8, "header"))
        if version != FORMAT_VERSION:
            raise FileFormatError(f"{path}: unsupported version {version}")
        if n < 2:
            raise FileFormatError(f"{path}: invalid truncation size {n}")
        vectors = []
        for m in range(n):
            size = n - m
            n_l = n - max(m, 1)
            raw = _read_exact(fh, 8 * size * n_l, f"vectors for m={m}")
            block = np.frombuffer(raw, dtype="<f8").reshape(n_l, size).T
            vectors.append(np.ascontiguousarray(block))
        if fh.read(1):
            raise FileFormatError(f"{path}: trailing bytes after basis data")
    return n, vectors


# ---------------------------------------------------------------------------
# checkpoints


@dataclass
class Checkpoint:
    """Full restart state: restoring it reproduces the uninterrupted run."""

    step_index: int
    time: float
    n: int
    seed: int
    rng_state: bytes
    w: np.ndarray


def write_checkpoint(path, cp: Checkpoint) -> None:
    n = cp.w.shape[0]
    header = CHECKPOINT_MAGIC + struct.pack(
        "<IIQdQI",
        FORMAT_VERSION,
        n,
        cp.step_index,
        cp.time,
        cp.seed,
        len(cp.rng_state),
    )
    body = cp.w.ravel(order="F").astype("<c16").tobytes()
    _atomic_write(path, header + cp.rng_state + body)


def read_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as fh:
        _check_magic(fh, CHECKPOINT_MAGIC, path)
        version, n, step, time, seed, blob_len = struct.unpack(
            "<IIQdQI", _read_exact(fh, 36, "header")
        )
        if version != FORMAT_VERSION:
            raise FileFormatError(f"{path}: unsupported version {version}")
        rng_state = _read_exact(fh, blob_len, "rng state")
        raw = _read_exact(fh, 16 * n * n, "state entries")
        w = np.frombuffer(raw, dtype="<c16").reshape(n, n, order="F").copy()
        if fh.read(1):
            raise FileFormatError(f"{path}: trailing bytes after state entries")
    return Checkpoint(step_index=step, time=time, n=n, seed=seed, rng_state=rng_state, w=w)


# ---------------------------------------------------------------------------
# grid snapshots


def write_grid(path, field: np.ndarray, time: float) -> None:
    if field.ndim != 2:
        raise ValueError(f"grid field must be 2-D, got shape {field.shape}")
    n_lat, n_lon = field.shape
    header = GRID_MAGIC + struct.pack("<IId", n_lat, n_lon, time)
    _atomic_write(path, header + np.ascontiguousarray(field, dtype="<f8").tobytes())


def read_grid(path) -> tuple[np.ndarray, float]:
    with open(path, "rb") as fh:
        _check_magic(fh, GRID_MAGIC, path)
        n_lat, n_lon, time = struct.unpack("<IId", _read_exact(fh, 16, "header"))
        if n_lat < 2 or n_lon < 2:
            raise FileFormatError(f"{path}: invalid grid shape {n_lat} x {n_lon}")
        raw = _read_exact(fh, 8 * n_lat * n_lon, "grid samples")
        field = np.frombuffer(raw, dtype="<f8").reshape(n_lat, n_lon).copy()
        if fh.read(1):
            raise FileFormatError(f"{path}: trailing bytes after grid samples")
    return field, time
