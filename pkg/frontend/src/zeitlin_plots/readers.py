"""Readers for the simulator's output files, validating them byte for byte.

Formats (little-endian throughout):

    spectrum CSV      header "l,E_l", rows of integer degree and energy
    diagnostics CSV   header "time,H,K,C2_rel,...", one sample per row
    grid snapshot     magic "ZGD1", n_lat u32, n_lon u32, time f64, then
                      row-major f64 samples, exactly n_lat * n_lon of them
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

GRID_MAGIC = b"ZGD1"


class FormatError(ValueError):
    """Input file does not conform to its declared layout."""


@dataclass
class GridField:
    n_lat: int
    n_lon: int
    time: float
    data: np.ndarray


def read_spectrum_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Return (degrees, energies) from a spectrum file."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != "l,E_l":
        raise FormatError(f"{path}: expected header 'l,E_l'")
    rows = [line for line in lines[1:] if line.strip()]
    if not rows:
        raise FormatError(f"{path}: no spectrum rows")
    degrees, energies = [], []
    for idx, line in enumerate(rows, start=2):
        parts = line.split(",")
        if len(parts) != 2:
            raise FormatError(f"{path}:{idx}: expected 'l,E_l', got {line!r}")
        try:
            l = int(parts[0])
            e = float(parts[1])
        except ValueError as exc:
            raise FormatError(f"{path}:{idx}: {exc}") from exc
        if l < 1:
            raise FormatError(f"{path}:{idx}: degree must be positive, got {l}")
        degrees.append(l)
        energies.append(e)
    return np.asarray(degrees), np.asarray(energies)


def read_diagnostics_csv(path) -> dict[str, np.ndarray]:
    """Return the diagnostics table as named columns."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise FormatError(f"{path}: empty diagnostics file")
    header = [name.strip() for name in lines[0].split(",")]
    if header[:3] != ["time", "H", "K"]:
        raise FormatError(f"{path}: expected columns time,H,K,..., got {lines[0]!r}")
    if not any(name.startswith("C") and name.endswith("_rel") for name in header):
        raise FormatError(f"{path}: no Casimir drift columns present")
    table: list[list[float]] = []
    for idx, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(header):
            raise FormatError(f"{path}:{idx}: expected {len(header)} fields")
        try:
            table.append([float(p) for p in parts])
        except ValueError as exc:
            raise FormatError(f"{path}:{idx}: {exc}") from exc
    if not table:
        raise FormatError(f"{path}: no sample rows")
    data = np.asarray(table)
    return {name: data[:, j] for j, name in enumerate(header)}


def read_grid(path) -> GridField:
    """Read one grid snapshot, requiring exact byte-level compliance."""
    raw = Path(path).read_bytes()
    if len(raw) < 20:
        raise FormatError(f"{path}: truncated header")
    if raw[:4] != GRID_MAGIC:
        raise FormatError(f"{path}: bad magic {raw[:4]!r}, expected {GRID_MAGIC!r}")
    n_lat, n_lon, time = struct.unpack("<IId", raw[4:20])
    if n_lat < 2 or n_lon < 2:
        raise FormatError(f"{path}: invalid grid shape {n_lat} x {n_lon}")
    expected = 20 + 8 * n_lat * n_lon
    if len(raw) != expected:
        raise FormatError(
            f"{path}: payload is {len(raw)} bytes, layout requires exactly {expected}"
        )
    data = np.frombuffer(raw[20:], dtype="<f8").reshape(n_lat, n_lon).copy()
    return GridField(n_lat=n_lat, n_lon=n_lon, time=time, data=data)
