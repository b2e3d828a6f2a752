"""Static figure rendering for spectra, Casimir drift, and vorticity maps.

Uses matplotlib's object-oriented API directly (no pyplot state), so the
tool runs headless.  Each renderer returns the quantities a caller might
assert on (fitted slopes, the plotted field) in addition to writing the
image.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.figure import Figure

from .readers import GridField, read_diagnostics_csv, read_grid, read_spectrum_csv

#: Values below this are clipped so all-zero drift series still render on
#: the logarithmic axis as a flat line at the plot floor.
DRIFT_FLOOR = 1e-18


def fit_loglog_slope(
    degrees: np.ndarray,
    energies: np.ndarray,
    l_lo: int | None = None,
    l_hi: int | None = None,
) -> float:
    """Least-squares slope of log E against log l over a degree window."""
    mask = energies > 0.0
    if l_lo is not None:
        mask &= degrees >= l_lo
    if l_hi is not None:
        mask &= degrees <= l_hi
    if np.count_nonzero(mask) < 2:
        raise ValueError("need at least two positive spectrum points to fit a slope")
    return float(np.polyfit(np.log(degrees[mask]), np.log(energies[mask]), 1)[0])


def plot_spectrum(
    paths: list,
    out,
    fit_range: tuple[int, int] | None = None,
    reference_slope: float = -3.0,
) -> list[tuple[str, float]]:
    """Log-log scaled spectra E(l)/K per input file, with a guide line.

    Returns one (label, fitted slope) pair per curve; the fit covers
    ``fit_range`` when given, otherwise every positive point.
    """
    if not paths:
        raise ValueError("at least one spectrum file is required")
    fig = Figure(figsize=(6.0, 4.5))
    ax = fig.subplots()
    results = []
    anchor = None
    for path in paths:
        degrees, energies = read_spectrum_csv(path)
        total = float(energies.sum())
        if total <= 0.0:
            raise ValueError(f"{path}: spectrum carries no energy")
        scaled = energies / total
        label = Path(path).stem
        lo, hi = fit_range if fit_range else (None, None)
        slope = fit_loglog_slope(degrees, scaled, lo, hi)
        results.append((label, slope))
        positive = scaled > 0.0
        ax.loglog(degrees[positive], scaled[positive], label=f"{label} (slope {slope:.2f})")
        if anchor is None and np.any(positive):
            mid = np.flatnonzero(positive)[len(np.flatnonzero(positive)) // 2]
            anchor = (float(degrees[mid]), float(scaled[mid]))
    if anchor is not None:
        l_all = np.geomspace(1.0, max(float(read_spectrum_csv(p)[0].max()) for p in paths), 64)
        guide = anchor[1] * (l_all / anchor[0]) ** reference_slope
        ax.loglog(l_all, guide, "k--", linewidth=1.0, label=f"l^{reference_slope:g}")
    ax.set_xlabel("spherical harmonic degree l")
    ax.set_ylabel("E(l) / K")
    ax.legend(fontsize=8)
    fig.savefig(out, dpi=150, bbox_inches="tight")
    return results


def plot_casimir_drift(path, out, floor: float = DRIFT_FLOOR) -> None:
    """Relative Casimir errors against time on a logarithmic axis."""
    table = read_diagnostics_csv(path)
    fig = Figure(figsize=(6.0, 4.5))
    ax = fig.subplots()
    time = table["time"]
    for name in table:
        if name.startswith("C") and name.endswith("_rel"):
            ax.semilogy(time, np.maximum(table[name], floor), label=name)
    ax.set_xlabel("time")
    ax.set_ylabel("relative Casimir error")
    ax.set_ylim(bottom=floor / 2.0)
    ax.legend(fontsize=8)
    fig.savefig(out, dpi=150, bbox_inches="tight")


def plot_vorticity_map(path, out, vmax: float | None = None) -> GridField:
    """Plate-carree rendering of one grid snapshot with a symmetric range."""
    grid = read_grid(path)
    limit = vmax if vmax is not None else float(np.max(np.abs(grid.data))) or 1.0
    fig = Figure(figsize=(8.0, 4.2))
    ax = fig.subplots()
    image = ax.imshow(
        grid.data,
        extent=(0.0, 360.0, 180.0, 0.0),
        cmap="RdBu_r",
        vmin=-limit,
        vmax=limit,
        aspect="auto",
    )
    ax.set_xlabel("longitude (deg)")
    ax.set_ylabel("colatitude (deg)")
    ax.set_title(f"vorticity, t = {grid.time:g}")
    fig.colorbar(image, ax=ax, shrink=0.85)
    fig.savefig(out, dpi=150, bbox_inches="tight")
    return grid
