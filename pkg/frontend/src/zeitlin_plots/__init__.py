"""Offline figure rendering for the spherical hydrodynamics solver outputs."""

from .plots import fit_loglog_slope, plot_casimir_drift, plot_spectrum, plot_vorticity_map
from .readers import FormatError, GridField, read_diagnostics_csv, read_grid, read_spectrum_csv

__version__ = "0.1.0"

__all__ = [
    "fit_loglog_slope",
    "plot_casimir_drift",
    "plot_spectrum",
    "plot_vorticity_map",
    "FormatError",
    "GridField",
    "read_diagnostics_csv",
    "read_grid",
    "read_spectrum_csv",
]
