"""Casimir-preserving solver for ideal two-dimensional hydrodynamics on the sphere.

The fluid state is an N x N skew-Hermitian traceless matrix evolved by an
isospectral midpoint scheme; the quantized Laplacian splits into tridiagonal
blocks over matrix diagonals, which drives both the O(N^2) stream solve and
the construction of the spectral basis.
"""

from .basis import (
    HarmonicCoefficients,
    QuantizedBasis,
    compute_basis,
    extract,
    load_basis,
    project,
    save_basis,
    wigner_basis_oracle,
)
from .diagnostics import (
    DiagnosticsRecord,
    casimir_drift,
    energy_spectrum,
    evaluate_on_grid,
    hamiltonian,
    hamiltonian_from_coeffs,
)
from .driver import SimConfig, random_initial_condition, run
from .integrator import (
    FixedPointError,
    StepperState,
    casimirs,
    commutator_scale,
    default_time_step,
    fixed_point_solve,
    midpoint_step,
    midpoint_step_info,
)
from .laplacian import (
    LaplacianBlock,
    LaplacianOperator,
    StructureError,
    apply_laplacian,
    build_block,
    build_operator,
    solve_stream,
    spectral_norm,
    validate_vorticity,
)
from .wigner import threej

__version__ = "0.1.0"

__all__ = [
    "HarmonicCoefficients",
    "QuantizedBasis",
    "compute_basis",
    "extract",
    "load_basis",
    "project",
    "save_basis",
    "wigner_basis_oracle",
    "DiagnosticsRecord",
    "casimir_drift",
    "energy_spectrum",
    "evaluate_on_grid",
    "hamiltonian",
    "hamiltonian_from_coeffs",
    "SimConfig",
    "random_initial_condition",
    "run",
    "FixedPointError",
    "StepperState",
    "casimirs",
    "commutator_scale",
    "default_time_step",
    "fixed_point_solve",
    "midpoint_step",
    "midpoint_step_info",
    "LaplacianBlock",
    "LaplacianOperator",
    "StructureError",
    "apply_laplacian",
    "build_block",
    "build_operator",
    "solve_stream",
    "spectral_norm",
    "validate_vorticity",
    "threej",
]
