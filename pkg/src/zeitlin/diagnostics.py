"""Conserved quantities, kinetic-energy spectra, and grid sampling.

Normalization: the basis is trace-orthonormal, so with coefficients
w_{lm} the discrete enstrophy is sum |w_{lm}|^2 and the kinetic energy
decomposes by spherical-harmonic degree as

    E(l) = sum_{m=-l}^{l} |w_{lm}|^2 / (2 l (l+1)),     K = sum_l E(l).

The trace form H = -1/2 Re Tr(W^H P) with lap(P) = W equals the same sum
(the overall physical normalization constant is fixed to 1; scaled
spectra E(l)/K do not depend on it).

Grid evaluation uses orthonormal complex spherical harmonics through the
fully normalized associated-Legendre recurrence, which keeps every value
O(1) and avoids the factorial overflow of the unnormalized functions.
All functions here are pure and operate on snapshots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .basis import HarmonicCoefficients
from .laplacian import LaplacianOperator, solve_stream

__all__ = [
    "DiagnosticsRecord",
    "hamiltonian",
    "hamiltonian_from_coeffs",
    "energy_spectrum",
    "casimir_drift",
    "evaluate_on_grid",
]

#: Baselines smaller than this are treated as zero and the drift for that
#: Casimir is reported as an absolute error (flagged in the record).
CASIMIR_BASELINE_FLOOR = 1e-14


@dataclass
class DiagnosticsRecord:
    """One sample of the conserved-quantity and spectrum diagnostics.

    ``casimir_rel_err[j]`` is |C_k(t) - C_k(0)| / |C_k(0)| for k = j + 2;
    for k listed in ``casimir_abs_fallback`` the baseline was below the
    zero floor and the entry holds the absolute error instead.
    """

    time: float
    casimir_rel_err: np.ndarray | None = None
    casimir_abs_fallback: tuple[int, ...] = ()
    hamiltonian: float | None = None
    mean_energy: float | None = None
    spectrum: np.ndarray | None = field(default=None, repr=False)


def hamiltonian(w: np.ndarray, op: LaplacianOperator | None = None) -> float:
    """Discrete kinetic energy H = -1/2 Re Tr(W^H P), nonnegative."""
    p = solve_stream(w, op)
    return -0.5 * float(np.real(np.vdot(w, p)))


def hamiltonian_from_coeffs(coeffs: HarmonicCoefficients) -> float:
    """Coefficient-space twin of `hamiltonian` (equal by the basis Parseval identity)."""
    return float(np.sum(energy_spectrum(coeffs)))


def energy_spectrum(coeffs: HarmonicCoefficients) -> np.ndarray:
    """Energy per degree, E[l] for l = 0..N-1 with E[0] = 0 (no mean flow)."""
    n = coeffs.n
    power = np.zeros(n)
    for m in range(n):
        ls = np.arange(max(m, 1), n)
        power[ls] += np.abs(coeffs.pos[m][: ls.size]) ** 2
        if m >= 1:
            power[ls] += np.abs(coeffs.neg[m][: ls.size]) ** 2
    l = np.arange(n, dtype=np.float64)
    out = np.zeros(n)
    out[1:] = power[1:] / (2.0 * l[1:] * (l[1:] + 1.0))
    return out


def casimir_drift(
    series: list[tuple[float, np.ndarray]],
) -> list[DiagnosticsRecord]:
    """Relative drift of C_2..C_kmax against the first entry of the series.

    Input tuples hold (time, casimir vector for k = 1..k_max) as produced
    by `casimirs`.  Baselines below the zero floor fall back to absolute
    error and are flagged.
    """
    if not series:
        return []
    _, c0 = series[0]
    c0 = np.asarray(c0, dtype=np.float64)
    if c0.size < 2:
        raise ValueError("series must carry Casimirs up to k >= 2")
    base = c0[1:]
    fallback = tuple(k + 2 for k in np.flatnonzero(np.abs(base) < CASIMIR_BASELINE_FLOOR))
    denom = np.where(np.abs(base) < CASIMIR_BASELINE_FLOOR, 1.0, np.abs(base))
    records = []
    for time, ck in series:
        err = np.abs(np.asarray(ck, dtype=np.float64)[1:] - base) / denom
        records.append(
            DiagnosticsRecord(time=time, casimir_rel_err=err, casimir_abs_fallback=fallback)
        )
    return records


def _legendre_accumulate(
    coeffs: HarmonicCoefficients, theta: np.ndarray, l_max: int
) -> np.ndarray:
    """G[m] (theta) = sum_l w_{lm} P-bar_{lm}(cos theta) for m = 0..l_max."""
    n = coeffs.n
    ct = np.cos(theta)
    st = np.sin(theta)
    g = np.zeros((theta.size, l_max + 1), dtype=np.complex128)

    pmm = np.full(theta.size, 1.0 / math.sqrt(4.0 * math.pi))
    for m in range(l_max + 1):
        if m > 0:
            pmm = -math.sqrt((2.0 * m + 1.0) / (2.0 * m)) * st * pmm
        cm = coeffs.pos[m]
        lo = max(m, 1)

        def add(l: int, p: np.ndarray) -> None:
            if lo <= l <= l_max:
                g[:, m] += cm[l - lo] * p

        p_prev = pmm  # l = m
        add(m, p_prev)
        if m + 1 > l_max:
            continue
        p_curr = math.sqrt(2.0 * m + 3.0) * ct * pmm  # l = m + 1
        add(m + 1, p_curr)
        for l in range(m + 2, min(l_max, n - 1) + 1):
            a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = math.sqrt(
                ((2.0 * l + 1.0) * (l - 1.0 + m) * (l - 1.0 - m))
                / ((2.0 * l - 3.0) * (l * l - m * m))
            )
            p_next = a * ct * p_curr - b * p_prev
            add(l, p_next)
            p_prev, p_curr = p_curr, p_next
    return g


def evaluate_on_grid(
    coeffs: HarmonicCoefficients,
    n_lat: int,
    n_lon: int,
    l_max: int | None = None,
    reality_tol: float = 1e-12,
) -> np.ndarray:
    """Sample the field sum_{l,m} w_{lm} Y_lm on an equiangular grid.

    The grid is theta_i = i pi / (n_lat - 1) (poles included) by
    phi_j = 2 pi j / n_lon.  Coefficients must satisfy the reality
    condition; the returned field is real, shape (n_lat, n_lon).
    ``l_max`` truncates the rendered degrees (defaults to N - 1).
    """
    if n_lat < 2 or n_lon < 2:
        raise ValueError(f"grid must be at least 2 x 2, got {n_lat} x {n_lon}")
    n = coeffs.n
    if l_max is None:
        l_max = n - 1
    if not 1 <= l_max <= n - 1:
        raise ValueError(f"l_max={l_max} out of range 1..{n - 1}")
    dev = coeffs.reality_violation()
    if dev > reality_tol * max(1.0, coeffs.max_abs()):
        raise ValueError(
            f"coefficients violate the reality condition (deviation {dev:.3e}); "
            "grid sampling is defined for real fields"
        )

    theta = np.linspace(0.0, math.pi, n_lat)
    phi = 2.0 * math.pi * np.arange(n_lon) / n_lon
    g = _legendre_accumulate(coeffs, theta, l_max)

    # m = 0 once, m >= 1 together with the conjugate order
    weights = np.full(l_max + 1, 2.0)
    weights[0] = 1.0
    phases = np.exp(1j * np.outer(np.arange(l_max + 1), phi)) * weights[:, None]
    return np.real(g @ phases)
