"""Quantized spherical Laplacian via its tridiagonal splitting.

The operator acts independently on the diagonals of an N x N matrix.  On
the m-th sub-diagonal (m = 0 is the main diagonal) its restriction is a
real symmetric tridiagonal matrix of size N - m with entries

    diag[i]    = 2 (s (2i + 1 + m) - i (i + m)),          s = (N - 1) / 2
    offdiag[i] = -sqrt((i+m+1)(N-1-i-m)) sqrt((i+1)(N-1-i))

whose eigenvalues are exactly l(l+1) for l = m, ..., N-1.  Blocks are
stored in this positive semidefinite form; the physical operator carries
an overall minus sign so that basis modes satisfy lap(T_lm) = -l(l+1) T_lm
and the stream solve reproduces the familiar psi = -omega / (l(l+1)) mode
relation of the Laplace-Beltrami operator.

For speed, the N independent per-diagonal systems are processed in a
sheared layout S[i, m] = W[i, i - m] (row index i, diagonal index m), in
which every forward/backward substitution step and the operator stencil
itself become contiguous row operations vectorized across all diagonals
at once, and shear/unshear are contiguous row copies.  All blocks are
LDL^T-factorized once per size and reused across solves.  The m = 0 block
is singular along the constant vector (the l = 0 mode); its leading
principal (N-1) x (N-1) submatrix is positive definite and is the one
factorized, with the right-hand side projected off the null mode and the
trace gauge restored after the solve.

Operators are immutable after construction and safe to share across
threads; the per-diagonal solves are independent of each other.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
import scipy.linalg.lapack as lapack

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is an optional accelerator
    njit = None

__all__ = [
    "VorticityMatrix",
    "LaplacianBlock",
    "LaplacianOperator",
    "StructureError",
    "build_block",
    "build_operator",
    "apply_laplacian",
    "solve_stream",
    "skewness_residual",
    "trace_residual",
    "validate_vorticity",
    "spectral_norm",
]

#: An N x N complex skew-Hermitian traceless matrix: the discrete vorticity
#: state (and the stream matrix, which plays the same structural role).
#: Plain ndarrays are used; ``validate_vorticity`` checks the invariants.
VorticityMatrix = np.ndarray

#: Relative tolerance for trace/skewness validation of inputs, one order
#: above the structural drift observed in long runs.
STRUCTURE_TOL = 1e-10


class StructureError(ValueError):
    """An input matrix violates a structural invariant (skewness or trace)."""


def skewness_residual(w: VorticityMatrix) -> float:
    """Relative Frobenius norm of the Hermitian part, ||W + W^H|| / ||W||.

    Accumulated over row panels so the transposed read stays cache-sized.
    """
    nrm = np.linalg.norm(w)
    if nrm == 0.0:
        return 0.0
    block = 256
    n = w.shape[0]
    buf = _scratch_buffer("skew_panel", (min(block, n), n)) if n > 8 else None
    acc = 0.0
    for i0 in range(0, n, block):
        i1 = min(i0 + block, n)
        if buf is not None:
            panel = buf[: i1 - i0, :]
            np.conjugate(w[:, i0:i1].T, out=panel)
            panel += w[i0:i1, :]
        else:
            panel = w[i0:i1, :] + w[:, i0:i1].conj().T
        acc += float(np.real(np.vdot(panel, panel)))
    return math.sqrt(acc) / float(nrm)


def trace_residual(w: VorticityMatrix) -> float:
    """Relative trace magnitude, |Tr W| / ||W||_F."""
    nrm = np.linalg.norm(w)
    if nrm == 0.0:
        return 0.0
    return float(abs(np.trace(w)) / nrm)


def validate_vorticity(w: VorticityMatrix, tol: float = STRUCTURE_TOL) -> None:
    """Raise StructureError unless ``w`` is square, skew-Hermitian, traceless."""
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise StructureError(f"expected a square matrix, got shape {w.shape}")
    r = skewness_residual(w)
    if r > tol:
        raise StructureError(f"matrix is not skew-Hermitian: residual {r:.3e} > {tol:.1e}")
    r = trace_residual(w)
    if r > tol:
        raise StructureError(f"matrix is not traceless: residual {r:.3e} > {tol:.1e}")


def spectral_norm(w: np.ndarray) -> float:
    """Largest singular value of a skew-Hermitian matrix.

    Computed as the largest |eigenvalue| of the Hermitian matrix iW;
    O(N^3), intended for initialization and tests, not the step loop.
    """
    eigs = np.linalg.eigvalsh(1j * np.asarray(w, dtype=np.complex128))
    return float(np.max(np.abs(eigs)))


def _block_entries(n_total: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    s = (n_total - 1) / 2.0
    i = np.arange(n_total - m, dtype=np.float64)
    diag = 2.0 * (s * (2.0 * i + 1.0 + m) - i * (i + m))
    i = i[:-1]
    off = -np.sqrt((i + m + 1.0) * (n_total - 1.0 - i - m)) * np.sqrt(
        (i + 1.0) * (n_total - 1.0 - i)
    )
    return diag, off


@dataclass(frozen=True)
class LaplacianBlock:
    """Tridiagonal restriction of the (positive) operator to one diagonal.

    Positive definite for m >= 1; positive semidefinite with a single zero
    eigenvalue (the l = 0 mode) for m = 0.
    """

    n_total: int
    m: int
    diag: np.ndarray
    offdiag: np.ndarray

    @property
    def size(self) -> int:
        return self.n_total - self.m

    def eigenvalues(self) -> np.ndarray:
        """The exact spectrum {l(l+1) : l = m..N-1} (closed form, not a solve)."""
        l = np.arange(self.m, self.n_total, dtype=np.float64)
        return l * (l + 1.0)

    def to_dense(self) -> np.ndarray:
        a = np.diag(self.diag)
        if self.offdiag.size:
            a += np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)
        return a


def build_block(n_total: int, m: int) -> LaplacianBlock:
    """Assemble the tridiagonal block acting on the m-th diagonal."""
    if n_total < 2:
        raise ValueError(f"matrix truncation must be at least 2, got {n_total}")
    if not 0 <= m <= n_total - 1:
        raise ValueError(f"diagonal index m={m} out of range for N={n_total}")
    diag, off = _block_entries(n_total, m)
    return LaplacianBlock(n_total, m, diag, off)


class LaplacianOperator:
    """All blocks of one truncation size N in the sheared (i, m) layout.

    Position (i, m) of each coefficient array refers to the entry of the
    m-th sub-diagonal lying in matrix row i (valid for m <= i; the strict
    upper triangle of the layout is zero padding, which the row kernels
    propagate harmlessly).  Couplings along a diagonal connect adjacent
    rows of the layout, uniformly across all diagonals.
    """

    def __init__(self, n: int):
        if n < 2:
            raise ValueError(f"matrix truncation must be at least 2, got {n}")
        self.n = n
        stencil_diag = np.zeros((n, n))
        stencil_off = np.zeros((n, n))
        solve_linv = np.zeros((n, n))
        solve_dinv = np.zeros((n, n))
        for m in range(n):
            dm, em = _block_entries(n, m)
            stencil_diag[m:, m] = dm
            stencil_off[m : n - 1, m] = em
            if m == 0:
                # deflated m = 0 block: factor the SPD leading principal
                # submatrix; the gauge row keeps the null component at zero
                dm, em = dm[:-1], em[:-1]
            if dm.size == 1:
                d_fact, e_fact, info = dm, em, 0
            else:
                d_fact, e_fact, info = lapack.dpttrf(dm, em)
            if info != 0:
                raise np.linalg.LinAlgError(
                    f"tridiagonal factorization failed (info={info}, N={n}, m={m})"
                )
            rows = slice(m, m + dm.size)
            solve_dinv[rows, m] = 1.0 / d_fact
            solve_linv[m : m + e_fact.size, m] = e_fact
        self._stencil_diag = stencil_diag
        self._stencil_off = stencil_off
        self._solve_linv = solve_linv
        self._solve_dinv = solve_dinv

    # duplicated columns act on the interleaved float view of the complex
    # workspace, keeping the numpy fallback sweeps free of dtype promotion
    @cached_property
    def _solve_linv2(self) -> np.ndarray:
        return np.repeat(self._solve_linv, 2, axis=1)

    @cached_property
    def _solve_dinv2(self) -> np.ndarray:
        return np.repeat(self._solve_dinv, 2, axis=1)


_scratch = threading.local()


def _scratch_buffer(key: str, shape: tuple[int, int]) -> np.ndarray:
    """Reusable per-thread workspace; avoids re-faulting large pages per call.

    Buffers start zeroed; the shear kernels only ever write the lower
    triangle of the layout, so the padding region stays zero across calls.
    """
    store = getattr(_scratch, "arrays", None)
    if store is None:
        store = _scratch.arrays = {}
    buf = store.get(key)
    if buf is None or buf.shape != shape:
        buf = np.zeros(shape, dtype=np.complex128)
        store[key] = buf
    return buf


def _shear(w: np.ndarray, key: str) -> np.ndarray:
    """S[i, m] = w[i, i - m] for m <= i, zero padding above (scratch-backed)."""
    n = w.shape[0]
    s = _scratch_buffer(key, (n, n))
    for i in range(n):
        s[i, : i + 1] = w[i, i::-1]
    return s


def _unshear_skew(s: np.ndarray, sign: float) -> np.ndarray:
    """Lower triangle from sign * S, upper by skew-Hermitian reflection."""
    n = s.shape[0]
    out = np.empty((n, n), dtype=np.complex128)  # every entry written below
    for i in range(n):
        np.multiply(s[i, i::-1], sign, out=out[i, : i + 1])
    _reflect_skew(out)
    return out


if njit is not None:

    @njit(cache=True)
    def _stream_sweeps_jit(w, s, linv, dinv, out):  # pragma: no cover - jitted
        """Shear, LDL^T sweeps, gauge, and lower-triangle unshear in one pass."""
        n = w.shape[0]
        tr = 0.0 + 0.0j
        for i in range(n):
            tr += w[i, i]
        mean = tr / n
        for i in range(n):
            for m in range(i + 1):
                b = w[i, i - m]
                if m == 0:
                    b -= mean  # project the RHS off the l = 0 null component
                if m < i:
                    b -= linv[i - 1, m] * s[i - 1, m]
                s[i, m] = b
        for m in range(n):
            s[n - 1, m] *= dinv[n - 1, m]
        for i in range(n - 2, -1, -1):
            for m in range(i + 1):
                s[i, m] = s[i, m] * dinv[i, m] - linv[i, m] * s[i + 1, m]
        g = 0.0 + 0.0j
        for i in range(n):
            g += s[i, 0]
        g /= n  # zero-mean gauge: no component along the null mode
        for i in range(n):
            out[i, i] = -(s[i, 0] - g)
            for m in range(1, i + 1):
                out[i, i - m] = -s[i, m]

else:
    _stream_sweeps_jit = None


def _reflect_skew(p: np.ndarray, block: int = 192) -> None:
    """Fill the strict upper triangle in place with -conj(lower^T), blockwise."""
    n = p.shape[0]
    for j0 in range(0, n, block):
        j1 = min(j0 + block, n)
        d = p[j0:j1, j0:j1]
        iu = np.triu_indices(j1 - j0, k=1)
        d[iu] = -np.conj(d.T[iu])
        for i0 in range(j1, n, block):
            i1 = min(i0 + block, n)
            p[j0:j1, i0:i1] = -p[i0:i1, j0:j1].conj().T


@lru_cache(maxsize=8)
def build_operator(n: int) -> LaplacianOperator:
    """Construct (or fetch the cached) packed operator for size N."""
    return LaplacianOperator(n)


def _resolve(op: LaplacianOperator | None, w: np.ndarray) -> LaplacianOperator:
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {w.shape}")
    n = w.shape[0]
    if op is None:
        return build_operator(n)
    if op.n != n:
        raise ValueError(f"operator size {op.n} does not match matrix size {n}")
    return op


def _complete_skew(low: np.ndarray) -> np.ndarray:
    """Fill the strict upper triangle of a lower-stored matrix by skew symmetry."""
    return low - np.tril(low, -1).conj().T


def apply_laplacian(
    w: VorticityMatrix,
    sign: int = -1,
    op: LaplacianOperator | None = None,
) -> VorticityMatrix:
    """Apply the quantized Laplacian blockwise over matrix diagonals.

    ``sign=-1`` (default) is the physical convention: single modes satisfy
    lap(W) = -l(l+1) W.  ``sign=+1`` applies the positive block form as
    stored.  Only the lower triangle and main diagonal of ``w`` are read;
    the upper triangle of the result is reconstructed by skew-Hermitian
    symmetry.
    """
    if sign not in (-1, 1):
        raise ValueError("sign must be -1 or +1")
    op = _resolve(op, w)
    n = op.n
    s = _shear(np.asarray(w, dtype=np.complex128), "apply")
    y = _scratch_buffer("apply_y", (n, n))
    t = _scratch_buffer("apply_t", (n, n))
    off = op._stencil_off[:-1, :]
    np.multiply(op._stencil_diag, s, out=y)
    np.multiply(off, s[:-1, :], out=t[:-1, :])
    y[1:, :] += t[:-1, :]
    np.multiply(off, s[1:, :], out=t[:-1, :])
    y[:-1, :] += t[:-1, :]
    return _unshear_skew(y, float(sign))


def solve_stream(
    w: VorticityMatrix,
    op: LaplacianOperator | None = None,
    check: bool = True,
    tol: float = STRUCTURE_TOL,
    use_jit: bool = True,
) -> VorticityMatrix:
    """Solve lap(P) = W for the stream matrix P in O(N^2) work.

    One tridiagonal solve per matrix diagonal, batched into a single
    factorized system.  The main-diagonal block is singular along the
    constant vector (the l = 0 mode), so that solve acts on the complement
    of the null mode: the right-hand side is projected off it (a no-op for
    traceless W beyond round-off) and the solution is gauged to zero mean
    on the diagonal, making P traceless.  The upper triangle is filled by
    skew-Hermitian symmetry.

    With ``check`` enabled (the default) a StructureError is raised when W
    carries a trace component beyond ``tol`` (the main-diagonal system is
    inconsistent and the null part of W is silently unrepresentable) or
    when W is measurably non-skew-Hermitian.  The integrator disables the
    gate for its inner iterates, which legitimately carry an O(h^2) trace
    that the pseudo-inverse must discard.
    """
    op = _resolve(op, w)
    n = op.n
    w = np.asarray(w, dtype=np.complex128)
    if check:
        if trace_residual(w) > tol:
            raise StructureError(
                f"input is not traceless (residual {trace_residual(w):.3e} > {tol:.1e}); "
                "the main-diagonal system is inconsistent"
            )
        if skewness_residual(w) > tol:
            raise StructureError(
                f"input is not skew-Hermitian (residual {skewness_residual(w):.3e} > {tol:.1e})"
            )

    if use_jit and _stream_sweeps_jit is not None:
        s = _scratch_buffer("solve", (n, n))
        out = np.empty((n, n), dtype=np.complex128)
        _stream_sweeps_jit(
            np.ascontiguousarray(w), s, op._solve_linv, op._solve_dinv, out
        )
        _reflect_skew(out)
        return out

    s = _shear(w, "solve")
    s[:, 0] -= s[:, 0].mean()  # project the RHS off the l = 0 null component
    sf = s.view(np.float64)  # interleaved view; sweeps stay in real arithmetic
    linv = op._solve_linv2
    dinv = op._solve_dinv2
    for i in range(1, n):
        k = 2 * i + 2
        sf[i, :k] -= linv[i - 1, :k] * sf[i - 1, :k]
    sf[n - 1, :] *= dinv[n - 1, :]
    for i in range(n - 2, -1, -1):
        k = 2 * i + 2
        sf[i, :k] *= dinv[i, :k]
        sf[i, :k] -= linv[i, :k] * sf[i + 1, :k]
    s[:, 0] -= s[:, 0].mean()  # zero-mean gauge: no component along the null mode
    return _unshear_skew(s, -1.0)
