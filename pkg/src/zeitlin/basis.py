"""Quantized spherical-harmonic basis and spectral transforms.

The basis element for degree l and order m >= 0 is an N x N real matrix
supported on the m-th sub-diagonal; the stored data is that diagonal
vector, a unit eigenvector of the corresponding tridiagonal Laplacian
block with eigenvalue l(l+1).  Elements for m < 0 follow from

    T_{l,-m} = (-1)^m  T_{l,m}^H

and are never stored.  A vorticity matrix and its coefficients are
related by

    W = sum_{l,m} i w_{lm} T_{lm},        w_{lm} = -i Tr(T_{lm}^H W),

which for a real vorticity field (w_{l,-m} = (-1)^m conj(w_{lm})) makes
W skew-Hermitian and traceless.  Real-combination conventions for the
coefficients are not materialized; callers convert to the complex
coefficients at ingestion.

Phase convention: eigenvectors of a tridiagonal block with nonzero
couplings are unique up to sign.  Each stored vector is normalized so
its largest-magnitude entry (ties broken by lowest index) is positive;
for N <= ORACLE_LIMIT the sign is then corrected, per (l, m), to agree
elementwise with the closed-form Wigner-3j evaluation

    (T_lm)_{ab} = (-1)^{s-i} sqrt(2l+1) threej(s, l, s; -i, m, j),

with s = (N-1)/2, i = a - s, j = b - s.  For larger N the sign rule
alone applies; any consistent choice preserves round-trip exactness and
all degree-resolved diagnostics, which are phase-invariant.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .formats import read_basis_cache, write_basis_cache
from .laplacian import _block_entries, _complete_skew

__all__ = [
    "ORACLE_LIMIT",
    "QuantizedBasis",
    "HarmonicCoefficients",
    "compute_basis",
    "wigner_basis_oracle",
    "project",
    "extract",
    "save_basis",
    "load_basis",
]

#: Largest truncation for which the closed-form evaluation stays in exact
#: integer arithmetic by default (factorials up to (2N)! remain cheap).
ORACLE_LIMIT = 16

#: Tolerance on the reality condition of coefficients fed to `project`.
REALITY_TOL = 1e-12


def _l_start(m: int) -> int:
    return max(abs(m), 1)


def _sub_diag_indices(n: int, m: int) -> np.ndarray:
    """Flat row-major indices of the m-th sub-diagonal of an n x n matrix."""
    return m * n + (n + 1) * np.arange(n - m)


def _super_diag_indices(n: int, m: int) -> np.ndarray:
    return m + (n + 1) * np.arange(n - m)


@dataclass
class QuantizedBasis:
    """Stored diagonal vectors of the basis elements for one truncation N.

    ``vectors[m]`` has shape (N - m, n_l) with columns labeled by
    l = max(m, 1), ..., N-1 in ascending order.  Immutable by convention
    after construction; safe to share across threads.
    """

    n: int
    vectors: list[np.ndarray]
    phase_convention: str = "sign-rule"

    def l_start(self, m: int) -> int:
        return _l_start(m)

    def vector(self, l: int, m: int) -> np.ndarray:
        """Diagonal vector of the element (l, |m|)."""
        m = abs(m)
        if not 0 <= m <= self.n - 1:
            raise ValueError(f"order m={m} out of range for N={self.n}")
        if not _l_start(m) <= l <= self.n - 1:
            raise ValueError(f"degree l={l} out of range for m={m}, N={self.n}")
        return self.vectors[m][:, l - _l_start(m)]

    def element(self, l: int, m: int) -> np.ndarray:
        """Dense N x N basis element, any sign of m.  For tests and debugging."""
        v = self.vector(l, abs(m))
        t = np.zeros((self.n, self.n))
        t.ravel()[_sub_diag_indices(self.n, abs(m))] = v
        if m < 0:
            t = (-1) ** (m & 1) * t.T  # real entries: dagger is transpose
        return t


def _sign_fix(vecs: np.ndarray) -> np.ndarray:
    """Make each column's largest-magnitude entry (lowest index on ties) positive."""
    lead = vecs[np.argmax(np.abs(vecs), axis=0), np.arange(vecs.shape[1])]
    signs = np.where(lead < 0.0, -1.0, 1.0)
    return vecs * signs


def compute_basis(
    n: int,
    align_oracle: bool | None = None,
    workers: int = 1,
) -> QuantizedBasis:
    """Build the full basis by N tridiagonal eigenproblems (O(N^3) total).

    ``align_oracle`` controls the per-(l, m) sign correction against the
    closed-form values; by default it is applied whenever n <= ORACLE_LIMIT.
    The eigenproblems for different m are independent and run on ``workers``
    threads when requested.
    """
    if n < 2:
        raise ValueError(f"matrix truncation must be at least 2, got {n}")

    def solve_one(m: int) -> np.ndarray:
        d, e = _block_entries(n, m)
        try:
            if d.size == 1:
                vecs = np.ones((1, 1))
            else:
                _, vecs = eigh_tridiagonal(d, e)
        except np.linalg.LinAlgError as exc:
            raise np.linalg.LinAlgError(
                f"eigensolver failed for block m={m}, N={n}: {exc}"
            ) from exc
        if m == 0:
            vecs = vecs[:, 1:]  # drop the l = 0 constant mode
        return _sign_fix(vecs)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            vectors = list(pool.map(solve_one, range(n)))
    else:
        vectors = [solve_one(m) for m in range(n)]

    basis = QuantizedBasis(n, vectors, phase_convention="sign-rule")
    if align_oracle is None:
        align_oracle = n <= ORACLE_LIMIT
    if align_oracle:
        oracle = wigner_basis_oracle(n)
        for m in range(n):
            # simple eigenvalues: stored and oracle vectors agree up to sign
            corr = np.sign(np.einsum("ij,ij->j", basis.vectors[m], oracle.vectors[m]))
            basis.vectors[m] *= corr
        basis.phase_convention = "oracle"
    return basis


def wigner_basis_oracle(n: int, max_n: int = ORACLE_LIMIT) -> QuantizedBasis:
    """Closed-form basis from exact 3j symbols; independent of any eigensolve."""
    from .wigner import threej

    if n < 2:
        raise ValueError(f"matrix truncation must be at least 2, got {n}")
    if n > max_n:
        raise ValueError(
            f"n={n} exceeds the exact-arithmetic limit {max_n}; "
            "use compute_basis for production sizes"
        )
    from fractions import Fraction

    s = Fraction(n - 1, 2)
    vectors = []
    for m in range(n):
        size = n - m
        ls = range(_l_start(m), n)
        block = np.empty((size, len(ls)))
        for col, l in enumerate(ls):
            for k in range(size):
                i = k + m - s  # row label of entry (k + m, k)
                j = k - s
                block[k, col] = (-1) ** int(s - i) * np.sqrt(2 * l + 1) * threej(
                    s, l, s, -i, m, j
                )
        vectors.append(block)
    return QuantizedBasis(n, vectors, phase_convention="oracle")


def save_basis(path, basis: QuantizedBasis) -> None:
    write_basis_cache(path, basis.n, basis.vectors)


def load_basis(path) -> QuantizedBasis:
    n, vectors = read_basis_cache(path)
    return QuantizedBasis(n, vectors, phase_convention="file")


# ---------------------------------------------------------------------------
# spectral coefficients


@dataclass
class HarmonicCoefficients:
    """Complex coefficients w_{lm} for 1 <= l <= N-1, -l <= m <= l.

    Stored per order: ``pos[m]`` holds m >= 0 and ``neg[m]`` holds -m, both
    indexed by l - max(m, 1).  The degree l = 0 is absent throughout (zero
    mean vorticity).  A real vorticity field satisfies
    ``neg[m] == (-1)^m conj(pos[m])``.
    """

    n: int
    pos: list[np.ndarray] = field(repr=False)
    neg: list[np.ndarray] = field(repr=False)

    @classmethod
    def zeros(cls, n: int) -> "HarmonicCoefficients":
        if n < 2:
            raise ValueError(f"matrix truncation must be at least 2, got {n}")
        pos = [np.zeros(n - _l_start(m), dtype=np.complex128) for m in range(n)]
        neg = [np.zeros(n - _l_start(m), dtype=np.complex128) for m in range(n)]
        return cls(n, pos, neg)

    def _check(self, l: int, m: int) -> int:
        if not 1 <= l <= self.n - 1:
            raise ValueError(f"degree l={l} out of range for N={self.n}")
        if abs(m) > l:
            raise ValueError(f"order m={m} out of range for l={l}")
        return l - _l_start(m)

    def get(self, l: int, m: int) -> complex:
        k = self._check(l, m)
        return complex(self.pos[m][k] if m >= 0 else self.neg[-m][k])

    def set(self, l: int, m: int, value: complex) -> None:
        k = self._check(l, m)
        if m >= 0:
            self.pos[m][k] = value
        else:
            self.neg[-m][k] = value

    def enforce_reality(self) -> None:
        """Overwrite all m < 0 entries from the m >= 0 ones."""
        for m in range(1, self.n):
            self.neg[m] = (-1) ** (m & 1) * np.conj(self.pos[m])
        self.neg[0] = np.conj(self.pos[0])  # unused storage; keep consistent

    def reality_violation(self) -> float:
        """Largest absolute deviation from w_{l,-m} = (-1)^m conj(w_{lm})."""
        worst = float(np.max(np.abs(self.pos[0].imag), initial=0.0))
        for m in range(1, self.n):
            dev = self.neg[m] - (-1) ** (m & 1) * np.conj(self.pos[m])
            if dev.size:
                worst = max(worst, float(np.max(np.abs(dev))))
        return worst

    def max_abs(self) -> float:
        vals = [np.max(np.abs(a), initial=0.0) for a in self.pos + self.neg[1:]]
        return float(max(vals, default=0.0))

    def copy(self) -> "HarmonicCoefficients":
        return HarmonicCoefficients(
            self.n, [a.copy() for a in self.pos], [a.copy() for a in self.neg]
        )


def project(
    coeffs: HarmonicCoefficients,
    basis: QuantizedBasis,
    allow_complex: bool = False,
    tol: float = REALITY_TOL,
) -> np.ndarray:
    """Assemble W = sum_{l,m} i w_{lm} T_{lm}, diagonal by diagonal.

    By default the coefficients must describe a real vorticity field, and
    the m < 0 terms are realized through the skew-Hermitian completion of
    the lower triangle, so the result is skew-Hermitian and traceless to
    machine precision.  With ``allow_complex`` the stored m < 0 values are
    used verbatim; the result then has no structural guarantees.
    """
    if coeffs.n != basis.n:
        raise ValueError(f"coefficient size {coeffs.n} does not match basis size {basis.n}")
    n = basis.n
    if not allow_complex:
        dev = coeffs.reality_violation()
        if dev > tol * max(1.0, coeffs.max_abs()):
            raise ValueError(
                f"coefficients violate the reality condition (deviation {dev:.3e}); "
                "pass allow_complex=True to project a complex field"
            )

    low = np.zeros((n, n), dtype=np.complex128)
    flat = low.ravel()
    for m in range(n):
        flat[_sub_diag_indices(n, m)] = 1j * (basis.vectors[m] @ coeffs.pos[m])
    if not allow_complex:
        return _complete_skew(low)

    up = np.zeros((n, n), dtype=np.complex128)
    flat = up.ravel()
    for m in range(1, n):
        vals = 1j * (-1) ** (m & 1) * (basis.vectors[m] @ coeffs.neg[m])
        flat[_super_diag_indices(n, m)] = vals
    return low + up


def extract(w: np.ndarray, basis: QuantizedBasis) -> HarmonicCoefficients:
    """Per-diagonal inner products w_{lm} = -i Tr(T_{lm}^H W); inverse of project."""
    n = basis.n
    if w.shape != (n, n):
        raise ValueError(f"matrix shape {w.shape} does not match basis size {n}")
    w = np.asarray(w, dtype=np.complex128)
    flat = w.ravel()
    out = HarmonicCoefficients.zeros(n)
    for m in range(n):
        out.pos[m] = -1j * (basis.vectors[m].T @ flat[_sub_diag_indices(n, m)])
        if m >= 1:
            out.neg[m] = (
                -1j * (-1) ** (m & 1) * (basis.vectors[m].T @ flat[_super_diag_indices(n, m)])
            )
    out.neg[0] = np.conj(out.pos[0])
    return out
