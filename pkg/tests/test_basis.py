"""Quantized basis: oracle equivalence, orthonormality, spectral transforms."""

import numpy as np
import pytest
from conftest import random_admissible

from zeitlin.basis import (
    HarmonicCoefficients,
    compute_basis,
    extract,
    load_basis,
    project,
    save_basis,
    wigner_basis_oracle,
)
from zeitlin.formats import FileFormatError
from zeitlin.laplacian import build_block


def random_real_field_coeffs(n, rng, l_lo=1, l_hi=None):
    c = HarmonicCoefficients.zeros(n)
    l_hi = n - 1 if l_hi is None else l_hi
    for m in range(n):
        lo = max(m, 1)
        vals = rng.normal(size=n - lo) + 1j * rng.normal(size=n - lo)
        ls = np.arange(lo, n)
        vals[(ls < l_lo) | (ls > l_hi)] = 0.0
        if m == 0:
            vals = vals.real + 0j
        c.pos[m][:] = vals
    c.enforce_reality()
    return c


class TestOracle:
    @pytest.mark.parametrize("n", range(2, 11))
    def test_eigensolver_matches_oracle_after_alignment(self, n):
        got = compute_basis(n, align_oracle=False)
        want = wigner_basis_oracle(n)
        for m in range(n):
            overlap = np.einsum("ij,ij->j", got.vectors[m], want.vectors[m])
            aligned = got.vectors[m] * np.sign(overlap)
            assert np.max(np.abs(aligned - want.vectors[m])) <= 1e-12

    def test_oracle_alignment_is_default_at_small_n(self):
        got = compute_basis(6)
        want = wigner_basis_oracle(6)
        assert got.phase_convention == "oracle"
        for m in range(6):
            assert np.max(np.abs(got.vectors[m] - want.vectors[m])) <= 1e-12

    def test_oracle_rejects_large_n(self):
        with pytest.raises(ValueError, match="exact-arithmetic"):
            wigner_basis_oracle(17)

    def test_n2_degree_one_element(self):
        basis = wigner_basis_oracle(2)
        t = basis.element(1, 0)
        want = np.diag([-1.0, 1.0]) / np.sqrt(2.0)
        np.testing.assert_allclose(t, want, atol=1e-15)

    def test_n3_m1_l1_vector(self):
        # unit eigenvector of [[4,-2],[-2,4]] at eigenvalue 2 is (1,1)/sqrt(2)
        basis = compute_basis(3)
        v = basis.vector(1, 1)
        np.testing.assert_allclose(np.abs(v), np.full(2, 1.0 / np.sqrt(2.0)), atol=1e-14)
        blk = build_block(3, 1).to_dense()
        np.testing.assert_allclose(blk @ v, 2.0 * v, atol=1e-13)

    def test_elements_are_block_eigenvectors(self):
        n = 6
        basis = wigner_basis_oracle(n)
        for m in range(n):
            blk = build_block(n, m).to_dense()
            for l in range(max(m, 1), n):
                v = basis.vector(l, m)
                assert np.linalg.norm(blk @ v - l * (l + 1.0) * v) <= 1e-12

    def test_conjugation_relation(self):
        basis = wigner_basis_oracle(5)
        for l in range(1, 5):
            for m in range(1, l + 1):
                t_pos = basis.element(l, m)
                t_neg = basis.element(l, -m)
                np.testing.assert_allclose(
                    t_neg, (-1.0) ** m * t_pos.conj().T, atol=1e-15
                )


class TestOrthonormality:
    @pytest.mark.parametrize("n", [8, 32, 64])
    def test_gram_identity_per_order(self, n):
        basis = compute_basis(n)
        for m in range(n):
            block = basis.vectors[m]
            gram = block.T @ block
            assert np.max(np.abs(gram - np.eye(block.shape[1]))) <= 1e-12

    def test_dense_gram_identity_all_orders(self):
        n = 6
        basis = compute_basis(n)
        elems = [
            basis.element(l, m) for l in range(1, n) for m in range(-l, l + 1)
        ]
        assert len(elems) == n * n - 1
        for i, a in enumerate(elems):
            for j, b in enumerate(elems):
                g = np.trace(a.T @ b)
                assert abs(g - (1.0 if i == j else 0.0)) <= 1e-12

    @pytest.mark.parametrize("n", [64, 128])
    def test_eigen_residuals(self, n):
        basis = compute_basis(n)
        for m in range(n):
            blk = build_block(n, m)
            block = basis.vectors[m]
            ls = np.arange(max(m, 1), n)
            av = blk.diag[:, None] * block
            if blk.offdiag.size:
                av[:-1] += blk.offdiag[:, None] * block[1:]
                av[1:] += blk.offdiag[:, None] * block[:-1]
            resid = av - block * (ls * (ls + 1.0))[None, :]
            assert np.max(np.linalg.norm(resid, axis=0)) <= 1e-10


class TestProjectExtract:
    def test_zero_coeffs(self):
        basis = compute_basis(6)
        w = project(HarmonicCoefficients.zeros(6), basis)
        assert np.all(w == 0.0)
        c = extract(np.zeros((6, 6), dtype=complex), basis)
        assert all(np.all(a == 0.0) for a in c.pos)

    def test_single_mode_n2(self):
        basis = compute_basis(2)
        c = HarmonicCoefficients.zeros(2)
        c.set(1, 0, 1.0)
        w = project(c, basis)
        np.testing.assert_allclose(w, 1j * basis.element(1, 0), atol=1e-15)
        assert np.max(np.abs(np.abs(np.diag(w)) - 1.0 / np.sqrt(2.0))) <= 1e-15

    def test_delta_mode_recovery(self):
        basis = compute_basis(8)
        c = HarmonicCoefficients.zeros(8)
        c.set(3, 2, 1.0)
        c.enforce_reality()
        got = extract(project(c, basis), basis)
        assert got.get(3, 2) == pytest.approx(1.0, abs=1e-12)
        got.set(3, 2, 0.0)
        got.set(3, -2, 0.0)
        assert got.max_abs() <= 1e-12

    @pytest.mark.parametrize("n", [8, 32])
    def test_roundtrip_coeffs(self, n, rng):
        c = random_real_field_coeffs(n, rng)
        basis = compute_basis(n)
        back = extract(project(c, basis), basis)
        for m in range(n):
            assert np.max(np.abs(back.pos[m] - c.pos[m])) <= 1e-12
            assert np.max(np.abs(back.neg[m] - c.neg[m])) <= 1e-12

    @pytest.mark.parametrize("n", [8, 24])
    def test_roundtrip_matrix(self, n, rng):
        basis = compute_basis(n)
        w = random_admissible(n, rng)
        back = project(extract(w, basis), basis)
        assert np.max(np.abs(back - w)) <= 1e-12 * np.max(np.abs(w))

    def test_extract_reality_of_admissible(self, rng):
        basis = compute_basis(12)
        c = extract(random_admissible(12, rng), basis)
        assert c.reality_violation() <= 1e-12

    def test_project_is_linear(self, rng):
        n = 8
        basis = compute_basis(n)
        c1 = random_real_field_coeffs(n, rng)
        c2 = random_real_field_coeffs(n, rng)
        alpha = 0.37
        c3 = HarmonicCoefficients.zeros(n)
        for m in range(n):
            c3.pos[m] = c1.pos[m] + alpha * c2.pos[m]
            c3.neg[m] = c1.neg[m] + alpha * c2.neg[m]
        w3 = project(c3, basis)
        np.testing.assert_allclose(
            w3, project(c1, basis) + alpha * project(c2, basis), atol=1e-13
        )

    def test_project_produces_admissible(self, rng):
        from zeitlin.laplacian import validate_vorticity

        basis = compute_basis(16)
        w = project(random_real_field_coeffs(16, rng), basis)
        validate_vorticity(w, tol=1e-13)

    def test_project_rejects_reality_violation(self, rng):
        basis = compute_basis(6)
        c = random_real_field_coeffs(6, rng)
        c.neg[1][0] += 0.5
        with pytest.raises(ValueError, match="reality"):
            project(c, basis)

    def test_complex_field_roundtrip(self, rng):
        # explicit complex fields skip the reality gate and keep all orders
        n = 7
        basis = compute_basis(n)
        c = HarmonicCoefficients.zeros(n)
        for m in range(n):
            c.pos[m] = rng.normal(size=c.pos[m].shape) + 1j * rng.normal(size=c.pos[m].shape)
            c.neg[m] = rng.normal(size=c.neg[m].shape) + 1j * rng.normal(size=c.neg[m].shape)
        w = project(c, basis, allow_complex=True)
        back = extract(w, basis)
        for m in range(n):
            assert np.max(np.abs(back.pos[m] - c.pos[m])) <= 1e-12
            if m >= 1:
                assert np.max(np.abs(back.neg[m] - c.neg[m])) <= 1e-12

    def test_dimension_mismatch(self, rng):
        basis = compute_basis(6)
        with pytest.raises(ValueError, match="does not match"):
            project(HarmonicCoefficients.zeros(7), basis)
        with pytest.raises(ValueError, match="does not match"):
            extract(np.zeros((7, 7), dtype=complex), basis)


class TestCoefficients:
    def test_index_bounds(self):
        c = HarmonicCoefficients.zeros(6)
        c.set(5, -5, 1j)
        assert c.get(5, -5) == 1j
        with pytest.raises(ValueError):
            c.get(0, 0)
        with pytest.raises(ValueError):
            c.get(6, 0)
        with pytest.raises(ValueError):
            c.set(2, 3, 1.0)

    def test_reality_violation_measure(self):
        c = HarmonicCoefficients.zeros(5)
        c.set(2, 1, 1.0 + 2.0j)
        c.enforce_reality()
        assert c.reality_violation() == 0.0
        assert c.get(2, -1) == (-1.0) * np.conj(1.0 + 2.0j)
        c.set(2, -1, 0.0)
        assert c.reality_violation() == pytest.approx(abs(1.0 + 2.0j), abs=1e-15)


class TestCacheFile:
    def test_roundtrip(self, tmp_path):
        basis = compute_basis(9)
        path = tmp_path / "basis.zeb"
        save_basis(path, basis)
        loaded = load_basis(path)
        assert loaded.n == 9
        for m in range(9):
            np.testing.assert_array_equal(loaded.vectors[m], basis.vectors[m])

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "basis.zeb"
        basis = compute_basis(4)
        save_basis(path, basis)
        raw = bytearray(path.read_bytes())
        raw[0] = ord(b"X")
        path.write_bytes(bytes(raw))
        with pytest.raises(FileFormatError, match="magic"):
            load_basis(path)

    def test_truncated(self, tmp_path):
        path = tmp_path / "basis.zeb"
        save_basis(path, compute_basis(4))
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(FileFormatError, match="truncated"):
            load_basis(path)

    def test_trailing_bytes(self, tmp_path):
        path = tmp_path / "basis.zeb"
        save_basis(path, compute_basis(4))
        path.write_bytes(path.read_bytes() + b"\x00")
        with pytest.raises(FileFormatError, match="trailing"):
            load_basis(path)
