"""Shared fixtures, random-state helpers, and the acceptance report hook."""

import zlib

import numpy as np
import pytest


def random_admissible(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Random skew-Hermitian traceless matrix with entries of order ``scale``."""
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    w = 0.5 * (a - a.conj().T)
    w -= (np.trace(w) / n) * np.eye(n)  # trace is purely imaginary, shift stays skew
    return scale * w


def spin_matrices(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Spin-s operators (s = (n-1)/2) with magnetic number ascending by row."""
    s = (n - 1) / 2.0
    mu = np.arange(n) - s
    sz = np.diag(mu.astype(complex))
    sp = np.zeros((n, n), dtype=complex)
    sp[np.arange(1, n), np.arange(n - 1)] = np.sqrt(s * (s + 1) - mu[:-1] * (mu[:-1] + 1))
    return sz, sp, sp.conj().T


def casimir_laplacian_dense(w: np.ndarray) -> np.ndarray:
    """Independent Laplacian oracle: -sum_a ad(S_a)^2 via ladder operators."""
    sz, sp, sm = spin_matrices(w.shape[0])

    def ad(x, y):
        return x @ y - y @ x

    return -(ad(sz, ad(sz, w)) + 0.5 * (ad(sp, ad(sm, w)) + ad(sm, ad(sp, w))))


@pytest.fixture
def rng(request) -> np.random.Generator:
    """Per-test deterministic generator (seeded from the test id)."""
    return np.random.default_rng(zlib.adler32(request.node.nodeid.encode()))


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture(scope="session")
def acceptance(request):
    """Collects one verdict line per acceptance criterion for the summary."""
    lines = request.config._acceptance_lines

    class Reporter:
        @staticmethod
        def record(criterion: str, passed: bool, detail: str = "") -> None:
            status = "PASS" if passed else "FAIL"
            line = f"ACCEPTANCE {criterion}: {status}"
            if detail:
                line += f" ({detail})"
            lines.append(line)
            print(line, flush=True)

    return Reporter()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
