"""Strict format validation of the producer's files against golden fixtures."""

import struct

import numpy as np
import pytest

from zeitlin_plots.readers import (
    FormatError,
    read_diagnostics_csv,
    read_grid,
    read_spectrum_csv,
)


class TestSpectrumCsv:
    def test_golden_power_law(self, fixtures):
        degrees, energies = read_spectrum_csv(fixtures / "spectrum_l3.csv")
        assert degrees[0] == 1 and degrees[-1] == 128
        np.testing.assert_allclose(energies, degrees.astype(float) ** -3.0, rtol=1e-15)

    def test_rejects_missing_header(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("1,0.5\n2,0.2\n")
        with pytest.raises(FormatError, match="header"):
            read_spectrum_csv(path)

    def test_rejects_empty(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("l,E_l\n")
        with pytest.raises(FormatError, match="no spectrum rows"):
            read_spectrum_csv(path)

    def test_rejects_malformed_row(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("l,E_l\n1,0.5,9\n")
        with pytest.raises(FormatError):
            read_spectrum_csv(path)

    def test_rejects_nonpositive_degree(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("l,E_l\n0,0.5\n")
        with pytest.raises(FormatError, match="positive"):
            read_spectrum_csv(path)


class TestDiagnosticsCsv:
    def test_golden_ramp(self, fixtures):
        table = read_diagnostics_csv(fixtures / "diagnostics_ramp.csv")
        assert set(table) == {"time", "H", "K", "C2_rel", "C3_rel", "C4_rel", "C5_rel"}
        assert table["time"].size == 101
        np.testing.assert_allclose(table["C2_rel"], 1e-12 * np.arange(101), rtol=1e-12)
        assert np.all(table["C5_rel"] == 0.0)

    def test_rejects_missing_columns(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("time,H,K\n0,1,1\n")
        with pytest.raises(FormatError, match="Casimir"):
            read_diagnostics_csv(path)

    def test_rejects_wrong_leading_columns(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("t,H,K,C2_rel\n0,1,1,0\n")
        with pytest.raises(FormatError, match="time,H,K"):
            read_diagnostics_csv(path)

    def test_rejects_ragged_rows(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("time,H,K,C2_rel\n0,1,1\n")
        with pytest.raises(FormatError, match="fields"):
            read_diagnostics_csv(path)


class TestGridFile:
    def test_golden_zonal_mode(self, fixtures):
        grid = read_grid(fixtures / "grid_y10.bin")
        assert (grid.n_lat, grid.n_lon) == (64, 128)
        assert grid.time == 0.0
        # the degree-1 zonal mode: zonally uniform, antisymmetric in latitude
        assert np.max(np.abs(grid.data - grid.data[:, :1])) <= 1e-14
        np.testing.assert_allclose(grid.data, -grid.data[::-1, :], atol=1e-14)
        want_pole = np.sqrt(3.0 / (4.0 * np.pi))
        assert grid.data[0, 0] == pytest.approx(want_pole, abs=1e-12)

    def test_rejects_bad_magic(self, fixtures, tmp_path):
        raw = bytearray((fixtures / "grid_y10.bin").read_bytes())
        raw[:4] = b"XXXX"
        bad = tmp_path / "bad.bin"
        bad.write_bytes(bytes(raw))
        with pytest.raises(FormatError, match="magic"):
            read_grid(bad)

    def test_rejects_trailing_bytes(self, fixtures, tmp_path):
        raw = (fixtures / "grid_y10.bin").read_bytes() + b"\x00"
        bad = tmp_path / "bad.bin"
        bad.write_bytes(raw)
        with pytest.raises(FormatError, match="exactly"):
            read_grid(bad)

    def test_rejects_truncation(self, fixtures, tmp_path):
        raw = (fixtures / "grid_y10.bin").read_bytes()[:-8]
        bad = tmp_path / "bad.bin"
        bad.write_bytes(raw)
        with pytest.raises(FormatError, match="exactly"):
            read_grid(bad)

    def test_rejects_degenerate_shape(self, tmp_path):
        bad = tmp_path / "bad.bin"
        bad.write_bytes(b"ZGD1" + struct.pack("<IId", 1, 4, 0.0) + b"\x00" * 32)
        with pytest.raises(FormatError, match="shape"):
            read_grid(bad)
