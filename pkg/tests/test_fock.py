import math

import numpy as np
import pytest

from kerrchain import (ChainConfig, build_cell, derive_params, ground_state,
                       husimi_slice, ring_detector)
from kerrchain.errors import CutoffTooSmall, NotConverged


def cell_cfg(lam, eps_1, omega=1.0, eps_l=0.02):
    # single-cell runs: inter-cell coupling off, chain length irrelevant
    return ChainConfig(omega=omega, lam=lam, eps_L=eps_l, eps_1=eps_1,
                       eps_2=0.0, n_cells=2)


class TestBuildCell:
    def test_dimensions_and_sparsity(self):
        cell = build_cell(cell_cfg(2.0, 0.02), 12)
        assert cell.matrix.shape == (144, 144)
        per_row = np.diff(cell.matrix.indptr)
        assert per_row.max() <= 5
        sym = (cell.matrix - cell.matrix.T)
        assert abs(sym).max() <= 1e-13 * abs(cell.matrix).max()

    def test_parity_block_structure(self):
        cell = build_cell(cell_cfg(2.0, 0.04), 10)
        p_a, p_b = cell.parity_labels()
        coo = cell.matrix.tocoo()
        assert (p_a[coo.row] == p_a[coo.col]).all()
        assert (p_b[coo.row] == p_b[coo.col]).all()

    def test_cutoff_gate(self):
        with pytest.raises(CutoffTooSmall):
            build_cell(cell_cfg(2.0, 0.02), 7)


class TestGroundState:
    def test_vacuum_at_zero_drive(self):
        cell = build_cell(cell_cfg(0.0, 0.02), 12)
        gs = ground_state(cell)
        assert gs.energy == pytest.approx(0.0, abs=1e-13)
        assert gs.gap == pytest.approx(1.0, rel=1e-12)       # one omega quantum
        assert abs(gs.vector[0]) == pytest.approx(1.0, rel=1e-12)
        assert gs.convergence_shift == pytest.approx(0.0, abs=1e-14)

    def test_parity_doublet_in_broken_phase(self):
        cell = build_cell(cell_cfg(2.0, 0.02), 40)           # mu = 0.5
        gs = ground_state(cell, check_convergence=False)
        omega_h = 2 * math.sqrt(2.0)
        assert gs.gap < 1e-3 * omega_h                       # near-degenerate
        assert np.linalg.norm(gs.vector) == pytest.approx(1.0, abs=1e-12)

    def test_convergence_gate(self):
        cell = build_cell(cell_cfg(2.0, 0.02), 20)           # far from converged
        with pytest.raises(NotConverged):
            ground_state(cell, convergence_rtol=1e-12)
        gs = ground_state(cell)                              # report-only default
        assert gs.convergence_shift > 1e-12


class TestHusimi:
    def test_vacuum_single_peak_at_origin(self):
        cell = build_cell(cell_cfg(0.0, 0.02), 12)
        gs = ground_state(cell, check_convergence=False)
        slice_ = husimi_slice(gs.vector, 12, 3.0, 101)
        assert len(slice_.peaks) == 1
        x, y, value = slice_.peaks[0]
        assert value == pytest.approx(1.0)
        assert math.hypot(x, y) <= 0.1

    def test_broken_phase_lobes(self):
        # mu = 0.5: four lobes at (+-gbar, +-gbar)
        cfg = cell_cfg(2.0, 0.02)
        gbar = math.sqrt(derive_params(cfg).gbar_sq)
        cell = build_cell(cfg, 40)
        gs = ground_state(cell, check_convergence=False)
        slice_ = husimi_slice(gs.vector, 40, 7.5, 151)
        assert len(slice_.peaks) == 4
        for x, y, _ in slice_.peaks:
            assert abs(abs(x) - gbar) <= 0.05 * 5.0
            assert abs(abs(y) - gbar) <= 0.05 * 5.0

    def test_sign_symmetry(self):
        # definite parity per mode makes |Q| even under each sign flip
        cell = build_cell(cell_cfg(2.0, 0.02), 30)
        gs = ground_state(cell, check_convergence=False)
        slice_ = husimi_slice(gs.vector, 30, 6.0, 81)
        vals = slice_.values
        assert np.abs(vals - vals[::-1, ::-1]).max() <= 1e-10
        assert np.abs(vals - vals[::-1, :]).max() <= 1e-10

    def test_peak_positions_converge_with_resolution(self):
        cfg = cell_cfg(2.0, 0.02)
        cell = build_cell(cfg, 36)
        gs = ground_state(cell, check_convergence=False)
        coarse = husimi_slice(gs.vector, 36, 7.5, 101)
        fine = husimi_slice(gs.vector, 36, 7.5, 201)
        cell_size = 15.0 / 100
        for x, y, _ in coarse.peaks:
            nearest = min(fine.peaks,
                          key=lambda p: math.hypot(p[0] - x, p[1] - y))
            assert math.hypot(nearest[0] - x, nearest[1] - y) <= 0.5 * cell_size


@pytest.fixture(scope="module")
def regime_slices():
    # the figure's truncation (50 states): at 40 the ring's weakest arc
    # falls below the 0.9 level set and breaks up
    out = {}
    for name, eps_1 in (("half", 0.02), ("one", 0.04), ("three_half", 0.06)):
        cfg = cell_cfg(2.0, eps_1)
        cell = build_cell(cfg, 50)
        gs = ground_state(cell, check_convergence=False)
        out[name] = husimi_slice(gs.vector, 50, 7.5, 201)
    return out


class TestRingDetector:

    def test_ring_at_critical_coupling(self, regime_slices):
        verdict = ring_detector(regime_slices["one"])
        assert verdict.kind == "ring"
        assert verdict.angular_coverage >= 0.95
        # the ring passes through the symmetric lobe points (gbar, gbar):
        # its per-resonator diagonal coordinate is the Euclidean radius/sqrt(2)
        gbar = math.sqrt(12.5)
        assert verdict.radius_diagonal == pytest.approx(gbar, rel=0.05)

    def test_peaks_below_critical(self, regime_slices):
        verdict = ring_detector(regime_slices["half"])
        assert verdict.kind == "peaks"
        assert verdict.n_components == 4

    def test_peaks_above_critical(self, regime_slices):
        verdict = ring_detector(regime_slices["three_half"])
        assert verdict.kind == "peaks"
        assert verdict.n_components == 4

    def test_origin_blob_is_peaks(self):
        cell = build_cell(cell_cfg(0.0, 0.02), 12)
        gs = ground_state(cell, check_convergence=False)
        verdict = ring_detector(husimi_slice(gs.vector, 12, 3.0, 101))
        assert verdict.kind == "peaks"


class TestSemiclassicalCorrespondence:
    def test_peak_radius_tracks_regime(self):
        # mu < 1: per-resonator amplitude gbar on both modes; mu > 1: one
        # mode at g, the other empty
        for eps_1, expect_x, expect_y in ((0.02, math.sqrt(50 / 3), math.sqrt(50 / 3)),
                                          (0.06, 5.0, 0.0)):
            cfg = cell_cfg(2.0, eps_1)
            cell = build_cell(cfg, 50)
            gs = ground_state(cell, check_convergence=False)
            slice_ = husimi_slice(gs.vector, 50, 7.5, 201)
            xs = sorted(abs(p[0]) for p in slice_.peaks)
            top = max(slice_.peaks, key=lambda p: max(abs(p[0]), abs(p[1])))
            big = max(abs(top[0]), abs(top[1]))
            small = min(abs(top[0]), abs(top[1]))
            assert big == pytest.approx(max(expect_x, expect_y), rel=0.05)
            assert small == pytest.approx(min(expect_x, expect_y), abs=0.25)
