import math

import numpy as np
import pytest

from kerrchain import (BandGrid, ChainConfig, band_structure, bogoliubov_angle,
                       derive_params, dispersion, fbz_momenta, j_k, zak_phase)
from kerrchain.errors import GapClosed, RegimeError

from oracles import single_k_energies


def cfg_mu_delta(mu, delta, n_cells=8, **kw):
    return ChainConfig.from_ratios(mu, delta, n_cells=n_cells, boundary="PBC",
                                   **kw)


class TestDispersion:
    def test_gap_closes_at_delta_zero(self):
        cfg = cfg_mu_delta(0.1, 0.0)
        em, ep = dispersion(cfg, math.pi)
        assert ep - em <= 1e-12

    def test_flat_bands_at_unit_imbalance(self):
        d = derive_params(cfg_mu_delta(0.1, 1.0))
        for delta in (1.0, -1.0):
            cfg = cfg_mu_delta(0.1, delta)
            ks = np.linspace(-math.pi, math.pi, 101)
            em, ep = dispersion(cfg, ks)
            lo = d.omega_h * math.sqrt(0.9 / 1.1)
            hi = d.omega_h * math.sqrt(1.1 / 1.1)
            assert np.abs(em - lo).max() <= 1e-12
            assert np.abs(ep - hi).max() <= 1e-12

    def test_gap_value_against_4x4_oracle(self):
        cfg = cfg_mu_delta(0.1, 0.5)
        em, ep = dispersion(cfg, math.pi)
        # frozen from the numerically diagonalized one-momentum block
        assert ep - em == pytest.approx(0.13488215613994559, abs=1e-12)
        om, op = single_k_energies(cfg.omega, cfg.lam, cfg.eps_L,
                                   cfg.eps_1, cfg.eps_2, math.pi)
        assert em == pytest.approx(om, rel=1e-10)
        assert ep == pytest.approx(op, rel=1e-10)

    def test_oracle_equivalence_random_draws(self):
        rng = np.random.default_rng(42)
        for _ in range(8):
            mu = rng.uniform(0.05, 0.95)
            delta = rng.uniform(-0.95, 0.95)
            cfg = cfg_mu_delta(mu, delta)
            for k in rng.uniform(-math.pi, math.pi, 8):
                em, ep = dispersion(cfg, k)
                om, op = single_k_energies(cfg.omega, cfg.lam, cfg.eps_L,
                                           cfg.eps_1, cfg.eps_2, k)
                assert abs(em - om) <= 1e-10 * op
                assert abs(ep - op) <= 1e-10 * op

    def test_evenness_and_positivity(self):
        cfg = cfg_mu_delta(0.7, -0.4)
        ks = np.linspace(0, math.pi, 257)
        em_p, ep_p = dispersion(cfg, ks)
        em_m, ep_m = dispersion(cfg, -ks)
        assert np.abs(em_p - em_m).max() <= 1e-14
        assert np.abs(ep_p - ep_m).max() <= 1e-14
        assert em_p.min() > 0

    def test_minimum_gap_at_pi(self):
        cfg = cfg_mu_delta(0.3, 0.6)
        ks = np.linspace(-math.pi, math.pi, 1001)
        em, ep = dispersion(cfg, ks)
        gaps = ep - em
        em_pi, ep_pi = dispersion(cfg, math.pi)
        assert gaps.min() >= (ep_pi - em_pi) - 1e-14

    def test_regime_gate(self):
        with pytest.raises(RegimeError):
            dispersion(cfg_mu_delta(1.2, 0.5), 0.0)
        with pytest.raises(RegimeError):
            dispersion(ChainConfig(omega=1, lam=0.5, eps_L=0.02, eps_1=0.01,
                                   eps_2=0.01, n_cells=8, boundary="PBC"), 0.0)


class TestBandStructure:
    def test_level_counting(self):
        assert band_structure(cfg_mu_delta(0.1, 0.5, n_cells=4)).distinct_level_count == 6
        assert band_structure(cfg_mu_delta(0.1, 0.5, n_cells=5)).distinct_level_count == 6
        # counted from the exact momentum set as well
        for n in (4, 5, 8, 9):
            ks = fbz_momenta(n)
            classes = len({round(abs(k), 12) for k in ks})
            assert 2 * classes == band_structure(
                cfg_mu_delta(0.1, 0.5, n_cells=n)).distinct_level_count

    def test_fbz_sets(self):
        assert fbz_momenta(4) == pytest.approx(
            2 * math.pi * np.array([-1, 0, 1, 2]) / 4)
        assert fbz_momenta(5) == pytest.approx(
            2 * math.pi * np.array([-2, -1, 0, 1, 2]) / 5)

    def test_dense_grid_consistency(self):
        cfg = cfg_mu_delta(0.1, 0.5)
        bs = band_structure(cfg, BandGrid.DENSE, 1024)
        gaps = bs.e_plus - bs.e_minus
        em_pi, ep_pi = dispersion(cfg, math.pi)
        assert gaps.min() == pytest.approx(ep_pi - em_pi, abs=1e-12)
        assert len(bs.k_values) == 1024


class TestBogoliubovAngle:
    def test_decoupled_single_site_angle(self):
        cfg = ChainConfig(omega=1, lam=2, eps_L=0.02, eps_1=0, eps_2=0,
                          n_cells=8, boundary="PBC")
        nu_m = bogoliubov_angle(cfg, 0.3, "-")
        nu_p = bogoliubov_angle(cfg, 0.3, "+")
        expect = 0.5 * math.atanh(1.0 / 3.0)     # Lambda/Omega = omega/(2 lam - omega)
        assert nu_m == pytest.approx(expect, rel=1e-14)
        assert nu_p == pytest.approx(expect, rel=1e-14)

    def test_bands_share_angle_where_jk_vanishes(self):
        cfg = cfg_mu_delta(0.3, 0.0)
        assert abs(complex(j_k(cfg, math.pi))) <= 1e-15
        assert bogoliubov_angle(cfg, math.pi, "+") == pytest.approx(
            bogoliubov_angle(cfg, math.pi, "-"), rel=1e-14)

    def test_angle_reproduces_dispersion(self):
        # E = (Omega + eta |J_k|) / cosh(2 nu)
        cfg = cfg_mu_delta(0.1, 0.5)
        d = derive_params(cfg)
        w = (cfg.lam - cfg.omega) / (1 + d.mu)
        for k in (0.0, 1.1, math.pi):
            ajk = abs(complex(j_k(cfg, k)))
            em, ep = dispersion(cfg, k)
            for eta, expect in ((1, ep), (-1, em)):
                nu = bogoliubov_angle(cfg, k, "+" if eta > 0 else "-")
                e_angle = (cfg.lam + w + eta * ajk) / math.cosh(2 * nu)
                assert e_angle == pytest.approx(expect, rel=1e-12)


class TestZak:
    def test_windings(self):
        cfg = cfg_mu_delta(0.1, 0.5)
        assert zak_phase(cfg, "+").winding == 1
        assert zak_phase(cfg, "-").winding == -1
        cfg = cfg_mu_delta(0.1, -0.5)
        assert zak_phase(cfg, "+").winding == 0
        assert zak_phase(cfg, "-").winding == 0

    def test_gap_closed(self):
        with pytest.raises(GapClosed):
            zak_phase(cfg_mu_delta(0.1, 0.0), "+")

    def test_phase_quantization_scan(self):
        for delta in np.concatenate([np.arange(0.05, 1.0, 0.05),
                                     -np.arange(0.05, 1.0, 0.05)]):
            z = zak_phase(cfg_mu_delta(0.2, float(delta)), "+")
            assert abs(z.phase_accumulated
                       - 2 * math.pi * round(z.phase_accumulated / (2 * math.pi))) <= 1e-6
            assert z.winding == (1 if delta > 0 else 0)

    def test_phase_matches_winding(self):
        z = zak_phase(cfg_mu_delta(0.1, 0.5), "-")
        assert z.phase_accumulated == pytest.approx(2 * math.pi * z.winding,
                                                    abs=1e-6)
