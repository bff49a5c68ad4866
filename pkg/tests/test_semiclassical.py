import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kerrchain import (Boundary, ChainConfig, bulk_window, derive_params,
                       equation_defects, solve_newton, solve_obc_analytic,
                       solve_pbc)
from kerrchain.errors import (DegenerateDelta, InvalidConfig, RegimeError,
                              TauUndefined)
from kerrchain.model import DerivedParams

from oracles import equilibrium_defects


def oracle_residual(cfg, profile):
    defects = equilibrium_defects(
        cfg.omega, cfg.lam, cfg.eps_L, cfg.eps_1, cfg.eps_2,
        profile.alpha_sq, profile.beta_sq,
        pbc=cfg.boundary is Boundary.PBC, delta_lambda=cfg.delta_lambda)
    return np.abs(defects).max() / ((cfg.lam - cfg.omega) / (2 * cfg.eps_L))


class TestPbc:
    def test_homogeneous_value(self):
        cfg = ChainConfig.from_ratios(0.5, 0.0, boundary="PBC", n_cells=10)
        profile = solve_pbc(cfg)
        assert profile.alpha_sq == pytest.approx([50.0 / 3.0] * 10, rel=1e-15)
        assert profile.beta_sq == pytest.approx([50.0 / 3.0] * 10, rel=1e-15)

    def test_decoupled_limit(self):
        cfg = ChainConfig(omega=1, lam=2, eps_L=0.02, eps_1=0, eps_2=0,
                          n_cells=6, boundary="PBC")
        profile = solve_pbc(cfg)
        assert profile.alpha_sq == pytest.approx([25.0] * 6, rel=1e-15)

    def test_residual(self):
        cfg = ChainConfig.from_ratios(0.5, 0.3, boundary="PBC", n_cells=12)
        profile = solve_pbc(cfg)
        assert profile.residual <= 1e-14
        assert oracle_residual(cfg, profile) <= 1e-14

    def test_regime_errors(self):
        with pytest.raises(RegimeError):
            solve_pbc(ChainConfig.from_ratios(1.2, 0.0, boundary="PBC"))
        with pytest.raises(RegimeError):
            solve_pbc(ChainConfig(omega=1, lam=0.5, eps_L=0.02, eps_1=0.02,
                                  eps_2=0.02, n_cells=4, boundary="PBC"))


class TestObcAnalytic:
    def test_bulk_plateau(self):
        cfg = ChainConfig.from_ratios(0.1, 0.5, n_cells=25)
        profile = solve_obc_analytic(cfg)
        gbar_sq = derive_params(cfg).gbar_sq
        assert abs(profile.alpha_sq[12] - gbar_sq) < 1e-6   # cell n = 13

    def test_mirror_symmetry_exact(self):
        cfg = ChainConfig.from_ratios(0.1, 0.5, n_cells=25)
        profile = solve_obc_analytic(cfg)
        # copied, not recomputed: equality is bitwise
        assert (profile.beta_sq == profile.alpha_sq[::-1]).all()
        assert np.abs(profile.beta_sq - profile.alpha_sq[::-1]).max() <= 1e-15

    def test_residual_oracle(self):
        cfg = ChainConfig.from_ratios(0.1, 0.5, n_cells=25)
        profile = solve_obc_analytic(cfg)
        assert profile.residual <= 1e-10
        assert oracle_residual(cfg, profile) <= 1e-10

    def test_edge_enhancement(self):
        cfg = ChainConfig.from_ratios(0.9, 0.5, n_cells=25)
        profile = solve_obc_analytic(cfg)
        d = derive_params(cfg)
        assert profile.alpha_sq[0] > d.gbar_sq
        assert profile.beta_sq[-1] > d.gbar_sq

    def test_degenerate_delta_refused(self):
        with pytest.raises(DegenerateDelta):
            solve_obc_analytic(ChainConfig.from_ratios(0.1, 1.0))
        with pytest.raises(DegenerateDelta):
            solve_obc_analytic(ChainConfig.from_ratios(0.1, -1.0))

    def test_preconditions(self):
        with pytest.raises(InvalidConfig):
            solve_obc_analytic(ChainConfig.from_ratios(0.1, 0.5, boundary="PBC"))
        with pytest.raises(InvalidConfig):
            solve_obc_analytic(ChainConfig.from_ratios(0.1, 0.5,
                                                       delta_lambda=0.04))
        with pytest.raises(RegimeError):
            solve_obc_analytic(ChainConfig.from_ratios(1.2, 0.5))

    @settings(max_examples=40, deadline=None)
    @given(mu=st.floats(0.02, 0.95), delta=st.floats(-0.95, 0.95),
           n_cells=st.integers(4, 60))
    def test_residual_property(self, mu, delta, n_cells):
        # dual-route: the closed form either returns a valid equilibrium or
        # refuses (short chain), in which case Newton must cover the point
        cfg = ChainConfig.from_ratios(mu, delta, n_cells=n_cells)
        try:
            profile = solve_obc_analytic(cfg)
            assert profile.residual <= 1e-10
        except RegimeError:
            profile = solve_newton(cfg)
            assert profile.residual <= 1e-12
        assert (profile.alpha_sq >= 0).all() and (profile.beta_sq >= 0).all()

    def test_pbc_limit_small_mu(self):
        # deviation from the closed-chain value at a fixed interior cell
        # (n = 2) dies exponentially as mu -> 0 (tau -> 0)
        devs = []
        for mu in (1e-2, 1e-3):
            cfg = ChainConfig.from_ratios(mu, 0.5, n_cells=25)
            profile = solve_obc_analytic(cfg)
            gbar_sq = derive_params(cfg).gbar_sq
            devs.append(abs(profile.alpha_sq[1] - gbar_sq) / gbar_sq)
        assert devs[0] < 1e-4
        assert 0.0 < devs[1] < devs[0]


class TestNewton:
    def test_matches_analytic(self):
        for mu, delta, n in [(0.1, 0.5, 25), (0.5, -0.3, 12), (0.9, 0.8, 30)]:
            cfg = ChainConfig.from_ratios(mu, delta, n_cells=n)
            analytic = solve_obc_analytic(cfg)
            newton = solve_newton(cfg)
            assert np.abs(newton.alpha_sq - analytic.alpha_sq).max() <= 1e-9
            assert np.abs(newton.beta_sq - analytic.beta_sq).max() <= 1e-9
            assert newton.residual <= 1e-12

    def test_topological_corner_with_reduced_drive(self):
        # delta = 1, delta_lambda = 0.02 lambda: the decoupled edge site sits
        # at g^2 (1 - delta_lambda / (lambda - omega)) = 25 * 0.96
        cfg = ChainConfig.from_ratios(0.1, 1.0, n_cells=25, delta_lambda=0.04)
        profile = solve_newton(cfg)
        assert profile.alpha_sq[0] == pytest.approx(24.0, abs=1e-9)
        assert profile.beta_sq[-1] == pytest.approx(24.0, abs=1e-9)

    def test_trivial_corner_with_reduced_drive(self):
        # delta = -1: impurity in the first pair (A1, B1). The enhanced
        # partner is beta_1 (mirror alpha_N); beta_2 stays at gbar^2 exactly
        # since the pairs are decoupled.
        cfg = ChainConfig.from_ratios(0.1, -1.0, n_cells=25, delta_lambda=0.04)
        profile = solve_newton(cfg)
        d = derive_params(cfg)
        corr = 0.04 / ((1 - 0.1) * 1.0)
        assert profile.alpha_sq[0] == pytest.approx(d.gbar_sq * (1 - corr), rel=1e-12)
        assert profile.beta_sq[0] == pytest.approx(d.gbar_sq * (1 + 0.1 * corr), rel=1e-12)
        assert profile.alpha_sq[-1] == pytest.approx(d.gbar_sq * (1 + 0.1 * corr), rel=1e-12)
        assert profile.beta_sq[1] == pytest.approx(d.gbar_sq, rel=1e-12)

    def test_residual_with_drive_reduction(self):
        cfg = ChainConfig.from_ratios(0.1, 0.5, n_cells=25, delta_lambda=0.04)
        profile = solve_newton(cfg)
        assert profile.residual <= 1e-12
        assert oracle_residual(cfg, profile) <= 1e-12

    def test_below_threshold_refused(self):
        with pytest.raises(RegimeError):
            solve_newton(ChainConfig(omega=1, lam=0.5, eps_L=0.02,
                                     eps_1=0.02, eps_2=0, n_cells=4))

    def test_pbc_route(self):
        cfg = ChainConfig.from_ratios(0.3, 0.2, boundary="PBC", n_cells=8)
        newton = solve_newton(cfg)
        pbc = solve_pbc(cfg)
        assert np.abs(newton.alpha_sq - pbc.alpha_sq).max() <= 1e-9


class TestDefectsOracleAgreement:
    def test_package_vs_independent(self):
        cfg = ChainConfig.from_ratios(0.3, 0.4, n_cells=9, delta_lambda=0.1)
        rng = np.random.default_rng(7)
        a2 = rng.uniform(5, 30, 9)
        b2 = rng.uniform(5, 30, 9)
        ours = equation_defects(cfg, a2, b2)
        theirs = equilibrium_defects(cfg.omega, cfg.lam, cfg.eps_L, cfg.eps_1,
                                     cfg.eps_2, a2, b2, pbc=False,
                                     delta_lambda=cfg.delta_lambda)
        assert np.abs(ours - theirs).max() <= 1e-12


class TestBulkWindow:
    def test_examples(self):
        def window(tau, n):
            d = DerivedParams(g_sq=25, mu=0.1, delta=0.5, gbar_sq=22.7,
                              tau=tau, omega_h=2.8)
            return bulk_window(d, n)

        w = window(0.16, 25)
        assert (w.n_lo, w.n_hi, w.empty) == (2, 23, False)
        w = window(1e-9, 25)
        assert (w.n_lo, w.n_hi, w.empty) == (1, 24, False)
        w = window(2.0, 25)
        assert (w.n_lo, w.n_hi, w.empty) == (20, 5, True)

    def test_undefined(self):
        d = DerivedParams(g_sq=25, mu=1.5, delta=0.5, gbar_sq=10, tau=None,
                          omega_h=2.8, tau_reason="mu outside (0, 1)")
        with pytest.raises(TauUndefined):
            bulk_window(d, 25)
