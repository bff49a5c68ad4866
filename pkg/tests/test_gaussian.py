import numpy as np
import pytest

from kerrchain import (ChainConfig, build_coefficients, derive_params,
                       pbc_constants, solve_newton, solve_obc_analytic,
                       solve_pbc)
from kerrchain.errors import BoundaryMismatch, InvalidProfile
from kerrchain.model import Boundary
from kerrchain.semiclassical import ProfileSource, SemiclassicalProfile

from oracles import linear_fit_r2, pbc_coefficient_constants


def test_sum_identity_exact():
    # Omega_In + Lambda_In = 2 lambda_n per site, including the reduced sites
    cfg = ChainConfig.from_ratios(0.3, 0.4, n_cells=12, delta_lambda=0.1)
    coeffs = build_coefficients(solve_newton(cfg), cfg)
    lam_a = coeffs.omega_a + coeffs.lambda_a
    lam_b = coeffs.omega_b + coeffs.lambda_b
    expect_a = np.full(12, 2 * cfg.lam)
    expect_b = np.full(12, 2 * cfg.lam)
    expect_a[0] -= 2 * cfg.delta_lambda
    expect_b[-1] -= 2 * cfg.delta_lambda
    assert np.abs(lam_a - expect_a).max() <= 1e-15 * 2 * cfg.lam
    assert np.abs(lam_b - expect_b).max() <= 1e-15 * 2 * cfg.lam


def test_pbc_constants_match_closed_form():
    cfg = ChainConfig.from_ratios(0.1, 0.5, boundary="PBC", n_cells=8)
    coeffs = build_coefficients(solve_pbc(cfg), cfg)
    big_o, big_l, j1, j2 = pbc_coefficient_constants(
        cfg.omega, cfg.lam, cfg.eps_L, cfg.eps_1, cfg.eps_2)
    for arr, val in [(coeffs.omega_a, big_o), (coeffs.omega_b, big_o),
                     (coeffs.lambda_a, big_l), (coeffs.lambda_b, big_l),
                     (coeffs.j1, j1), (coeffs.j2, j2)]:
        assert np.abs(arr - val).max() <= 1e-14 * max(abs(val), 1.0)
    assert pbc_constants(cfg) == pytest.approx((big_o, big_l, j1, j2), rel=1e-14)


def test_decoupled_limit():
    cfg = ChainConfig(omega=1, lam=2, eps_L=0.02, eps_1=0, eps_2=0,
                      n_cells=6, boundary="PBC")
    coeffs = build_coefficients(solve_pbc(cfg), cfg)
    assert coeffs.j1 == pytest.approx([0.0] * 6, abs=0)
    assert coeffs.j2 == pytest.approx([0.0] * 6, abs=0)
    assert coeffs.omega_a == pytest.approx([3.0] * 6, rel=1e-15)   # 2 lam - omega
    assert coeffs.lambda_a == pytest.approx([1.0] * 6, rel=1e-15)  # omega


def test_topological_corner_edge_sites():
    # delta = 1, delta_lambda = 0: isolated edge sites at g^2, bulk at gbar^2
    cfg = ChainConfig.from_ratios(0.1, 1.0, n_cells=10)
    d = derive_params(cfg)
    coeffs = build_coefficients(solve_newton(cfg), cfg)
    assert coeffs.omega_a[0] == pytest.approx(cfg.lam + 2 * cfg.eps_L * d.g_sq,
                                              rel=1e-12)
    assert coeffs.omega_b[-1] == pytest.approx(cfg.lam + 2 * cfg.eps_L * d.g_sq,
                                               rel=1e-12)
    bulk = cfg.lam + 2 * cfg.eps_L * d.gbar_sq
    assert np.abs(coeffs.omega_a[1:] - bulk).max() <= 1e-12 * bulk
    assert np.abs(coeffs.omega_b[:-1] - bulk).max() <= 1e-12 * bulk


def test_j2_lengths():
    obc = ChainConfig.from_ratios(0.1, 0.5, n_cells=9)
    pbc = ChainConfig.from_ratios(0.1, 0.5, n_cells=9, boundary="PBC")
    assert len(build_coefficients(solve_obc_analytic(obc), obc).j2) == 8
    assert len(build_coefficients(solve_pbc(pbc), pbc).j2) == 9


def test_bulk_exponential_convergence():
    # OBC coefficients approach the closed-chain constants exponentially,
    # with the profile's decay rate 1/tau
    cfg = ChainConfig.from_ratios(0.3, 0.5, n_cells=40)
    d = derive_params(cfg)
    coeffs = build_coefficients(solve_obc_analytic(cfg), cfg)
    big_o = pbc_coefficient_constants(cfg.omega, cfg.lam, cfg.eps_L,
                                      cfg.eps_1, cfg.eps_2)[0]
    n = np.arange(3, 9)          # beyond n = 9 the deviation underflows
    dev = np.abs(coeffs.omega_a[n - 1] - big_o)
    assert (dev > 0).all()
    slope, _, r2 = linear_fit_r2(n, np.log(dev))
    assert r2 >= 0.999
    assert slope == pytest.approx(-1 / d.tau, rel=0.05)
    assert (dev <= dev[0] * np.exp(-(n - n[0]) / d.tau) * 1.5).all()


def test_boundary_mismatch_and_gates():
    obc = ChainConfig.from_ratios(0.1, 0.5, n_cells=9)
    pbc = ChainConfig.from_ratios(0.1, 0.5, n_cells=9, boundary="PBC")
    profile = solve_obc_analytic(obc)
    with pytest.raises(BoundaryMismatch):
        build_coefficients(profile, pbc)
    stale = SemiclassicalProfile(profile.alpha_sq * 1.2, profile.beta_sq,
                                 Boundary.OBC, ProfileSource.NEWTON,
                                 residual=0.3)
    with pytest.raises(InvalidProfile):
        build_coefficients(stale, obc)
    with pytest.raises(BoundaryMismatch):
        short = ChainConfig.from_ratios(0.1, 0.5, n_cells=8)
        build_coefficients(profile, short)


def test_j_positive():
    cfg = ChainConfig.from_ratios(0.7, -0.6, n_cells=15)
    coeffs = build_coefficients(solve_obc_analytic(cfg), cfg)
    assert (coeffs.j1 >= 0).all() and (coeffs.j2 >= 0).all()
