"""Analytic effective models for boundary-mode death and revival.

At |delta| = 1 the chain decouples into independent blocks: two single sites
plus N-1 pairs in the topological corner (delta = 1, eps_1 = 0), or N pairs
in the trivial corner (delta = -1, eps_2 = 0). The degenerate manifold of
block modes at the drive-set energy omega_H is captured by a tridiagonal
Toeplitz chain; a boundary-drive reduction detunes the end sites and restores
(topological) or induces (impurity) localized boundary modes.

Every closed-form expression in this module is paired with a numeric route
drawn from the BdG machinery, and both values are reported, so leading-order
formulas cannot silently drift from the exact spectra.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import (InvalidConfig, NoLocalizedModes, OutOfValidity,
                     PerturbationInvalid)
from .gaussian import QuadraticCoefficients
from .model import Boundary, ChainConfig, derive_params
from . import bdg


class ValidityWarning(UserWarning):
    """Closed form evaluated at the edge of its validity region."""


@dataclass(frozen=True)
class ToeplitzSpectrum:
    """Uniform tridiagonal chain of n_modes sites at energy omega_h with
    hopping t: E_nu = omega_h + 2 t cos(pi nu / (n_modes + 1)), sine modes."""
    energies: np.ndarray
    modes: np.ndarray          # (n_modes, n_modes), column nu-1 is mode nu
    omega_h: float
    t: float


def toeplitz_spectrum(n_modes: int, omega_h: float, t: float) -> ToeplitzSpectrum:
    if n_modes < 2:
        raise InvalidConfig("toeplitz_spectrum needs n_modes >= 2")
    nu = np.arange(1, n_modes + 1)
    energies = omega_h + 2 * t * np.cos(np.pi * nu / (n_modes + 1))
    sites = np.arange(1, n_modes + 1)
    modes = math.sqrt(2 / (n_modes + 1)) * np.sin(
        np.pi * np.outer(sites, nu) / (n_modes + 1))
    return ToeplitzSpectrum(energies, modes, omega_h, t)


@dataclass(frozen=True)
class PerturbedEdgeResult:
    e_perturbative: float          # omega_h - delta_wh - t^2/delta_wh
    e_exact: np.ndarray            # the two lowest levels of the finite chain
    n_sites: int


def perturbed_edge_energy(omega_h: float, t: float, delta_wh: float,
                          n_cells: int = 3) -> PerturbedEdgeResult:
    """Edge energy of the Toeplitz chain with both end sites detuned by
    -delta_wh, to second order in t, next to the exact diagonalization of the
    (n_cells + 1)-site chain.

    With one intervening pair of bulk sites (n_cells = 3) the end-to-end
    splitting enters at third order, so the second-order formula is accurate
    to O(t^3 / delta_wh^2) there; longer chains push the splitting to higher
    order and leave a quartic residual.
    """
    if t >= delta_wh:
        raise PerturbationInvalid(f"requires t < delta_wh (t = {t}, "
                                  f"delta_wh = {delta_wh})")
    n_sites = n_cells + 1
    diag = np.full(n_sites, omega_h)
    diag[0] -= delta_wh
    diag[-1] -= delta_wh
    evs = eigh_tridiagonal(diag, np.full(n_sites - 1, t), eigvals_only=True)
    e_pert = omega_h - delta_wh - t**2 / delta_wh
    return PerturbedEdgeResult(e_pert, np.sort(evs)[:2], n_sites)


def edge_energy_delta1(cfg: ChainConfig) -> float:
    """Isolated edge-site energy at delta = 1 with a reduced boundary drive:
    omega_e = omega_H sqrt[(1 - delta_lambda/lambda)(1 - delta_lambda/(lambda-omega))]."""
    d = derive_params(cfg)
    if d.delta != 1.0:
        raise InvalidConfig(f"closed form holds at delta = 1 (got {d.delta})")
    if cfg.delta_lambda >= cfg.lam - cfg.omega:
        raise OutOfValidity("delta_lambda >= lambda - omega: boundary site "
                            "driven below threshold")
    omega_e = d.omega_h * math.sqrt((1 - cfg.delta_lambda / cfg.lam)
                                    * (1 - cfg.delta_lambda / (cfg.lam - cfg.omega)))
    em_pi, _ = bdg.dispersion_at_pi(cfg)
    if omega_e <= em_pi:
        warnings.warn("edge energy fell below the lower band: delta_lambda "
                      "too large for an in-gap mode", ValidityWarning)
    return omega_e


def _boundary_pair_solution(cfg: ChainConfig) -> np.ndarray:
    """Exact BdG energies of the impurity-bearing boundary pair at delta = -1.

    The chain decouples into pairs (A_n, B_n); the first pair carries the
    drive reduction on A_1, with occupations
    |alpha_1|^2 = gbar^2 (1 - delta_lambda/((1-mu)(lambda-omega))) and
    |beta_1|^2 = gbar^2 (1 + mu delta_lambda/((1-mu)(lambda-omega))).
    """
    d = derive_params(cfg)
    corr = cfg.delta_lambda / ((1 - d.mu) * (cfg.lam - cfg.omega))
    a_sq = d.gbar_sq * (1 - corr)
    b_sq = d.gbar_sq * (1 + d.mu * corr)
    lam_a = cfg.lam - cfg.delta_lambda
    coeffs = QuadraticCoefficients(
        omega_a=np.array([lam_a + 2 * cfg.eps_L * a_sq]),
        lambda_a=np.array([lam_a - 2 * cfg.eps_L * a_sq]),
        omega_b=np.array([cfg.lam + 2 * cfg.eps_L * b_sq]),
        lambda_b=np.array([cfg.lam - 2 * cfg.eps_L * b_sq]),
        j1=np.array([cfg.eps_1 * math.sqrt(a_sq * b_sq)]),
        j2=np.zeros(0), boundary=Boundary.OBC)
    return bdg.diagonalize(bdg.assemble(coeffs), check_pairing=False).energies


@dataclass(frozen=True)
class SpuriousEnergy:
    leading: float                 # omega_H (1 - (2 lambda - omega)/(4(lambda-omega)) dl/l)
    exact: float                   # upper mode of the boundary-pair BdG block
    pair_energies: np.ndarray


def spurious_energy(cfg: ChainConfig) -> SpuriousEnergy:
    """Impurity-induced boundary-mode energy at delta = -1, leading order in
    delta_lambda/lambda plus the exact boundary-pair value."""
    d = derive_params(cfg)
    if d.delta != -1.0:
        raise InvalidConfig(f"closed form holds at delta = -1 (got {d.delta})")
    lead = d.omega_h * (1 - (2 * cfg.lam - cfg.omega)
                        / (4 * (cfg.lam - cfg.omega)) * cfg.delta_lambda / cfg.lam)
    pair = _boundary_pair_solution(cfg)
    return SpuriousEnergy(lead, float(pair.max()), pair)


def _in_gap_count(cfg: ChainConfig, delta: float) -> int:
    point = cfg.at_delta(delta)
    sol = bdg.solution_for(point, check_pairing=False)
    em_pi, ep_pi = bdg.dispersion_at_pi(point)
    tol = bdg.IN_GAP_TOL * derive_params(point).omega_h
    return int(((sol.energies > em_pi + tol)
                & (sol.energies < ep_pi - tol)).sum())


@dataclass(frozen=True)
class DeltaSpurResult:
    analytic: float                # -1 + 2 (1/mu + 1) delta_lambda / lambda
    numeric: float                 # last in-gap boundary level leaves the gap


def delta_spur(cfg: ChainConfig, refine: float = 1e-3) -> DeltaSpurResult:
    """Delocalization threshold of the impurity boundary modes.

    The numeric value bisects, over delta in (-1, 0), the point where the last
    strictly-in-gap boundary level meets the lower edge of the upper band and
    disappears from the gap.
    """
    d = derive_params(cfg)
    if not 0 < d.mu < 1 or cfg.delta_lambda <= 0:
        raise InvalidConfig("delta_spur needs 0 < mu < 1 and delta_lambda > 0")
    analytic = -1 + 2 * (1 / d.mu + 1) * cfg.delta_lambda / cfg.lam
    lo, hi = -0.999, -0.01
    if _in_gap_count(cfg, lo) < 1:
        raise NoLocalizedModes("no in-gap boundary level near delta = -1")
    while hi - lo > refine:
        mid = 0.5 * (lo + hi)
        if _in_gap_count(cfg, mid) >= 1:
            lo = mid
        else:
            hi = mid
    return DeltaSpurResult(analytic, 0.5 * (lo + hi))


@dataclass(frozen=True)
class XiSpurEstimate:
    xi: float | None
    delocalized: bool
    energy_over_omega_h: float     # perturbative spurious energy / omega_H


def xi_spur_estimate(cfg: ChainConfig, delta: float) -> XiSpurEstimate:
    """Perturbative localization length of the impurity boundary modes.

    Combines the second-order impurity energy (strong-drive convention,
    omega = 0) with the gap localization formula; flagged delocalized when
    the estimate leaves its validity region, consistently with delta_spur.
    """
    if cfg.omega != 0.0:
        raise InvalidConfig("impurity-length estimate is derived in the "
                            "strong-drive convention omega = 0, lambda = 1")
    d = derive_params(cfg)
    if cfg.delta_lambda <= 0:
        raise InvalidConfig("xi_spur_estimate needs delta_lambda > 0")
    e_ratio = (1 - cfg.delta_lambda / (2 * cfg.lam)
               - cfg.lam / (8 * cfg.delta_lambda)
               * (d.mu * (1 + delta) / (1 + d.mu))**2)
    chi = (1 - (1 + d.mu) * e_ratio**2) / d.mu
    denom = 1 - delta**2
    ratio = (1 - chi**2) / denom if denom > 0 else math.inf
    if ratio <= 1:
        return XiSpurEstimate(None, True, e_ratio)
    return XiSpurEstimate(1 / (2 * math.acosh(math.sqrt(ratio))), False, e_ratio)


def _two_gap_modes_localized(cfg: ChainConfig, delta: float,
                             half_chain: float) -> bool:
    point = cfg.at_delta(delta)
    sol = bdg.solution_for(point, check_pairing=False)
    records = bdg.classify_modes(sol, point)
    gap_modes = [r for r in records if r.in_gap]
    if len(gap_modes) < 2:
        return False
    pair = sorted(gap_modes, key=lambda r: r.weight_edge)[-2:]
    return all(r.xi_fit is not None and r.xi_fit <= half_chain for r in pair)


@dataclass(frozen=True)
class DeltaTopResult:
    delta_top: float
    grid_bracket: tuple[float, float]


def delta_top_scan(cfg: ChainConfig, delta_grid) -> DeltaTopResult:
    """Smallest delta > 0 at which both in-gap modes fit with xi <= N/2,
    refined by bisection to 1e-3."""
    if cfg.delta_lambda <= 0:
        raise InvalidConfig("delta_top_scan needs delta_lambda > 0")
    half = cfg.n_cells / 2
    grid = sorted(float(x) for x in delta_grid)
    if not grid or grid[0] <= 0 or grid[-1] > 1:
        raise InvalidConfig("delta grid must lie inside (0, 1]")
    flags = [_two_gap_modes_localized(cfg, x, half) for x in grid]
    if not any(flags):
        raise NoLocalizedModes("no delta on the grid localizes both in-gap modes")
    first = flags.index(True)
    if first == 0:
        return DeltaTopResult(grid[0], (grid[0], grid[0]))
    lo, hi = grid[first - 1], grid[first]
    bracket = (lo, hi)
    while hi - lo > 1e-3:
        mid = 0.5 * (lo + hi)
        if _two_gap_modes_localized(cfg, mid, half):
            hi = mid
        else:
            lo = mid
    return DeltaTopResult(hi, bracket)


# ---------------------------------------------------------------------------
# full edge-mode analysis used by the CLI

@dataclass(frozen=True)
class XiCurveRow:
    delta: float
    xi_topological: float | None
    xi_spurious: float | None
    source: str                    # fit | formula | analytic


@dataclass(frozen=True)
class EdgeAnalysis:
    omega_e_top: float
    omega_e_top_numeric: float
    omega_spur: SpuriousEnergy
    delta_spur_analytic: float
    delta_spur_numeric: float
    delta_top: float | None
    ssh_fit: dict                  # slope/intercept/r_squared of xi^-1 vs log((1+d)/(1-d))
    xi_curves: list[XiCurveRow]
    delta_spur_curve: list[tuple[float, float]]   # (mu, analytic threshold)


def edge_scan(cfg: ChainConfig, delta_grid) -> EdgeAnalysis:
    """Boundary-mode analysis across a delta grid: in-gap localization lengths
    (fit and formula), closed-form boundary energies with numeric
    counterparts, and both thresholds."""
    d = derive_params(cfg)
    if cfg.delta_lambda <= 0 or cfg.boundary is not Boundary.OBC:
        raise InvalidConfig("edge_scan needs OBC and delta_lambda > 0")

    points = bdg.spectrum_vs_delta(cfg, delta_grid, fit=True)
    rows: list[XiCurveRow] = []
    ssh_x, ssh_y = [], []
    for pt in points:
        if pt.error is not None or pt.records is None:
            continue
        gap_modes = [r for r in pt.records if r.in_gap]
        if not gap_modes:
            continue
        top = pt.delta > 0
        for source in ("fit", "formula"):
            vals = []
            for r in gap_modes:
                v = r.xi_fit if source == "fit" else r.xi_formula
                if v is not None and math.isfinite(v):
                    vals.append(v)
            if not vals:
                continue
            xi_val = float(np.mean(vals))
            rows.append(XiCurveRow(pt.delta,
                                   xi_val if top else None,
                                   None if top else xi_val, source))
            if source == "formula" and top and 0 < abs(pt.delta) < 1 \
                    and xi_val <= cfg.n_cells / 2:
                ssh_x.append(math.log((1 + pt.delta) / (1 - pt.delta)))
                ssh_y.append(1 / xi_val)
        if not top and cfg.omega == 0.0:
            est = xi_spur_estimate(cfg, pt.delta)
            if est.xi is not None:
                rows.append(XiCurveRow(pt.delta, None, est.xi, "analytic"))

    ssh_fit = {"slope": None, "intercept": None, "r_squared": None}
    if len(ssh_x) >= 3:
        slope, intercept = np.polyfit(ssh_x, ssh_y, 1)
        pred = slope * np.asarray(ssh_x) + intercept
        y = np.asarray(ssh_y)
        ss = float(((y - y.mean())**2).sum())
        r2 = 1 - float(((y - pred)**2).sum()) / ss if ss > 0 else 0.0
        ssh_fit = {"slope": float(slope), "intercept": float(intercept),
                   "r_squared": r2}

    cfg_top = cfg.at_delta(1.0)
    omega_e = edge_energy_delta1(cfg_top)
    sol_top = bdg.solution_for(cfg_top, check_pairing=False)
    em_pi, ep_pi = bdg.dispersion_at_pi(cfg_top)
    tol = bdg.IN_GAP_TOL * d.omega_h
    in_gap = sol_top.energies[(sol_top.energies > em_pi + tol)
                              & (sol_top.energies < ep_pi - tol)]
    omega_e_numeric = float(in_gap.mean()) if len(in_gap) else math.nan

    spur = spurious_energy(cfg.at_delta(-1.0))
    thresh = delta_spur(cfg)
    try:
        top = delta_top_scan(cfg, [x for x in delta_grid if 0 < x <= 1])
        delta_top = top.delta_top
    except NoLocalizedModes:
        delta_top = None

    mu_grid = np.linspace(0.02, min(0.98, 2 * d.mu + 0.5), 49)
    curve = [(float(m), -1 + 2 * (1 / m + 1) * cfg.delta_lambda / cfg.lam)
             for m in mu_grid]
    return EdgeAnalysis(omega_e, omega_e_numeric, spur,
                        thresh.analytic, thresh.numeric, delta_top,
                        ssh_fit, rows, curve)
