"""Mean-field equilibrium profiles of the chain.

State variables are the squared amplitudes |alpha_n|^2, |beta_n|^2 (the
equilibrium amplitudes are purely imaginary, so phases carry no information;
we fix the sector with all imaginary parts positive). The equilibrium
conditions,

    2|alpha_n|^2 + (eps_1/eps_L)|beta_n|^2 + (eps_2/eps_L)|beta_{n-1}|^2 = 2 g_{An}^2
    2|beta_n|^2  + (eps_1/eps_L)|alpha_n|^2 + (eps_2/eps_L)|alpha_{n+1}|^2 = 2 g_{Bn}^2

with g_{In}^2 = (lambda_n - omega)/(2 eps_L) and lambda_n reduced by
delta_lambda on the outermost sites, close periodically (PBC) or with
alpha_{N+1} = beta_0 = 0 (OBC). There are 2^{2N} sign-equivalent solutions;
only the all-positive representative is computed.

Residuals quoted anywhere in this module are max-norm defects of the above
equations in units of g^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (DegenerateDelta, InvalidConfig, NegativeAmplitude,
                     NoConvergence, RegimeError, TauUndefined)
from .model import Boundary, ChainConfig, DerivedParams, derive_params

NEWTON_TOL = 1e-12         # residual target, units of g^2
NEWTON_MAX_ITER = 200
OBC_ANALYTIC_TOL = 1e-10   # closed-form validity gate, units of g^2


class ProfileSource(str, Enum):
    ANALYTIC_PBC = "AnalyticPBC"
    ANALYTIC_OBC = "AnalyticOBC"
    NEWTON = "Newton"


@dataclass(frozen=True)
class ObcConstants:
    """Constants (c1, c2, R) of the exponential representation
    |alpha_n|^2 = gbar^2 + c1 e^{-n/tau} + c2 e^{n/tau}; informational only
    (c1, c2 may overflow to inf for very short tau)."""
    c1: float
    c2: float
    big_r: float


@dataclass(frozen=True)
class SemiclassicalProfile:
    alpha_sq: np.ndarray
    beta_sq: np.ndarray
    boundary: Boundary
    source: ProfileSource
    residual: float
    obc_constants: ObcConstants | None = None

    @property
    def n_cells(self) -> int:
        return len(self.alpha_sq)


def equation_defects(cfg: ChainConfig, alpha_sq: np.ndarray,
                     beta_sq: np.ndarray) -> np.ndarray:
    """Raw defects of the 2N equilibrium equations for a candidate profile.

    This is the residual oracle used by every solver and test: it evaluates
    the equations directly, independent of how the profile was produced.
    """
    N = cfg.n_cells
    k1 = cfg.eps_1 / cfg.eps_L
    k2 = cfg.eps_2 / cfg.eps_L
    g_sq = (cfg.lam - cfg.omega) / (2 * cfg.eps_L)
    red = cfg.delta_lambda / (2 * cfg.eps_L)
    ga = np.full(N, g_sq)
    gb = np.full(N, g_sq)
    if cfg.boundary is Boundary.OBC:
        ga[0] -= red
        gb[-1] -= red
        b_prev = np.concatenate(([0.0], beta_sq[:-1]))
        a_next = np.concatenate((alpha_sq[1:], [0.0]))
    else:
        b_prev = np.roll(beta_sq, 1)
        a_next = np.roll(alpha_sq, -1)
    r_a = 2 * alpha_sq + k1 * beta_sq + k2 * b_prev - 2 * ga
    r_b = 2 * beta_sq + k1 * alpha_sq + k2 * a_next - 2 * gb
    return np.concatenate((r_a, r_b))


def _residual(cfg: ChainConfig, alpha_sq, beta_sq) -> float:
    g_sq = (cfg.lam - cfg.omega) / (2 * cfg.eps_L)
    return float(np.abs(equation_defects(cfg, alpha_sq, beta_sq)).max() / g_sq)


def solve_pbc(cfg: ChainConfig) -> SemiclassicalProfile:
    """Homogeneous equilibrium of the closed chain: all occupations gbar^2."""
    d = derive_params(cfg)
    if cfg.lam <= cfg.omega:
        raise RegimeError("PBC equilibrium requires lambda > omega")
    if d.mu >= 1:
        raise RegimeError(f"homogeneous solution unstable for mu = {d.mu} >= 1")
    alpha_sq = np.full(cfg.n_cells, d.gbar_sq)
    beta_sq = alpha_sq.copy()
    return SemiclassicalProfile(alpha_sq, beta_sq, Boundary.PBC,
                                ProfileSource.ANALYTIC_PBC,
                                _residual(cfg, alpha_sq, beta_sq))


def solve_obc_analytic(cfg: ChainConfig) -> SemiclassicalProfile:
    """Closed-form open-chain equilibrium (no boundary-drive reduction).

    |alpha_n|^2 = gbar^2 [ (4/R) sinh((N+1-n)/tau) + 1 - e^{-(N+1-n)/tau} ],
    R = mu e^{N/tau} [(1-delta) e^{1/tau} + (1+delta)], with the mirror
    image |beta_n|^2 = |alpha_{N+1-n}|^2 copied exactly. Evaluated in a
    rearranged form whose exponents are all non-positive, so it never
    overflows however short tau gets.

    The closed form is a large-N asymptote: its first-cell closure is
    satisfied only up to O(e^{-N/tau}) (quantified against the Newton
    oracle). When the measured residual exceeds the profile tolerance the
    solver refuses and points at solve_newton instead of returning a
    non-equilibrium.
    """
    if cfg.boundary is not Boundary.OBC:
        raise InvalidConfig("solve_obc_analytic requires an OBC config")
    if cfg.delta_lambda != 0.0:
        raise InvalidConfig("closed form only valid for delta_lambda = 0; "
                            "use solve_newton")
    d = derive_params(cfg)
    if cfg.lam <= cfg.omega:
        raise RegimeError("open-chain equilibrium requires lambda > omega")
    if d.delta is not None and abs(d.delta) == 1.0:
        raise DegenerateDelta("|delta| = 1: tau singular; use solve_newton or "
                              "the decoupled constructions in the edge module")
    if not 0 < d.mu < 1 or d.tau is None:
        raise RegimeError(f"closed form requires 0 < mu < 1 and |delta| < 1 "
                          f"(mu = {d.mu}, delta = {d.delta})")

    N = cfg.n_cells
    tau, delta, gbar_sq = d.tau, d.delta, d.gbar_sq
    n = np.arange(1, N + 1, dtype=float)
    m = N + 1 - n
    # (4/R) sinh(m/tau) = 2 (e^{-n/tau} - e^{-(2N+2-n)/tau}) / denom
    denom = d.mu * ((1 - delta) + (1 + delta) * math.exp(-1 / tau))
    alpha_sq = gbar_sq * (1.0 - np.exp(-m / tau)
                          + 2.0 * (np.exp(-n / tau)
                                   - np.exp(-(2 * N + 2 - n) / tau)) / denom)
    beta_sq = alpha_sq[::-1].copy()

    with np.errstate(over="ignore"):
        e_up = np.exp((N + 1) / tau)
        big_r = d.mu * math.exp(N / tau) * ((1 - delta) * math.exp(1 / tau)
                                            + (1 + delta)) if N / tau < 700 else math.inf
        c1 = float(gbar_sq * 2 * e_up / big_r) if math.isfinite(big_r) else math.inf
        c2 = float(-gbar_sq * (1 + 2 / big_r) / e_up) if math.isfinite(big_r) else -0.0
    residual = _residual(cfg, alpha_sq, beta_sq)
    if residual > OBC_ANALYTIC_TOL:
        raise RegimeError(
            f"closed-form residual {residual:.3e} > {OBC_ANALYTIC_TOL:.0e}: "
            f"N = {N} too short for tau = {tau:.3g} (boundary closure holds "
            f"to O(e^(-N/tau))); use solve_newton")
    return SemiclassicalProfile(alpha_sq, beta_sq, Boundary.OBC,
                                ProfileSource.ANALYTIC_OBC, residual,
                                ObcConstants(c1, c2, big_r))


def _equation_system(cfg: ChainConfig):
    """Matrix form M z = rhs of the equilibrium equations,
    z = (|alpha_1|^2 .. |alpha_N|^2, |beta_1|^2 .. |beta_N|^2)."""
    N = cfg.n_cells
    k1 = cfg.eps_1 / cfg.eps_L
    k2 = cfg.eps_2 / cfg.eps_L
    g_sq = (cfg.lam - cfg.omega) / (2 * cfg.eps_L)
    red = cfg.delta_lambda / cfg.eps_L
    pbc = cfg.boundary is Boundary.PBC
    M = np.zeros((2 * N, 2 * N))
    rhs = np.full(2 * N, 2 * g_sq)
    for i in range(N):
        M[i, i] += 2.0
        M[i, N + i] += k1
        if i > 0:
            M[i, N + i - 1] += k2
        elif pbc:
            M[i, 2 * N - 1] += k2
        M[N + i, N + i] += 2.0
        M[N + i, i] += k1
        if i + 1 < N:
            M[N + i, i + 1] += k2
        elif pbc:
            M[N + i, 0] += k2
    if not pbc and cfg.delta_lambda > 0:
        rhs[0] -= red
        rhs[2 * N - 1] -= red
    return M, rhs


def solve_newton(cfg: ChainConfig) -> SemiclassicalProfile:
    """Damped Newton iteration on the 2N squared amplitudes.

    Handles any boundary kind, |delta| = 1, and the boundary drive reduction
    delta_lambda. The equations are linear in the squared magnitudes, so from
    the analytic initial guess a full Newton step lands on the solution; the
    damping and backtracking only matter as guards. Failure to stay in the
    physical cone (negative occupations) signals leaving the stable
    homogeneous phase.
    """
    if cfg.lam <= cfg.omega:
        raise RegimeError("equilibrium solver requires lambda > omega")
    d = derive_params(cfg)
    g_sq = d.g_sq
    N = cfg.n_cells

    # initial guess: analytic OBC profile where defined, else flat gbar^2
    try:
        guess = solve_obc_analytic(cfg)
        z = np.concatenate((guess.alpha_sq, guess.beta_sq))
    except (InvalidConfig, RegimeError, DegenerateDelta):
        z = np.full(2 * N, d.gbar_sq)

    M, rhs = _equation_system(cfg)
    res = lambda v: np.abs(M @ v - rhs).max() / g_sq

    r = res(z)
    for _ in range(NEWTON_MAX_ITER):
        if r <= NEWTON_TOL:
            break
        try:
            dz = np.linalg.solve(M, rhs - M @ z)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(f"singular equilibrium system: {exc}") from exc
        step = 1.0
        while step > 2.0**-20:
            trial = z + step * dz
            r_trial = res(trial)
            if r_trial < r:
                z, r = trial, r_trial
                break
            step *= 0.5          # damping with residual backtracking
        else:
            raise NoConvergence(f"backtracking stalled at residual {r:.3e}")
    else:
        raise NoConvergence(f"no convergence after {NEWTON_MAX_ITER} "
                            f"iterations (residual {r:.3e})")

    # project tiny numerical negatives onto the cone; real ones are physics
    floor = -1e-12 * g_sq
    if z.min() < floor:
        raise NegativeAmplitude(
            f"occupation {z.min():.3e} < 0: no stable all-condensed solution")
    z = np.clip(z, 0.0, None)
    alpha_sq, beta_sq = z[:N].copy(), z[N:].copy()
    return SemiclassicalProfile(alpha_sq, beta_sq, cfg.boundary,
                                ProfileSource.NEWTON,
                                _residual(cfg, alpha_sq, beta_sq))


@dataclass(frozen=True)
class BulkWindow:
    """Cells 1-based inclusive range [n_lo, n_hi] deep enough into the chain
    that edge inhomogeneity has decayed; empty when n_lo > n_hi."""
    n_lo: int
    n_hi: int

    @property
    def empty(self) -> bool:
        return self.n_lo > self.n_hi

    def indices(self) -> np.ndarray:
        return np.arange(self.n_lo - 1, self.n_hi)


def bulk_window(derived: DerivedParams, n_cells: int) -> BulkWindow:
    """Bulk region of the open chain: cells with 10 tau < n and n < N - 10 tau,
    clamped to [1, N]."""
    if derived.tau is None:
        raise TauUndefined(derived.tau_reason or "tau undefined")
    n_lo = max(1, math.ceil(10 * derived.tau))
    n_hi = min(n_cells, math.floor(n_cells - 10 * derived.tau))
    return BulkWindow(n_lo, n_hi)
