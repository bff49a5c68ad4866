"""Closed-chain momentum-space diagonalization and the winding invariant.

For periodic boundaries the quadratic Hamiltonian is translation invariant and
splits into 4x4 blocks per momentum k. The two excitation bands are

    E_k^+- = omega_H sqrt[ (1 +- mu s_k) / (1 + mu) ],
    s_k = sqrt( (1+delta^2)/2 + (1-delta^2)/2 cos k ),

and the complex inter-sublattice coupling

    J_k = mu (lambda-omega)/(1+mu) * [ (1-delta)/2 + (1+delta)/2 e^{-ik} ]

winds around the origin once for delta > 0 and not at all for delta < 0.
The winding is counted through theta_k, defined by J_k = |J_k| e^{-i theta_k},
accumulated over a dense closed contour; the per-band topological phase is
eta * winding for band eta in {+, -}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import GapClosed, RegimeError, StabilityViolation
from .model import ChainConfig, Regime, classify_regime, derive_params

ZAK_CONTOUR_POINTS = 4096
ZAK_MAX_POINTS = 1 << 22


class BandGrid(str, Enum):
    EXACT_FBZ = "ExactFBZ"
    DENSE = "Dense"


@dataclass(frozen=True)
class BandStructure:
    k_values: np.ndarray
    e_minus: np.ndarray
    e_plus: np.ndarray
    j_k: np.ndarray                 # complex
    nu_minus: np.ndarray
    nu_plus: np.ndarray
    grid: BandGrid
    distinct_level_count: int       # one-particle levels after k <-> -k folding


@dataclass(frozen=True)
class ZakResult:
    band: str                        # "+" or "-"
    winding: int                     # eta * Ind_{J_k}(0)
    phase_accumulated: float         # eta * total theta increment
    delta: float


def _require_homogeneous(cfg: ChainConfig):
    regime = classify_regime(cfg)
    if regime is not Regime.HOMOGENEOUS_SSB:
        raise RegimeError(f"band structure defined in the homogeneous "
                          f"broken-symmetry phase only (got {regime.value})")
    return derive_params(cfg)


def j_k(cfg: ChainConfig, k) -> np.ndarray | complex:
    """Complex inter-sublattice coupling at momentum k."""
    d = derive_params(cfg)
    delta = d.delta if d.delta is not None else 0.0
    amp = d.mu * (cfg.lam - cfg.omega) / (1 + d.mu)
    return amp * ((1 - delta) / 2 + (1 + delta) / 2 * np.exp(-1j * np.asarray(k)))


def dispersion(cfg: ChainConfig, k):
    """Band energies (e_minus, e_plus) at momentum k (scalar or array)."""
    d = _require_homogeneous(cfg)
    delta = d.delta if d.delta is not None else 0.0
    s = np.sqrt((1 + delta**2) / 2 + (1 - delta**2) / 2 * np.cos(np.asarray(k, dtype=float)))
    e_minus = d.omega_h * np.sqrt((1 - d.mu * s) / (1 + d.mu))
    e_plus = d.omega_h * np.sqrt((1 + d.mu * s) / (1 + d.mu))
    return e_minus, e_plus


def band_edges(cfg: ChainConfig) -> tuple[float, float, float, float]:
    """(E_pi^-, E_pi^+, E_0^-, E_0^+): gap edges sit at k = pi, band extremes
    at k = 0."""
    em_pi, ep_pi = dispersion(cfg, math.pi)
    em_0, ep_0 = dispersion(cfg, 0.0)
    return float(em_pi), float(ep_pi), float(em_0), float(ep_0)


def fbz_momenta(n_cells: int) -> np.ndarray:
    """Exact first-Brillouin-zone set k = 2 pi s / N with the parity-dependent
    s range: s in [-N/2+1, N/2] for even N, [-(N-1)/2, (N-1)/2] for odd N."""
    if n_cells % 2 == 0:
        s = np.arange(-n_cells // 2 + 1, n_cells // 2 + 1)
    else:
        s = np.arange(-(n_cells - 1) // 2, (n_cells - 1) // 2 + 1)
    return 2 * np.pi * s / n_cells


def distinct_level_count(n_cells: int) -> int:
    """One-particle levels after folding k <-> -k degeneracy: N+2 for even N
    (both k = 0 and k = pi unpaired), N+1 for odd N."""
    return n_cells + 2 if n_cells % 2 == 0 else n_cells + 1


def bogoliubov_angle(cfg: ChainConfig, k: float, band: str) -> float:
    """Squeezing angle nu of band eta at momentum k:
    tanh(2 nu) = (Lambda - eta |J_k|) / (Omega + eta |J_k|)."""
    d = _require_homogeneous(cfg)
    eta = {"+": 1.0, "-": -1.0}[band]
    w = (cfg.lam - cfg.omega) / (1 + d.mu)
    omega_big, lambda_big = cfg.lam + w, cfg.lam - w
    jk = abs(complex(j_k(cfg, k)))
    ratio = (lambda_big - eta * jk) / (omega_big + eta * jk)
    if abs(ratio) >= 1:
        raise StabilityViolation(f"tanh argument {ratio} outside (-1, 1)")
    return 0.5 * math.atanh(ratio)


def band_structure(cfg: ChainConfig, grid: BandGrid = BandGrid.EXACT_FBZ,
                   n_points: int = 1024) -> BandStructure:
    """Dispersion, couplings, and squeezing angles over a momentum grid."""
    _require_homogeneous(cfg)
    if grid is BandGrid.EXACT_FBZ:
        ks = fbz_momenta(cfg.n_cells)
    else:
        ks = np.linspace(-np.pi, np.pi, n_points + 1)[1:]   # (-pi, pi], pi on grid
    e_minus, e_plus = dispersion(cfg, ks)
    jk = np.asarray(j_k(cfg, ks))
    nu_minus = np.array([bogoliubov_angle(cfg, k, "-") for k in ks])
    nu_plus = np.array([bogoliubov_angle(cfg, k, "+") for k in ks])
    return BandStructure(ks, e_minus, e_plus, jk, nu_minus, nu_plus, grid,
                         distinct_level_count(cfg.n_cells))


def single_k_matrix(cfg: ChainConfig, k: float) -> np.ndarray:
    """4x4 one-momentum dynamical matrix in the basis
    (d_Ak, d_Bk, d_A-k^dag, d_B-k^dag); its positive eigenvalues are E_k^-+.

    Independent numeric route used to validate the closed-form dispersion.
    """
    d = derive_params(cfg)
    w = (cfg.lam - cfg.omega) / (1 + d.mu)
    omega_big, lambda_big = cfg.lam + w, cfg.lam - w
    jk = complex(j_k(cfg, k))
    x = np.array([[omega_big, jk], [np.conj(jk), omega_big]])
    y = np.array([[lambda_big, -jk], [-np.conj(jk), lambda_big]])
    # pairing (k, -k) and J_{-k} = J_k^* make the hole blocks -Y, -X (no
    # extra conjugation; X, Y are Hermitian)
    return np.block([[x, y], [-y, -x]])


def zak_phase(cfg: ChainConfig, band: str,
              n_points: int = ZAK_CONTOUR_POINTS) -> ZakResult:
    """Winding invariant of band eta from the closed J_k contour.

    The accumulated increments of theta_k (J_k = |J_k| e^{-i theta_k}) over
    k in (-pi, pi] are summed on a dense grid, doubling the resolution while
    any single step of arg J exceeds pi/2 (guards near-origin passes at small
    |delta|).
    """
    d = _require_homogeneous(cfg)
    eta = {"+": 1.0, "-": -1.0}[band]
    if d.delta is None or d.delta == 0.0:
        raise GapClosed("delta = 0: J_k crosses the origin at k = pi")

    m = n_points
    while True:
        ks = np.linspace(-np.pi, np.pi, m + 1)
        jk = np.asarray(j_k(cfg, ks))
        if np.abs(jk).min() < 1e-12 * np.abs(jk).max():
            raise GapClosed("J_k numerically vanishes on the contour")
        steps = np.angle(jk[1:] / jk[:-1])
        if np.abs(steps).max() <= np.pi / 2 or m >= ZAK_MAX_POINTS:
            break
        m *= 2
    theta_total = -float(steps.sum())      # theta_k = -arg J_k
    winding = round(theta_total / (2 * np.pi))
    return ZakResult(band=band, winding=int(eta * winding),
                     phase_accumulated=eta * theta_total, delta=d.delta)
