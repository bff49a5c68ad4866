"""Coefficients of the quadratic (Gaussian-fluctuation) Hamiltonian.

Displacing the chain Hamiltonian around an equilibrium profile and dropping
cubic/quartic fluctuation terms leaves, per site, a squeezing pair
(Omega_In, Lambda_In) and, per bond, beam-splitter-plus-pairing couplings
J_1n (intra-cell) and J_2n (inter-cell):

    Omega_In = lambda_n + 2 eps_L |amp_In|^2
    Lambda_In = lambda_n - 2 eps_L |amp_In|^2
    J_1n = eps_1 |alpha_n beta_n|,   J_2n = eps_2 |alpha_{n+1} beta_n|

with lambda_n = lambda - delta_lambda on the two outermost sites. The
identity Omega_In + Lambda_In = 2 lambda_n holds exactly by construction.
J phases are gauged away (all J >= 0); downstream modules assume this.

The constant energy offset of the quadratic Hamiltonian is not computed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BoundaryMismatch, InvalidProfile
from .model import Boundary, ChainConfig, derive_params
from .semiclassical import SemiclassicalProfile

#: residual gate on incoming profiles, units of g^2
PROFILE_RESIDUAL_GATE = 1e-8


@dataclass(frozen=True)
class QuadraticCoefficients:
    omega_a: np.ndarray
    lambda_a: np.ndarray
    omega_b: np.ndarray
    lambda_b: np.ndarray
    j1: np.ndarray       # length N
    j2: np.ndarray       # length N (PBC, wraps) or N-1 (OBC)
    boundary: Boundary

    @property
    def n_cells(self) -> int:
        return len(self.omega_a)

    def site_drive_a(self) -> np.ndarray:
        """Per-site drive lambda_n on the A sublattice, from Omega + Lambda."""
        return (self.omega_a + self.lambda_a) / 2

    def site_drive_b(self) -> np.ndarray:
        return (self.omega_b + self.lambda_b) / 2


def build_coefficients(profile: SemiclassicalProfile,
                       cfg: ChainConfig) -> QuadraticCoefficients:
    """Assemble site-resolved quadratic coefficients from a profile."""
    if profile.boundary is not cfg.boundary:
        raise BoundaryMismatch(f"profile is {profile.boundary.value}, "
                               f"config is {cfg.boundary.value}")
    if profile.residual > PROFILE_RESIDUAL_GATE:
        raise InvalidProfile(f"profile residual {profile.residual:.3e} exceeds "
                             f"{PROFILE_RESIDUAL_GATE:.0e}; not an equilibrium")
    if profile.n_cells != cfg.n_cells:
        raise BoundaryMismatch(f"profile has {profile.n_cells} cells, "
                               f"config has {cfg.n_cells}")

    N = cfg.n_cells
    a = np.sqrt(profile.alpha_sq)
    b = np.sqrt(profile.beta_sq)
    lam_a = np.full(N, cfg.lam)
    lam_b = np.full(N, cfg.lam)
    if cfg.boundary is Boundary.OBC and cfg.delta_lambda > 0:
        lam_a[0] -= cfg.delta_lambda
        lam_b[-1] -= cfg.delta_lambda

    omega_a = lam_a + 2 * cfg.eps_L * profile.alpha_sq
    lambda_a = lam_a - 2 * cfg.eps_L * profile.alpha_sq
    omega_b = lam_b + 2 * cfg.eps_L * profile.beta_sq
    lambda_b = lam_b - 2 * cfg.eps_L * profile.beta_sq
    j1 = cfg.eps_1 * a * b
    if cfg.boundary is Boundary.PBC:
        j2 = cfg.eps_2 * np.roll(a, -1) * b
    else:
        j2 = cfg.eps_2 * a[1:] * b[:-1]
    return QuadraticCoefficients(omega_a, lambda_a, omega_b, lambda_b,
                                 j1, j2, cfg.boundary)


def pbc_constants(cfg: ChainConfig) -> tuple[float, float, float, float]:
    """Closed-chain constants (Omega, Lambda, J1, J2) in closed form:
    Omega/Lambda = lambda +- (lambda-omega)/(1+mu), J_i = eps_i gbar^2."""
    d = derive_params(cfg)
    w = (cfg.lam - cfg.omega) / (1 + d.mu)
    return (cfg.lam + w, cfg.lam - w,
            cfg.eps_1 * d.gbar_sq, cfg.eps_2 * d.gbar_sq)
