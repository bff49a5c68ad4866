"""Chain parameters, derived quantities, and regime classification.

The chain consists of N cells, each holding two resonators (A, B), with a
two-photon drive of amplitude lambda on every site, a homogeneous local Kerr
term eps_L, and staggered cross-Kerr couplings: eps_1 inside a cell (A_n B_n)
and eps_2 between cells (B_n A_{n+1}).

Conventions:
  * one energy unit for all couplings, omega = 1 by default;
  * the strong-drive limit is represented by omega = 0 with lambda = 1
    (never by letting lambda/omega blow up);
  * undefined derived quantities (delta when eps_1 = eps_2 = 0, the
    correlation length tau outside 0 < mu < 1, |delta| < 1) are represented
    by None plus a machine-readable reason, never by NaN.

Everything here is a pure function of an immutable config and is safe to call
concurrently.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from enum import Enum

from .errors import InvalidConfig

#: |mu - 1| tolerance for classifying the critical-ring regime.
MU_CRITICAL_TOL = 1e-12


class Boundary(str, Enum):
    PBC = "PBC"
    OBC = "OBC"


class Regime(str, Enum):
    BELOW_THRESHOLD = "BelowThreshold"
    HOMOGENEOUS_SSB = "HomogeneousSSB"
    CRITICAL_RING = "CriticalRing"
    INHOMOGENEOUS_SSB = "InhomogeneousSSB"


@dataclass(frozen=True)
class ChainConfig:
    """Raw physical parameters and boundary specification of the chain.

    ``lam`` is the parametric drive amplitude (the JSON field is named
    "lambda"; the attribute avoids the Python keyword). ``delta_lambda`` is
    the drive reduction applied to the two outermost sites (A_1 and B_N) and
    is meaningful only for open boundaries.
    """

    omega: float
    lam: float
    eps_L: float
    eps_1: float
    eps_2: float
    n_cells: int
    boundary: Boundary = Boundary.OBC
    delta_lambda: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        self.validate()

    def validate(self) -> None:
        if self.eps_L <= 0:
            raise InvalidConfig(f"eps_L must be > 0, got {self.eps_L}")
        if self.n_cells < 2:
            raise InvalidConfig(f"n_cells must be >= 2, got {self.n_cells}")
        if self.omega < 0:
            raise InvalidConfig(f"omega must be >= 0, got {self.omega}")
        if self.lam < 0:
            raise InvalidConfig(f"lambda must be >= 0, got {self.lam}")
        if self.eps_1 < 0 or self.eps_2 < 0:
            raise InvalidConfig("cross-Kerr couplings must be >= 0")
        if self.delta_lambda < 0:
            raise InvalidConfig("delta_lambda must be >= 0")
        if self.delta_lambda and self.delta_lambda >= self.lam:
            raise InvalidConfig("delta_lambda must be < lambda")
        if self.delta_lambda and self.boundary is Boundary.PBC:
            raise InvalidConfig("delta_lambda is only meaningful for OBC")

    # -- constructors ---------------------------------------------------------

    @classmethod
    def from_ratios(cls, mu: float, delta: float, *, omega: float = 1.0,
                    lam: float = 2.0, eps_L: float = 0.02, n_cells: int = 25,
                    boundary: Boundary | str = Boundary.OBC,
                    delta_lambda: float = 0.0) -> "ChainConfig":
        """Build a config from the adimensional couplings (mu, delta)."""
        if not -1.0 <= delta <= 1.0:
            raise InvalidConfig(f"delta must lie in [-1, 1], got {delta}")
        if mu < 0:
            raise InvalidConfig(f"mu must be >= 0, got {mu}")
        return cls(omega=omega, lam=lam, eps_L=eps_L,
                   eps_1=mu * eps_L * (1.0 - delta),
                   eps_2=mu * eps_L * (1.0 + delta),
                   n_cells=n_cells, boundary=boundary,
                   delta_lambda=delta_lambda)

    @classmethod
    def from_dict(cls, data: dict) -> "ChainConfig":
        try:
            return cls(omega=float(data["omega"]), lam=float(data["lambda"]),
                       eps_L=float(data["eps_L"]), eps_1=float(data["eps_1"]),
                       eps_2=float(data["eps_2"]), n_cells=int(data["n_cells"]),
                       boundary=Boundary(data.get("boundary", "OBC")),
                       delta_lambda=float(data.get("delta_lambda", 0.0)))
        except KeyError as exc:
            raise InvalidConfig(f"missing config field {exc}") from exc
        except ValueError as exc:
            raise InvalidConfig(str(exc)) from exc

    @classmethod
    def from_json(cls, path) -> "ChainConfig":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InvalidConfig(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    # -- serialization --------------------------------------------------------

    def to_dict(self) -> dict:
        return {"omega": self.omega, "lambda": self.lam, "eps_L": self.eps_L,
                "eps_1": self.eps_1, "eps_2": self.eps_2,
                "n_cells": self.n_cells, "boundary": self.boundary.value,
                "delta_lambda": self.delta_lambda}

    def at_delta(self, delta: float) -> "ChainConfig":
        """Same config with the cross-Kerr imbalance replaced (mu preserved)."""
        mu = (self.eps_1 + self.eps_2) / (2 * self.eps_L)
        return replace(self, eps_1=mu * self.eps_L * (1.0 - delta),
                       eps_2=mu * self.eps_L * (1.0 + delta))


@dataclass(frozen=True)
class DerivedParams:
    """Adimensional parameters derived from a :class:`ChainConfig`.

    ``delta`` and ``tau`` may be None (undefined), in which case the matching
    ``*_reason`` field says why.
    """

    g_sq: float
    mu: float
    delta: float | None
    gbar_sq: float
    tau: float | None
    omega_h: float
    delta_reason: str | None = None
    tau_reason: str | None = None

    def to_dict(self) -> dict:
        return {"g_sq": self.g_sq, "mu": self.mu, "delta": self.delta,
                "gbar_sq": self.gbar_sq, "tau": self.tau,
                "omega_h": self.omega_h, "delta_reason": self.delta_reason,
                "tau_reason": self.tau_reason}


def derive_params(cfg: ChainConfig) -> DerivedParams:
    """Compute (g^2, mu, delta, gbar^2, tau, omega_H) for a configuration.

    g^2 = (lambda - omega) / (2 eps_L) measures the distance from threshold,
    mu = (eps_2 + eps_1) / (2 eps_L) the overall cross-Kerr weight, and
    delta = (eps_2 - eps_1) / (eps_2 + eps_1) the staggering imbalance.
    gbar^2 = g^2 / (1 + mu) is the homogeneous equilibrium occupation and
    omega_H = 2 sqrt(lambda (lambda - omega)) the drive-set excitation scale.

    The correlation length tau solves
    sinh^2(1 / (2 tau)) = (1/mu^2 - 1) / (1 - delta^2) and is defined only
    for 0 < mu < 1 and |delta| < 1.
    """
    cfg.validate()
    g_sq = (cfg.lam - cfg.omega) / (2 * cfg.eps_L)
    mu = (cfg.eps_1 + cfg.eps_2) / (2 * cfg.eps_L)

    delta = None
    delta_reason = None
    if cfg.eps_1 + cfg.eps_2 > 0:
        delta = (cfg.eps_2 - cfg.eps_1) / (cfg.eps_2 + cfg.eps_1)
    else:
        delta_reason = "eps_1 + eps_2 = 0: staggering imbalance undefined"

    gbar_sq = g_sq / (1 + mu)
    omega_h = 2 * math.sqrt(cfg.lam * (cfg.lam - cfg.omega)) if cfg.lam > cfg.omega else 0.0

    tau = None
    tau_reason = None
    if delta is None:
        tau_reason = "delta undefined"
    elif not 0 < mu < 1:
        tau_reason = f"mu = {mu} outside (0, 1)"
    elif abs(delta) >= 1:
        tau_reason = f"|delta| = {abs(delta)} not < 1"
    else:
        # sinh(1/(2 tau)) = sqrt(1 - mu^2) / (mu sqrt(1 - delta^2)); dividing
        # by mu after the square root keeps tiny mu away from overflow
        arg = math.sqrt((1 - mu * mu) / (1 - delta * delta)) / mu
        tau = 0.5 / math.asinh(arg)

    return DerivedParams(g_sq=g_sq, mu=mu, delta=delta, gbar_sq=gbar_sq,
                         tau=tau, omega_h=omega_h, delta_reason=delta_reason,
                         tau_reason=tau_reason)


def classify_regime(cfg: ChainConfig) -> Regime:
    """Place the configuration in the phase diagram.

    Below threshold for lambda <= omega; above threshold the cross-Kerr
    weight decides between the homogeneous broken-symmetry phase (mu < 1),
    the critical ring (mu = 1 within tolerance), and the inhomogeneous
    density-wave phase (mu > 1).
    """
    cfg.validate()
    if cfg.lam <= cfg.omega:
        return Regime.BELOW_THRESHOLD
    mu = (cfg.eps_1 + cfg.eps_2) / (2 * cfg.eps_L)
    if abs(mu - 1.0) <= MU_CRITICAL_TOL:
        return Regime.CRITICAL_RING
    if mu < 1.0:
        return Regime.HOMOGENEOUS_SSB
    return Regime.INHOMOGENEOUS_SSB
