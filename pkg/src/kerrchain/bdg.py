"""Open-chain Bogoliubov-de Gennes eigenproblem.

The quadratic Hamiltonian is encoded by two real symmetric 2N x 2N blocks in
the interleaved site ordering (A1, B1, A2, B2, ...): X carries the normal
couplings (Omega on the diagonal, +J hopping), Y the anomalous ones (Lambda
on the diagonal, -J pairing). The dynamical matrix is L = [[X, Y], [-Y, -X]];
physical modes are its positive-eigenvalue eigenvectors (u, u~) normalized to
sum(u^2 - u~^2) = 1.

Because every site obeys Omega + Lambda = 2 lambda_n, the combination X + Y
is diagonal and positive, which reduces the problem to the ordinary symmetric
eigenproblem M = S (X - Y) S with S = (X + Y)^{1/2}: energies are the
positive square roots of eig(M), and with h = S v, f = (X - Y) h / E the mode
vectors u = (f + h) / (2 sqrt(E)), u~ = (f - h) / (2 sqrt(E)) come out
paraunitary-normalized by construction. A general nonsymmetric solve on L is
kept as a fallback for ill-conditioned X + Y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientSupport, RegimeError, ShapeError, UnstableProfile
from .gaussian import QuadraticCoefficients, build_coefficients
from .model import Boundary, ChainConfig, derive_params
from .semiclassical import (BulkWindow, bulk_window, solve_newton,
                            solve_obc_analytic, solve_pbc)

IN_GAP_TOL = 1e-9              # band-edge comparison, units of omega_H
DEGENERACY_TOL = 1e-10         # cluster grouping, units of omega_H
FIT_R2_GATE = 0.99
FIT_MIN_POINTS = 5
FIT_FLOOR_REL = 1e-10          # fit points must exceed this fraction of max|u|
FALLBACK_COND = 1e12


@dataclass(frozen=True)
class BdgMatrix:
    x_block: np.ndarray
    y_block: np.ndarray
    boundary: Boundary

    @property
    def n_sites(self) -> int:
        return self.x_block.shape[0]

    def full(self) -> np.ndarray:
        """The 4N x 4N dynamical matrix [[X, Y], [-Y, -X]]."""
        x, y = self.x_block, self.y_block
        return np.block([[x, y], [-y, -x]])


@dataclass(frozen=True)
class BdgSolution:
    energies: np.ndarray           # 2N positive branch, ascending
    u: np.ndarray                  # (2N, 2N), column per mode
    u_tilde: np.ndarray
    norm_defects: np.ndarray       # |sum(u^2 - u~^2) - 1|
    pairing_defects: np.ndarray    # |E_nu + E_{-nu}| from the full spectrum
    boundary: Boundary

    @property
    def n_cells(self) -> int:
        return self.u.shape[0] // 2

    def u_a(self, mode: int) -> np.ndarray:
        """A-sublattice components of mode ``mode`` over cells 1..N."""
        return self.u[0::2, mode]

    def u_b(self, mode: int) -> np.ndarray:
        return self.u[1::2, mode]


@dataclass(frozen=True)
class LocalizationFit:
    """Least-squares exponential fit of a mode envelope over a site window."""
    xi: float | None
    slope: float
    r_squared: float
    n_points: int
    exponential: bool              # r_squared >= gate and enough points


@dataclass(frozen=True)
class ModeRecord:
    index: int
    energy: float
    in_gap: bool
    chi: float
    xi_formula: float | None       # None outside the gap, inf at a band edge
    xi_fit: float | None
    fit: LocalizationFit | None
    weight_edge: float


def assemble(coeffs: QuadraticCoefficients) -> BdgMatrix:
    """Build the X/Y blocks from site-resolved coefficients."""
    n = coeffs.n_cells
    expected_j2 = n if coeffs.boundary is Boundary.PBC else n - 1
    lengths = {len(coeffs.omega_a), len(coeffs.lambda_a),
               len(coeffs.omega_b), len(coeffs.lambda_b), len(coeffs.j1)}
    if lengths != {n} or len(coeffs.j2) != expected_j2:
        raise ShapeError(f"inconsistent coefficient lengths for "
                         f"{coeffs.boundary.value} with N = {n}")

    size = 2 * n
    x = np.zeros((size, size))
    y = np.zeros((size, size))
    ia = np.arange(0, size, 2)
    ib = ia + 1
    x[ia, ia] = coeffs.omega_a
    x[ib, ib] = coeffs.omega_b
    y[ia, ia] = coeffs.lambda_a
    y[ib, ib] = coeffs.lambda_b
    # intra-cell bond A_n - B_n
    x[ia, ib] = x[ib, ia] = coeffs.j1
    y[ia, ib] = y[ib, ia] = -coeffs.j1
    # inter-cell bond B_n - A_{n+1}
    for i in range(len(coeffs.j2)):
        a_next = ia[(i + 1) % n]
        x[ib[i], a_next] = x[a_next, ib[i]] = coeffs.j2[i]
        y[ib[i], a_next] = y[a_next, ib[i]] = -coeffs.j2[i]
    return BdgMatrix(x, y, coeffs.boundary)


def _pairing_defects(matrix: BdgMatrix, scale: float) -> np.ndarray:
    evs = np.linalg.eigvals(matrix.full())
    if np.abs(evs.imag).max() > 1e-8 * max(scale, 1e-300):
        raise UnstableProfile("complex dynamical-matrix eigenvalues",
                              eigenvalues=evs[np.abs(evs.imag) > 1e-8 * scale])
    re = np.sort(evs.real)
    n = len(re) // 2
    pos = re[n:]
    neg = re[:n][::-1]
    return np.abs(pos + neg)


def diagonalize(matrix: BdgMatrix, check_pairing: bool = True) -> BdgSolution:
    """All positive-branch eigenpairs of the dynamical matrix.

    Raises :class:`UnstableProfile` (with the offending eigenvalues attached)
    if the quadratic form is not positive definite, rather than silently
    dropping unstable directions.
    """
    x, y = matrix.x_block, matrix.y_block
    k = x + y
    k_diag = np.diag(k)
    off = np.abs(k - np.diag(k_diag)).max()
    scale = np.abs(k_diag).max()

    if off <= 1e-12 * scale and k_diag.min() > 0 \
            and k_diag.max() / k_diag.min() < FALLBACK_COND:
        s = np.sqrt(k_diag)
        s_mat = None
    else:
        kw, kv = np.linalg.eigh(0.5 * (k + k.T))
        if kw.min() <= 0 or kw.max() / kw.min() > FALLBACK_COND:
            return _diagonalize_general(matrix)
        s_mat = (kv * np.sqrt(kw)) @ kv.T
        s = None

    d = x - y
    if s_mat is None:
        m = d * np.outer(s, s)
    else:
        m = s_mat @ d @ s_mat
    m = 0.5 * (m + m.T)
    w, v = np.linalg.eigh(m)

    tol = 1e-10 * max(abs(w).max(), 1.0)
    if w.min() < -tol:
        raise UnstableProfile(
            f"quadratic form not positive definite (min E^2 = {w.min():.3e})",
            eigenvalues=w[w < -tol])
    w = np.clip(w, 0.0, None)
    energies = np.sqrt(w)

    size = x.shape[0]
    u = np.zeros((size, size))
    ut = np.zeros((size, size))
    e_floor = 1e-14 * max(energies.max(), 1.0)
    for i, e in enumerate(energies):
        if e <= e_floor:
            continue                      # zero mode: not paraunitary-normalizable
        h = (s * v[:, i]) if s_mat is None else (s_mat @ v[:, i])
        f = d @ h / e
        col = (f + h) / (2 * math.sqrt(e))
        colt = (f - h) / (2 * math.sqrt(e))
        # phase convention: largest |u| component positive
        j = np.argmax(np.abs(col))
        if col[j] < 0:
            col, colt = -col, -colt
        u[:, i] = col
        ut[:, i] = colt

    norm_defects = np.abs((u**2 - ut**2).sum(axis=0) - 1.0)
    norm_defects[energies <= e_floor] = np.inf
    pairing = (_pairing_defects(matrix, energies.max())
               if check_pairing else np.zeros_like(energies))
    return BdgSolution(energies, u, ut, norm_defects, pairing, matrix.boundary)


def _diagonalize_general(matrix: BdgMatrix) -> BdgSolution:
    """Nonsymmetric fallback on the full dynamical matrix."""
    full = matrix.full()
    evs, vecs = np.linalg.eig(full)
    scale = np.abs(evs.real).max()
    if np.abs(evs.imag).max() > 1e-8 * max(scale, 1e-300):
        raise UnstableProfile("complex dynamical-matrix eigenvalues",
                              eigenvalues=evs[np.abs(evs.imag) > 1e-8 * scale])
    size = matrix.n_sites
    order = np.argsort(evs.real)[size:]           # positive branch
    energies = evs.real[order]
    u = np.zeros((size, len(order)))
    ut = np.zeros((size, len(order)))
    norm_defects = np.full(len(order), np.inf)
    for col, idx in enumerate(order):
        vec = vecs[:, idx].real
        uu, tt = vec[:size], vec[size:]
        norm = (uu**2 - tt**2).sum()
        if norm <= 0:
            continue
        uu, tt = uu / math.sqrt(norm), tt / math.sqrt(norm)
        j = np.argmax(np.abs(uu))
        if uu[j] < 0:
            uu, tt = -uu, -tt
        u[:, col], ut[:, col] = uu, tt
        norm_defects[col] = abs((uu**2 - tt**2).sum() - 1.0)
    pairing = _pairing_defects(matrix, max(scale, 1e-300))
    srt = np.argsort(energies)
    return BdgSolution(energies[srt], u[:, srt], ut[:, srt],
                       norm_defects[srt], pairing, matrix.boundary)


def chi_of_energy(energy: float, mu: float, omega_h: float) -> float:
    """chi = 1/mu - (1/mu + 1) E^2 / omega_H^2; chi in (-|delta|, |delta|)
    exactly when E lies inside the gap."""
    if mu == 0:
        return math.inf
    return 1 / mu - (1 / mu + 1) * energy**2 / omega_h**2


def xi_from_energy(energy: float, mu: float, delta: float,
                   omega_h: float) -> float | None:
    """Localization length from cosh^2(1/(2 xi)) = (1 - chi^2)/(1 - delta^2).

    None when the right side is below 1 (extended, xi imaginary); math.inf
    exactly at a band edge where the right side equals 1.
    """
    if abs(delta) >= 1 or mu == 0:
        return 0.0 if abs(delta) >= 1 else None
    chi = chi_of_energy(energy, mu, omega_h)
    ratio = (1 - chi**2) / (1 - delta**2)
    if ratio < 1 - 1e-14:
        return None
    if ratio <= 1 + 1e-14:
        return math.inf
    return 1 / (2 * math.acosh(math.sqrt(ratio)))


def fit_localization(values: np.ndarray, window: BulkWindow,
                     *, r2_gate: float = FIT_R2_GATE,
                     min_points: int = FIT_MIN_POINTS,
                     floor_rel: float = FIT_FLOOR_REL) -> LocalizationFit:
    """Exponential fit of log|values| against the cell index over a window.

    The sign staggering of boundary modes is removed by fitting magnitudes.
    The decaying flank is selected by weight (profiles growing toward the
    right edge are mirrored first), and only the leading contiguous run of
    points above ``floor_rel`` of the global maximum enters the fit: below
    that the eigenvector components are numerical noise.
    """
    vals = np.abs(np.asarray(values, dtype=float))
    total = float((vals**2).sum())
    if total <= 0:
        raise InsufficientSupport("mode has zero weight")
    idx = window.indices()
    idx = idx[(idx >= 0) & (idx < len(vals))]
    if len(idx) == 0 or float((vals[idx]**2).sum()) < 1e-12 * total:
        raise InsufficientSupport("mode weight on the window below 1e-12")

    seg = vals[idx]
    half = len(seg) // 2
    if (seg[:half]**2).sum() < (seg[half:]**2).sum():
        seg = seg[::-1]
    keep = seg > floor_rel * vals.max()
    gaps = np.flatnonzero(~keep)
    if len(gaps):
        keep[gaps[0]:] = False
    n = np.arange(1, len(seg) + 1, dtype=float)[keep]
    seg = seg[keep]
    if len(seg) < min_points:
        return LocalizationFit(None, 0.0, 0.0, len(seg), False)

    logv = np.log(seg)
    slope, intercept = np.polyfit(n, logv, 1)
    pred = slope * n + intercept
    ss_tot = float(((logv - logv.mean())**2).sum())
    r2 = 1.0 - float(((logv - pred)**2).sum()) / ss_tot if ss_tot > 0 else 0.0
    xi = 1.0 / abs(slope) if abs(slope) > 1e-12 else None
    good = r2 >= r2_gate and xi is not None
    return LocalizationFit(xi, float(slope), float(r2),
                           int(len(seg)), bool(good))


def _fit_window(cfg: ChainConfig) -> BulkWindow:
    d = derive_params(cfg)
    if d.tau is not None:
        w = bulk_window(d, cfg.n_cells)
        if not w.empty:
            return w
    return BulkWindow(2, cfg.n_cells - 1)


def _best_fit(u: np.ndarray, ut: np.ndarray, window: BulkWindow) -> LocalizationFit | None:
    """Best of the A-sublattice profile and the mirrored B-sublattice one."""
    best = None
    for arr in (u[0::2], u[1::2][::-1]):
        try:
            fit = fit_localization(arr, window)
        except InsufficientSupport:
            continue
        if best is None or fit.r_squared > best.r_squared:
            best = fit
    return best


def classify_modes(sol: BdgSolution, cfg: ChainConfig,
                   window: BulkWindow | None = None,
                   fit: bool = True) -> list[ModeRecord]:
    """Per-mode gap classification, localization lengths, and edge weights.

    Quasi-degenerate in-gap doublets (symmetric/antisymmetric combinations of
    the two boundary modes) are rotated to left/right combinations before
    fitting; the rotation preserves the paraunitary normalization exactly and
    only affects the basis-dependent fit, not energies or gap flags.
    """
    d = derive_params(cfg)
    if not (cfg.lam > cfg.omega and d.mu < 1):
        raise RegimeError("mode classification needs the homogeneous "
                          "broken-symmetry phase (band edges undefined)")
    em_pi, ep_pi = dispersion_at_pi(cfg)
    tol = IN_GAP_TOL * d.omega_h
    delta = d.delta if d.delta is not None else 0.0
    if window is None:
        window = _fit_window(cfg)

    n = sol.n_cells
    n_edge = max(1, math.ceil(0.1 * n))
    cell_idx = np.arange(n)
    edge_cells = (cell_idx < n_edge) | (cell_idx >= n - n_edge)
    edge_sites = np.repeat(edge_cells, 2)

    energies = sol.energies
    in_gap = (energies > em_pi + tol) & (energies < ep_pi - tol)

    # pair up in-gap doublets for fitting
    fit_vectors: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    gap_idx = np.flatnonzero(in_gap)
    used = set()
    for a, b in zip(gap_idx, gap_idx[1:]):
        if a in used or b in used:
            continue
        if abs(energies[a] - energies[b]) < 1e-3 * d.omega_h:
            inv = 1 / math.sqrt(2)
            for sgn, i in ((1.0, a), (-1.0, b)):
                fit_vectors[i] = (inv * (sol.u[:, a] + sgn * sol.u[:, b]),
                                  inv * (sol.u_tilde[:, a] + sgn * sol.u_tilde[:, b]))
            used.update((a, b))

    records = []
    for i, e in enumerate(energies):
        chi = chi_of_energy(e, d.mu, d.omega_h)
        xi_f = xi_from_energy(e, d.mu, delta, d.omega_h)
        mode_fit = None
        if fit:
            u_vec, ut_vec = fit_vectors.get(i, (sol.u[:, i], sol.u_tilde[:, i]))
            mode_fit = _best_fit(u_vec, ut_vec, window)
        density = sol.u[:, i]**2 + sol.u_tilde[:, i]**2
        total = density.sum()
        weight_edge = float(density[edge_sites].sum() / total) if total > 0 else 0.0
        records.append(ModeRecord(
            index=i, energy=float(e), in_gap=bool(in_gap[i]), chi=float(chi),
            xi_formula=xi_f,
            xi_fit=(mode_fit.xi if mode_fit is not None and mode_fit.exponential else None),
            fit=mode_fit, weight_edge=weight_edge))
    return records


def dispersion_at_pi(cfg: ChainConfig) -> tuple[float, float]:
    """Gap edges (E_pi^-, E_pi^+) without the full-regime gate of
    :func:`bands.dispersion` (flat-band endpoints |delta| = 1 included)."""
    d = derive_params(cfg)
    delta = d.delta if d.delta is not None else 0.0
    s = abs(delta)
    em = d.omega_h * math.sqrt((1 - d.mu * s) / (1 + d.mu))
    ep = d.omega_h * math.sqrt((1 + d.mu * s) / (1 + d.mu))
    return em, ep


@dataclass(frozen=True)
class DeltaScanPoint:
    delta: float
    energies: np.ndarray | None
    records: list[ModeRecord] | None
    edges: tuple[float, float, float, float] | None   # E_pi^-, E_pi^+, E_0^-, E_0^+
    error: str | None = None


def solve_profile(cfg: ChainConfig):
    """Equilibrium profile via the closed forms where valid, Newton otherwise."""
    d = derive_params(cfg)
    if cfg.boundary is Boundary.PBC and cfg.lam > cfg.omega and d.mu < 1:
        return solve_pbc(cfg)
    if cfg.boundary is Boundary.OBC and cfg.delta_lambda == 0.0 \
            and d.tau is not None:
        try:
            return solve_obc_analytic(cfg)
        except RegimeError:
            pass                       # short chain: closed form inaccurate
    return solve_newton(cfg)


def solution_for(cfg: ChainConfig, check_pairing: bool = True) -> BdgSolution:
    """Profile -> coefficients -> assembly -> diagonalization, in one call."""
    profile = solve_profile(cfg)
    return diagonalize(assemble(build_coefficients(profile, cfg)),
                       check_pairing=check_pairing)


def spectrum_vs_delta(cfg: ChainConfig, delta_grid,
                      fit: bool = True, check_pairing: bool = False,
                      mapper=map) -> list[DeltaScanPoint]:
    """Full open-chain spectrum and mode records along a delta grid.

    Per-point failures are recorded on the scan point and the scan continues.
    ``mapper`` may be an executor map for concurrent evaluation; the points
    share no mutable state.
    """
    def one(delta: float) -> DeltaScanPoint:
        try:
            point_cfg = cfg.at_delta(float(delta))
            sol = solution_for(point_cfg, check_pairing=check_pairing)
            records = classify_modes(sol, point_cfg, fit=fit)
            d = derive_params(point_cfg)
            em_pi, ep_pi = dispersion_at_pi(point_cfg)
            dd = d.delta if d.delta is not None else 0.0
            em_0 = d.omega_h * math.sqrt((1 - d.mu) / (1 + d.mu))
            ep_0 = d.omega_h
            return DeltaScanPoint(float(delta), sol.energies, records,
                                  (em_pi, ep_pi, em_0, ep_0))
        except Exception as exc:  # per-point isolation, scan continues
            return DeltaScanPoint(float(delta), None, None, None,
                                  error=f"{type(exc).__name__}: {exc}")

    return list(mapper(one, list(delta_grid)))
