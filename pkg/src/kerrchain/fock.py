"""Exact diagonalization of a single two-resonator cell and its Husimi slice.

One cell = two resonators coupled by the intra-cell cross-Kerr term only
(inter-cell coupling zero, N = 1), in a truncated product Fock basis of D
states per mode. The two-photon drive preserves the boson parity of each
mode separately, so the Hamiltonian splits into four parity blocks that are
diagonalized independently; this both verifies the symmetry structure and
guarantees the returned ground state has definite parity.

The Husimi overlap is evaluated on the purely-imaginary coherent-state slice
alpha = i x, beta = i y (the equilibrium amplitudes are purely imaginary, so
this slice carries all the lobe structure), |Q(x, y)|^2 renormalized to its
maximum. Q omits the textbook 1/pi^2 prefactor, which drops out under the
renormalization. Coherent-state coefficients are computed with log-domain
factorials so large cutoffs never overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage, sparse
from scipy.special import gammaln

from .errors import CutoffTooSmall, NotConverged
from .model import ChainConfig

MIN_CUTOFF = 8
RING_THRESHOLD = 0.9
RING_ANGULAR_BINS = 72
RING_COVERAGE_MIN = 0.95


@dataclass(frozen=True)
class CellHamiltonian:
    cutoff: int
    matrix: sparse.csr_matrix         # D^2 x D^2, real symmetric
    omega: float
    lam: float
    eps_L: float
    eps_1: float

    def parity_labels(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-basis-state parities (n_A mod 2, n_B mod 2)."""
        n = np.arange(self.cutoff)
        p_a = np.repeat(n % 2, self.cutoff)
        p_b = np.tile(n % 2, self.cutoff)
        return p_a, p_b


def build_cell(cfg: ChainConfig, cutoff: int) -> CellHamiltonian:
    """Two-resonator cell Hamiltonian in the product Fock basis.

    Per mode: omega n + (lambda/2)(a^dag a^dag + a a) + eps_L n (n - 1);
    coupling eps_1 n_A n_B. At most 5 nonzeros per row (diagonal plus the
    two-photon ladder on each mode).
    """
    if cutoff < MIN_CUTOFF:
        raise CutoffTooSmall(f"cutoff {cutoff} < {MIN_CUTOFF}")
    matrix = build_cell_matrix(cfg.omega, cfg.lam, cfg.eps_L, cfg.eps_1, cutoff)
    return CellHamiltonian(cutoff, matrix, cfg.omega, cfg.lam, cfg.eps_L,
                           cfg.eps_1)


@dataclass(frozen=True)
class GroundStateResult:
    energy: float
    vector: np.ndarray             # length cutoff^2, unit norm, definite parity
    parity: tuple[int, int]
    gap: float                     # to the next level across all sectors
    low_levels: np.ndarray         # lowest few levels, all sectors merged
    convergence_shift: float | None   # |E0(D) - E0(D+10)| / max(|E0(D+10)|, 1)


def _block_ground(cell: CellHamiltonian, k_low: int = 4):
    p_a, p_b = cell.parity_labels()
    best = None
    lows = []
    for sa in (0, 1):
        for sb in (0, 1):
            idx = np.flatnonzero((p_a == sa) & (p_b == sb))
            w, v = np.linalg.eigh(cell.matrix[idx][:, idx].toarray())
            lows.append(w[:k_low])
            if best is None or w[0] < best[0]:
                best = (w[0], idx, v[:, 0], (sa, sb))
    e0, idx, vb, parity = best
    vector = np.zeros(cell.matrix.shape[0])
    vector[idx] = vb
    return e0, vector, parity, np.sort(np.concatenate(lows))


def ground_state(cell: CellHamiltonian, *, check_convergence: bool = True,
                 convergence_rtol: float | None = None) -> GroundStateResult:
    """Lowest eigenpair of the cell, certified against the Fock truncation.

    The convergence diagnostic re-solves at cutoff + 10 and reports the
    relative ground-energy shift. When ``convergence_rtol`` is given and the
    shift exceeds it, :class:`NotConverged` is raised; by default the shift
    is only reported (deep in the broken-symmetry phase the cutoff needed for
    a given tolerance grows with g^2, and callers pick their own gate).
    """
    e0, vector, parity, lows = _block_ground(cell)
    shift = None
    if check_convergence:
        bigger = CellHamiltonian(
            cell.cutoff + 10,
            build_cell_matrix(cell.omega, cell.lam, cell.eps_L, cell.eps_1,
                              cell.cutoff + 10),
            cell.omega, cell.lam, cell.eps_L, cell.eps_1)
        e0_big, *_ = _block_ground(bigger, k_low=1)
        shift = abs(e0 - e0_big) / max(abs(e0_big), 1.0)
        if convergence_rtol is not None and shift > convergence_rtol:
            raise NotConverged(f"ground-energy shift {shift:.3e} at cutoff "
                               f"{cell.cutoff}->{cell.cutoff + 10} exceeds "
                               f"{convergence_rtol:.0e}")
    gap = float(lows[1] - lows[0])
    return GroundStateResult(float(e0), vector, parity, gap, lows, shift)


def build_cell_matrix(omega, lam, eps_l, eps_1, cutoff) -> sparse.csr_matrix:
    """Matrix-only variant of :func:`build_cell` for internal re-solves."""
    n = np.arange(cutoff, dtype=float)
    a = sparse.diags(np.sqrt(n[1:]), 1)
    n_op = sparse.diags(n)
    single = (omega * n_op + eps_l * sparse.diags(n * (n - 1))
              + lam / 2 * (a @ a + a.T @ a.T))
    eye = sparse.identity(cutoff, format="csr")
    return (sparse.kron(single, eye) + sparse.kron(eye, single)
            + eps_1 * sparse.kron(n_op, n_op)).tocsr()


def _coherent_columns(xs: np.ndarray, cutoff: int) -> np.ndarray:
    """Columns <i x|n> over the imaginary slice, log-domain magnitudes.

    At x = 0 the phase factor (-i sign(x))^n already kills every n > 0
    component (0^0 = 1 keeps the vacuum), so the magnitude can use a safe
    log argument there.
    """
    n = np.arange(cutoff, dtype=float)
    absx = np.abs(xs)
    safe = np.where(absx > 0, absx, 1.0)
    logmag = (-xs**2 / 2)[None, :] + n[:, None] * np.log(safe)[None, :] \
        - 0.5 * gammaln(n + 1)[:, None]
    phase = ((-1j) * np.sign(xs))[None, :] ** n[:, None]
    return np.exp(logmag) * phase


@dataclass(frozen=True)
class HusimiSlice:
    coords: np.ndarray             # shared x/y axis
    values: np.ndarray             # (M, M), values[i, j] at (x_i, y_j), max = 1
    peaks: list[tuple[float, float, float]]   # (x, y, value), refined
    range_: float
    resolution: int


def husimi_slice(state: np.ndarray, cutoff: int, range_: float,
                 resolution: int = 201,
                 peak_threshold: float = 0.5) -> HusimiSlice:
    """|<ix, iy|state>|^2 over a square grid, renormalized to its maximum.

    Peaks are strict local maxima above ``peak_threshold`` with one step of
    quadratic sub-grid refinement in each direction.
    """
    xs = np.linspace(-range_, range_, resolution)
    v = _coherent_columns(xs, cutoff)
    g = state.reshape(cutoff, cutoff)
    q = v.T @ g @ v
    values = np.abs(q)**2
    values /= values.max()
    return HusimiSlice(xs, values, _find_peaks(xs, values, peak_threshold),
                       range_, resolution)


def _find_peaks(xs, values, threshold):
    h = xs[1] - xs[0]
    interior = values[1:-1, 1:-1]
    neighbors = np.stack([values[1 + di:values.shape[0] - 1 + di,
                                 1 + dj:values.shape[1] - 1 + dj]
                          for di in (-1, 0, 1) for dj in (-1, 0, 1)
                          if (di, dj) != (0, 0)])
    is_peak = (interior >= neighbors.max(axis=0)) & (interior >= threshold) \
        & ((interior > neighbors).sum(axis=0) >= 7)
    peaks = []
    for i, j in zip(*np.where(is_peak)):
        i += 1
        j += 1
        denom_x = values[i - 1, j] - 2 * values[i, j] + values[i + 1, j]
        denom_y = values[i, j - 1] - 2 * values[i, j] + values[i, j + 1]
        dx = 0.5 * (values[i - 1, j] - values[i + 1, j]) / denom_x if denom_x else 0.0
        dy = 0.5 * (values[i, j - 1] - values[i, j + 1]) / denom_y if denom_y else 0.0
        peaks.append((float(xs[i] + dx * h), float(xs[j] + dy * h),
                      float(values[i, j])))
    peaks.sort(key=lambda p: -p[2])
    return peaks


@dataclass(frozen=True)
class RingVerdict:
    kind: str                      # "ring" | "peaks"
    n_components: int
    radius: float | None           # Euclidean mean radius of the ring set
    radius_diagonal: float | None  # per-resonator coordinate at the diagonal
    angular_coverage: float
    r_min: float
    r_mean: float


def ring_detector(slice_: HusimiSlice,
                  threshold: float = RING_THRESHOLD) -> RingVerdict:
    """Classify the near-maximum level set as a connected annulus or as
    isolated peaks.

    A ring must cover (almost) all angular sectors around the origin and have
    a hole (minimum radius bounded away from zero); a filled blob at the
    origin or a handful of lobes both classify as peaks.
    """
    mask = slice_.values >= threshold
    labels, n_comp = ndimage.label(mask, structure=np.ones((3, 3)))
    sizes = ndimage.sum_labels(mask, labels, index=np.arange(1, n_comp + 1))
    big = int(np.argmax(sizes)) + 1
    ii, jj = np.where(labels == big)
    x = slice_.coords[ii]
    y = slice_.coords[jj]
    r = np.hypot(x, y)
    theta = np.arctan2(y, x)
    bins = ((theta + np.pi) / (2 * np.pi) * RING_ANGULAR_BINS).astype(int) \
        % RING_ANGULAR_BINS
    coverage = len(np.unique(bins)) / RING_ANGULAR_BINS
    r_min, r_mean = float(r.min()), float(r.mean())
    weights = slice_.values[ii, jj]
    radius = float((r * weights).sum() / weights.sum())
    is_ring = coverage >= RING_COVERAGE_MIN and r_min > 0.3 * r_mean
    return RingVerdict("ring" if is_ring else "peaks", int(n_comp),
                       radius if is_ring else None,
                       radius / math.sqrt(2) if is_ring else None,
                       float(coverage), r_min, r_mean)
