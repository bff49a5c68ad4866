"""Semiclassical ground states, Gaussian excitation spectra, topological
invariants, and edge-mode localization for chains of parametrically driven
Kerr resonators coupled by staggered cross-Kerr nonlinearities."""

__version__ = "0.1.0"

from .model import (Boundary, ChainConfig, DerivedParams, Regime,
                    classify_regime, derive_params)
from .semiclassical import (BulkWindow, SemiclassicalProfile, bulk_window,
                            equation_defects, solve_newton,
                            solve_obc_analytic, solve_pbc)
from .gaussian import QuadraticCoefficients, build_coefficients, pbc_constants
from .bands import (BandGrid, BandStructure, ZakResult, band_edges,
                    band_structure, bogoliubov_angle, dispersion, fbz_momenta,
                    j_k, single_k_matrix, zak_phase)
from .bdg import (BdgMatrix, BdgSolution, LocalizationFit, ModeRecord,
                  assemble, classify_modes, diagonalize, fit_localization,
                  solution_for, spectrum_vs_delta)
from .edge import (EdgeAnalysis, delta_spur, delta_top_scan, edge_energy_delta1,
                   edge_scan, perturbed_edge_energy, spurious_energy,
                   toeplitz_spectrum, xi_spur_estimate)
from .fock import (CellHamiltonian, GroundStateResult, HusimiSlice,
                   RingVerdict, build_cell, ground_state, husimi_slice,
                   ring_detector)
