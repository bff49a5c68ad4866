"""Exception hierarchy.

All errors raised by the library derive from :class:`KerrChainError`, split
into three families that the CLI maps onto exit codes: configuration errors
(exit 2), physics/regime-validity errors (exit 3), and numerical failures
(exit 4).
"""


class KerrChainError(Exception):
    """Base class for all library errors."""


# -- configuration (exit code 2) --------------------------------------------

class ConfigurationError(KerrChainError):
    pass


class InvalidConfig(ConfigurationError):
    """Chain configuration violates a field invariant."""


class InvalidProfile(ConfigurationError):
    """A semiclassical profile does not satisfy its contract (stale residual)."""


class BoundaryMismatch(ConfigurationError):
    """Profile and configuration disagree on the boundary kind."""


class ShapeError(ConfigurationError):
    """Coefficient arrays are inconsistent with one boundary kind."""


class CutoffTooSmall(ConfigurationError):
    """Fock-space truncation below the supported minimum."""


# -- regime / validity (exit code 3) -----------------------------------------

class ValidityError(KerrChainError):
    pass


class RegimeError(ValidityError):
    """Operation requested outside its supported phase-diagram region."""


class DegenerateDelta(ValidityError):
    """|delta| = 1: the correlation length is singular; use the numeric solver."""


class TauUndefined(ValidityError):
    """Correlation length undefined for this configuration."""


class GapClosed(ValidityError):
    """Band gap closed (delta = 0); the winding invariant is undefined."""


class StabilityViolation(ValidityError):
    """Squeezing-angle ratio left (-1, 1); the quadratic form is not stable."""


class PerturbationInvalid(ValidityError):
    """Perturbative edge formula requested outside t << delta_wH."""


class OutOfValidity(ValidityError):
    """Boundary-drive reduction too large for the requested closed form."""


class NoLocalizedModes(ValidityError):
    """A scan found no localized in-gap modes on the given grid."""


# -- numerics (exit code 4) ---------------------------------------------------

class NumericalError(KerrChainError):
    pass


class NoConvergence(NumericalError):
    """Iteration budget exhausted without reaching the residual tolerance."""


class NegativeAmplitude(NumericalError):
    """Equilibrium iterate left the physical cone of non-negative occupations."""


class UnstableProfile(NumericalError):
    """Quadratic Hamiltonian not positive definite around the given profile.

    Carries the offending eigenvalues in :attr:`eigenvalues`.
    """

    def __init__(self, message: str, eigenvalues=None):
        super().__init__(message)
        self.eigenvalues = eigenvalues


class NotConverged(NumericalError):
    """Fock-cutoff sensitivity of the ground energy exceeds the threshold."""


class InsufficientSupport(NumericalError):
    """Mode has negligible weight on the requested fit window."""
