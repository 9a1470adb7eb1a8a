"""Exception hierarchy shared by all modules."""


class ProbeError(Exception):
    """Base class for all errors raised by the package."""


class ValidationError(ProbeError, ValueError):
    """Input matrix or parameter fails a structural check."""


class InstabilityError(ProbeError):
    """Hamiltonian is not bounded from below (or too close to the boundary)."""

    def __init__(self, message, d_crit=None):
        super().__init__(message)
        self.d_crit = d_crit


class DegenerateSpectrumError(ProbeError):
    """Polariton frequencies coincide, so the mixing angle is undefined."""


class PureStateDegenerate(ProbeError):
    """The Stein-type system is singular because the state is pure."""


class CutoffError(ProbeError):
    """Fock truncation is not converged within the allowed cutoff."""

    def __init__(self, message, suggested_cutoff=None):
        super().__init__(message)
        self.suggested_cutoff = suggested_cutoff


class ConfigError(ProbeError):
    """Sweep configuration is malformed."""
