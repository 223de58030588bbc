"""Exception types shared across the package."""


class TriphotonError(Exception):
    """Base class for all package-specific errors."""


class DomainError(TriphotonError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class UnsupportedModePair(DomainError):
    """Two internal states cannot be overlapped (incompatible mode families)."""


class InvalidSpectrum(DomainError):
    """A sampled spectrum violates its grid or positivity requirements."""


class TriadPhaseUndefined(TriphotonError):
    """The cyclic overlap product is too small for its argument to be meaningful."""


class NumericalInconsistency(TriphotonError):
    """A quantity that must be real/bounded came out outside tolerance."""


class SizeLimit(TriphotonError):
    """Requested photon number exceeds the configured exact-evaluation cap."""


class ConfigError(TriphotonError):
    """A run configuration failed validation."""
