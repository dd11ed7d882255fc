"""Exception types shared across the package."""


class SnxpError(Exception):
    """Base class for all package errors."""


class ConfigurationError(SnxpError):
    """Invalid grid, parameter, or config combination."""


class SingularPhaseError(SnxpError):
    """Phase requested for a (near-)zero complex sample."""

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"cannot unwrap phase: sample {index} has near-zero magnitude")


class TruncationError(SnxpError):
    """A series did not converge within the term cap."""

    def __init__(self, last_term: float, n_terms: int):
        self.last_term = last_term
        self.n_terms = n_terms
        super().__init__(
            f"series not converged after {n_terms} terms "
            f"(last term magnitude {last_term:.3e})"
        )


class DegenerateMappingError(SnxpError):
    """Two-pole reduction undefined for these cavity parameters."""


class ResolutionError(ConfigurationError):
    """Frequency grid too coarse to resolve a spectral feature."""


class FileFormatError(SnxpError):
    """Unreadable or version-mismatched data file."""
