class Su11Error(Exception):
    """Base class for simulator errors."""


class ConfigError(Su11Error):
    """Invalid run configuration or interferometer parameters."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NumericError(Su11Error):
    """A numerical validation failed."""


class SymplecticError(NumericError):
    """A Bogoliubov transform does not preserve the commutation relations."""


class ResolutionError(NumericError):
    """A sampled detector kernel is too coarse for the requested computation."""
