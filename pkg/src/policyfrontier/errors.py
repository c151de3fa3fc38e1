"""Exception types shared across the package."""


class PolicyFrontierError(Exception):
    """Base class for package errors."""


class SchemaError(PolicyFrontierError):
    """Input file or config does not match the expected schema."""


class DataError(PolicyFrontierError):
    """Input values are malformed (non-binary outcomes, unknown labels, ...)."""


class ConfigError(PolicyFrontierError):
    """Inconsistent or invalid configuration."""


class DivergenceError(PolicyFrontierError):
    """Optimization produced a non-finite loss or gradient."""

    def __init__(self, msg, epoch=None):
        super().__init__(msg)
        self.epoch = epoch


class DegenerateOutcomeError(PolicyFrontierError):
    """An outcome column contains a single class and cannot be modeled."""


class CalibrationError(PolicyFrontierError):
    """Synthetic generator spec fails the marginal-outcome probe."""


class NotApplicableError(PolicyFrontierError):
    """The requested analysis is undefined for the given data."""
