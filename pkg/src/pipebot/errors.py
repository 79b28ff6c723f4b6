"""Shared exception types."""


class PipebotError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(PipebotError):
    """A physical parameter or configuration value violates its constraints."""


class SynthesisError(PipebotError):
    """Gain synthesis failed (non-stabilizable pair or solver non-convergence)."""


class DivergenceError(PipebotError):
    """Numerical integration produced a non-finite state."""


class ConfigError(PipebotError):
    """A run configuration file is malformed or contains unknown keys."""
