"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid shapes, options or arguments supplied by the caller."""


class TrainingError(RuntimeError):
    """Training aborted; message carries the step index and diagnostics."""


class IngestionError(ValueError):
    """A persisted dataset or checkpoint failed validation on load."""


class NonFiniteError(ArithmeticError):
    """An operation produced NaN or Inf; message names the operation."""
