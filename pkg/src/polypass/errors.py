"""Shared exception types. The CLI maps these onto exit codes, see cli.py."""


class ValidationError(ValueError):
    """Bad input: impossible exponents, malformed config, unsupported mode."""


class HypothesisError(RuntimeError):
    """A numerically checked structural hypothesis on f failed."""


class CalibrationError(RuntimeError):
    """Truncation calibration found no admissible parameters."""


class GeometryError(RuntimeError):
    """The energy landscape lacks the required mountain-pass geometry."""


class ConvergenceError(RuntimeError):
    """An iterative routine exhausted its budget without converging."""
