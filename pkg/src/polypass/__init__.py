"""polypass: mountain-pass solver and exact exponent bookkeeping for
supercritical polyharmonic problems (-Delta)^m u = f(u) + lam |u|^(p-1) u."""

from .errors import (
    CalibrationError,
    ConvergenceError,
    GeometryError,
    HypothesisError,
    ValidationError,
)

__version__ = "0.1.0"
