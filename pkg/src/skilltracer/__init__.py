"""Real-time tracking of per-student skill success-rate distributions."""

from .basis import MAX_ORDER, BasisCoefficients, CdfCoefficients
from .errors import (
    AllZeroError,
    ArityError,
    ConstraintError,
    CorruptRecordError,
    MalformedPolynomialError,
    MissingSkillDistributionError,
    MissingVariableError,
    NonConvergenceError,
    OrderMismatchError,
    OrderOverflowError,
    SetupError,
    SetupSyntaxError,
    SkillTracerError,
    TimestampRegressionError,
    UnknownExerciseError,
    UnknownSkillError,
    UnknownStudentError,
)

__version__ = "0.1.0"

__all__ = [
    "MAX_ORDER",
    "BasisCoefficients",
    "CdfCoefficients",
    "SkillTracerError",
    "AllZeroError",
    "ArityError",
    "ConstraintError",
    "CorruptRecordError",
    "MalformedPolynomialError",
    "MissingSkillDistributionError",
    "MissingVariableError",
    "NonConvergenceError",
    "OrderMismatchError",
    "OrderOverflowError",
    "SetupError",
    "SetupSyntaxError",
    "TimestampRegressionError",
    "UnknownExerciseError",
    "UnknownSkillError",
    "UnknownStudentError",
    "__version__",
]
