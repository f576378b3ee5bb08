"""Exception types shared across the engine."""


class SkillTracerError(Exception):
    """Base class for all library errors."""


class AllZeroError(SkillTracerError):
    """Every coefficient vanished; the update is degenerate and must not proceed."""


class OrderOverflowError(SkillTracerError):
    """A coefficient vector would exceed the configured maximum order."""


class OrderMismatchError(SkillTracerError):
    """Element-wise combination requires equal orders."""


class MalformedPolynomialError(SkillTracerError):
    """A likelihood polynomial is materially negative on [0, 1]."""


class MissingSkillDistributionError(SkillTracerError):
    """A polynomial variable has no distribution assigned."""


class MissingVariableError(SkillTracerError):
    """A polynomial variable has no value assigned."""


class SetupError(SkillTracerError):
    """Base class for set-up expression problems."""


class SetupSyntaxError(SetupError):
    """Unparseable set-up text; carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ArityError(SetupError):
    """An operator received the wrong number of arguments."""


class ConstraintError(SetupError):
    """A structurally valid tree violates a placement or value constraint."""


class UnknownSkillError(SkillTracerError):
    pass


class UnknownStudentError(SkillTracerError):
    pass


class UnknownExerciseError(SkillTracerError):
    pass


class TimestampRegressionError(SkillTracerError):
    """An observation arrived with a timestamp earlier than the student's last one."""


class CorruptRecordError(SkillTracerError):
    """A stored record failed its checksum; carries the byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class NonConvergenceError(SkillTracerError):
    """Grid refinement failed to stabilize a quadrature estimate."""
