"""Exception types raised across the package."""


class DJLaplaceError(Exception):
    """Base class for solver errors."""


class UnknownPresent(DJLaplaceError):
    """An operation needed a concrete function but found g or one of its derivatives."""


class UnsupportedForm(DJLaplaceError):
    """Input falls outside the closed atom dictionary."""


class ExprSyntaxError(DJLaplaceError, SyntaxError):
    """Malformed expression text; ``pos`` is the 0-based character offset."""

    def __init__(self, msg, text="", pos=0):
        self.pos = pos
        self.text_src = text
        super().__init__(f"{msg} at position {pos}")


class InconsistentMatch(DJLaplaceError):
    pass


class UnknownInTarget(DJLaplaceError):
    pass


class NoPattern(DJLaplaceError):
    """Constraint values do not fit any identification rule."""


class OverdeterminedConstant(DJLaplaceError):
    pass


class UnsupportedConfiguration(DJLaplaceError):
    pass


class ProblemFileError(DJLaplaceError):
    def __init__(self, msg, line=None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + msg)


class UnknownDemo(DJLaplaceError):
    pass


class MissingReference(DJLaplaceError):
    pass
