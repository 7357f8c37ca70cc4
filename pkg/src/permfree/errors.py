"""Exception hierarchy shared by every module."""


class PermfreeError(Exception):
    """Base class; the CLI maps it to exit status 1."""


class DimensionError(PermfreeError, ValueError):
    """Objects living on different n (or ground sizes) were combined."""


class PatternError(PermfreeError, ValueError):
    """A restriction pattern is not a partial injection on [n]."""


class DomainError(PermfreeError, ValueError):
    """A parameter lies outside the domain of a formula or construction."""


class CapacityError(PermfreeError):
    """The request needs more enumeration than the configured cap allows."""


class NumericError(PermfreeError, ValueError):
    """Non-finite input to a floating point routine."""


class ParseError(PermfreeError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
