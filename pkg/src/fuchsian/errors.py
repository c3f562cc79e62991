"""Exception hierarchy shared by the library and the command line."""


class FuchsianError(Exception):
    """Base class for all errors raised by this package."""


class PreconditionError(FuchsianError, ValueError):
    """An input violates the documented precondition of an operation."""


class IrregularSingularityError(PreconditionError):
    pass


class PrecisionError(FuchsianError):
    """The requested number of digits cannot be reached."""


class AmbiguousResultError(FuchsianError):
    """Several candidates survive and the data cannot discriminate them."""
