"""Exception hierarchy shared by all modules."""


class CbfWeylError(Exception):
    """Base class for every error raised by this package."""


class DomainError(CbfWeylError, ValueError):
    """An argument lies outside the domain of the operation."""


class NumericError(CbfWeylError, ArithmeticError):
    """A numerical procedure failed to reach its tolerance.

    ``diagnostics`` carries whatever the failing routine knew at the time
    (error estimates, interval, iteration counts) so callers can report it.
    """

    def __init__(self, message, **diagnostics):
        self.diagnostics = diagnostics
        if diagnostics:
            extra = ", ".join(f"{k}={v!r}" for k, v in diagnostics.items())
            message = f"{message} ({extra})"
        super().__init__(message)


class BranchPointError(DomainError):
    """Evaluation requested exactly at a branch point of the cut."""


class PoleError(DomainError):
    """Evaluation requested at (or numerically on top of) a pole."""


class BracketError(NumericError):
    """No sign change was found where one is guaranteed."""


class InternalInconsistencyError(CbfWeylError, AssertionError):
    """A proven inequality failed numerically; indicates a bug upstream."""


class UnsupportedFamilyError(CbfWeylError, NotImplementedError):
    """The requested path is not available for this Bernstein family."""


class ConfigError(CbfWeylError, ValueError):
    """Malformed run configuration or command-line value."""
