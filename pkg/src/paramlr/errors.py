"""Exception hierarchy shared by every module."""


class ParamLRError(ValueError):
    """Base class for input and contract violations."""


class ValidationError(ParamLRError):
    """Malformed input: bad shapes, non-finite entries, out-of-range indices."""


class BranchingError(ParamLRError):
    """A continuity guarantee was requested where the spectral gap vanishes.

    ``xis`` lists the offending parameter values when known.
    """

    def __init__(self, message, xis=()):
        super().__init__(message)
        self.xis = list(xis)
