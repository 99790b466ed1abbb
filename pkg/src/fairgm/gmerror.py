class FairGMError(Exception):
    """Base class of all errors raised by fairgm."""


class DatasetError(FairGMError, ValueError):
    pass


class NotPositiveDefinite(FairGMError, ValueError):
    pass


class UnsupportedPenaltyGradient(FairGMError, ValueError):
    pass


class MissingLocalSolution(FairGMError, KeyError):
    pass


class GeneratorError(FairGMError, ValueError):
    pass


class SolverError(FairGMError, ArithmeticError):
    """Raised when an iterate cannot be kept feasible or a gradient is not finite."""


class ConvergenceWarning(UserWarning):
    pass
