"""Exception hierarchy shared by all modules."""


class LabError(Exception):
    """Base class for every error raised by the package."""


class InvalidConfigError(LabError, ValueError):
    pass


class MemoryCapError(LabError, MemoryError):
    pass


class InsufficientTrialsError(LabError, ValueError):
    pass


class NoConvergenceError(LabError, ArithmeticError):
    pass


class EigenAccuracyError(LabError, ArithmeticError):
    pass


class BranchAmbiguityError(LabError, ArithmeticError):
    pass


class OffSupportError(LabError, ValueError):
    pass


class EdgeBracketError(LabError, ArithmeticError):
    pass


class CrossCheckError(LabError, ArithmeticError):
    pass


class NonFiniteIntegrandError(LabError, ArithmeticError):
    pass


class DomainError(LabError, ValueError):
    pass


class BracketError(LabError, ArithmeticError):
    pass


class QuadratureError(LabError, ArithmeticError):
    pass


class NearCriticalError(LabError, ValueError):
    pass


class PreconditionError(LabError, ValueError):
    pass


class DegenerateSampleError(LabError, ValueError):
    pass


class ExperimentAbort(LabError, RuntimeError):
    pass
