"""Exception hierarchy."""


class BGACQError(Exception):
    """Base class for all package errors."""


class SingularityError(BGACQError, ArithmeticError):
    """A block linear system is singular or numerically singular."""

    def __init__(self, msg, z=None):
        super().__init__(msg)
        self.z = z


class KernelDomainError(BGACQError, ValueError):
    """A kernel was evaluated outside its analyticity region."""

    def __init__(self, msg, point=None, index=None):
        super().__init__(msg)
        self.point = point
        self.index = index


class NearDefectiveError(BGACQError, ArithmeticError):
    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


class UnsupportedKernelError(BGACQError, ValueError):
    pass


class ConditioningError(BGACQError, ArithmeticError):
    def __init__(self, msg, condition=None):
        super().__init__(msg)
        self.condition = condition


class AssumptionViolation(BGACQError, ValueError):
    """The scheme does not satisfy the A-stability assumption."""

    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


class FitError(BGACQError, ArithmeticError):
    pass


class OracleError(BGACQError, RuntimeError):
    pass
