"""Exception hierarchy.

``ParameterDomainError`` and ``StateDomainError`` are ``ValueError`` subclasses
(bad input); the ``SolverError`` family signals numerical failure.
"""


class SIPNSError(Exception):
    pass


class ParameterDomainError(SIPNSError, ValueError):
    pass


class StateDomainError(SIPNSError, ValueError):
    pass


class EvaluationError(SIPNSError, ArithmeticError):
    pass


class SolverError(SIPNSError):
    """Integration failed; ``partial`` holds whatever trajectory was produced."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class NonConvergenceError(SolverError):
    pass


class NegativityError(SolverError):
    pass


class DegenerateSpecError(SIPNSError, ValueError):
    pass
