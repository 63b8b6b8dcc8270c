"""Exception hierarchy.

Every failure raised by the library derives from :class:`CommFactorError`.
The command-line front end maps :class:`DeterminantObstruction` to exit
code 3 and every other :class:`CommFactorError` to exit code 2.
"""


class CommFactorError(Exception):
    """Base class for all library errors."""


class StructureError(CommFactorError, ValueError):
    """Input does not have the structure an operation requires."""


class NotNormal(StructureError):
    pass


class NotUnitary(StructureError):
    pass


class NotStructured(StructureError):
    pass


class NotUnitModulus(StructureError):
    pass


class NotUnitriangular(StructureError):
    pass


class DimMismatch(StructureError):
    pass


class EndpointMismatch(StructureError):
    pass


class OutOfRange(StructureError):
    pass


class RangeViolation(StructureError):
    pass


class NonPositive(StructureError):
    pass


class SumNotZero(StructureError):
    pass


class Singular(CommFactorError, ArithmeticError):
    pass


class SingularSample(Singular):
    pass


class BlockSingular(Singular):
    pass


class NoConvergence(CommFactorError, ArithmeticError):
    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations


class NonConvergentQuadrature(NoConvergence):
    pass


class BranchInfeasible(CommFactorError):
    pass


class TrackingAmbiguous(CommFactorError):
    def __init__(self, message, sample_index=None):
        super().__init__(message)
        self.sample_index = sample_index


class ResolutionTooCoarse(CommFactorError):
    pass


class SchurConditionViolated(CommFactorError):
    """The Schur cross-term inequality fails; carries both sides."""

    def __init__(self, message, cross_term=None, bound=None):
        super().__init__(message)
        self.cross_term = cross_term
        self.bound = bound


class NoAdmissibleProjection(CommFactorError):
    def __init__(self, message, margins=None):
        super().__init__(message)
        self.margins = margins


class PreconditionDistance(CommFactorError):
    pass


class IllConditioned(CommFactorError):
    pass


class StrategyPreconditionViolated(CommFactorError):
    pass


class ScheduleInfeasible(CommFactorError):
    pass


class DeterminantObstruction(CommFactorError):
    """The determinant of the input is nonzero, so no factorization exists."""

    def __init__(self, message, residue=None):
        super().__init__(message)
        self.residue = residue
