"""Typed failures.

Three families map onto the CLI exit codes: malformed input (2), a
mathematical singularity at the requested point (3) and disagreement between
independent routes (4).
"""


class QGraphError(Exception):
    exit_code = 1

    @property
    def kind(self) -> str:
        return type(self).__name__


class InputError(QGraphError, ValueError):
    exit_code = 2


class SingularityError(QGraphError, ArithmeticError):
    exit_code = 3


class CrossCheckError(QGraphError):
    exit_code = 4


# input / construction
class NonHermitianMatrix(InputError):
    pass


class EmptyLeads(InputError):
    pass


class NonpositiveLength(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class UnsortedPoints(InputError):
    pass


class NotAStar(InputError):
    pass


class OutOfRange(InputError):
    pass


class MeshTooCoarse(InputError):
    pass


class NotHermitian(InputError):
    pass


class NonzeroPotential(InputError):
    pass


class NotNegativePotential(InputError):
    pass


class MissingBlock(InputError):
    pass


class SpecParseError(InputError):
    pass


# numerical singularities
class StepSizeUnderflow(SingularityError):
    pass


class ToleranceNotMet(SingularityError):
    pass


class ZeroSpectralPoint(SingularityError):
    pass


class IntegralNotConverged(SingularityError):
    pass


class NearSingularN1(SingularityError):
    pass


class DirichletEigenvalueHit(SingularityError):
    pass


class NeumannTripletPole(SingularityError):
    pass


class ExtrapolationDiverged(SingularityError):
    pass


class PoleHit(SingularityError):
    pass


class SingularAlphaMinusK(SingularityError):
    pass


class SingularFactor(SingularityError):
    pass


class ZeroWeylValue(SingularityError):
    pass


class SingularAtZeta(SingularityError):
    pass


class SolverFailure(SingularityError):
    pass


class NonnegativityNotEstablished(SingularityError):
    pass


class NonnegativityFailed(SingularityError):
    pass


# cross-checks
class CountUnstable(CrossCheckError):
    pass


class CountMismatch(CrossCheckError):
    pass
