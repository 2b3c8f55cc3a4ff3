"""Exception hierarchy.

Every error raised by the library derives from :class:`ResonanceError`, so
callers (the CLI in particular) can map whole families to exit codes.
"""


class ResonanceError(Exception):
    """Base class for all library errors."""


# graph construction / ingestion
class GraphError(ResonanceError, ValueError):
    pass


class NotRegular(GraphError):
    pass


class HasLoop(GraphError):
    pass


class HasMultiEdge(GraphError):
    pass


class Disconnected(GraphError):
    pass


class UnknownName(GraphError):
    pass


class ParamOutOfRange(GraphError):
    pass


class ParityViolation(GraphError):
    pass


class GenerationTimeout(GraphError):
    pass


class FormatError(GraphError):
    pass


# state / pairing bookkeeping
class OrientationMismatch(ResonanceError, ValueError):
    pass


class GraphMismatch(ResonanceError, ValueError):
    pass


# numerics
class NumericalError(ResonanceError, ArithmeticError):
    pass


class ConvergenceFailure(NumericalError):
    pass


class NotAResonance(NumericalError):
    pass


class ZeroEigenvalue(NumericalError):
    pass


class PoleAtZSquaredOne(NumericalError):
    pass


class EigenResidualTooLarge(NumericalError):
    pass


# tree cover
class CoverError(ResonanceError, ValueError):
    pass


class DepthTooSmall(CoverError):
    pass


class InvalidTarget(CoverError):
    pass


class GeodesicLeavesTruncation(CoverError):
    pass


class InsideSn(CoverError):
    pass
