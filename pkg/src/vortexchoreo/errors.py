"""Exception types raised by the toolkit."""


class VortexError(Exception):
    """Base class for all toolkit errors."""


class MapNotInjective(VortexError, ValueError):
    pass


class OutsideTube(VortexError, ValueError):
    pass


class NoConvergence(VortexError, RuntimeError):
    pass


class CurvatureSingularity(VortexError, ArithmeticError):
    pass


class CoincidentPoints(VortexError, ValueError):
    pass


class InversionFailure(NoConvergence):
    pass


class BoundaryPoint(VortexError, ValueError):
    pass


class CollisionTooClose(VortexError, ValueError):
    pass


class IntegrationAbort(VortexError, RuntimeError):
    """Integration stopped before reaching the requested end time.

    The partial solution up to the abort time is attached as ``partial``.
    """

    def __init__(self, message, t=None, partial=None):
        super().__init__(message)
        self.t = t
        self.partial = partial


class CollisionAbort(IntegrationAbort):
    pass


class BoundaryAbort(IntegrationAbort):
    pass


class StepSizeUnderflow(IntegrationAbort):
    pass


class NewtonDiverged(NoConvergence):
    pass


class SingularJacobian(VortexError, ArithmeticError):
    pass


class ContinuationStalled(VortexError, RuntimeError):
    def __init__(self, message, family=None):
        super().__init__(message)
        self.family = family


class SeparationViolated(VortexError, ValueError):
    pass


class InsufficientFamily(VortexError, ValueError):
    pass


class PhaseMismatch(VortexError, ValueError):
    pass


class ConfigError(VortexError, ValueError):
    """Invalid run configuration; ``field`` names the offending entry."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class OutsideDomain(VortexError, ValueError):
    pass
