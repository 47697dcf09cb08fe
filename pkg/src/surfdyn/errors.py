"""Exception hierarchy shared by all modules."""


class SurfDynError(Exception):
    """Base class for every error raised by this package."""


class InvalidPoint(SurfDynError, ValueError):
    pass


class NotHyperbolic(SurfDynError, ValueError):
    pass


class FieldMismatch(SurfDynError, ValueError):
    """Arithmetic between elements of different quadratic fields."""


class NotOnSurface(SurfDynError, ValueError):
    pass


class DegenerateFiber(SurfDynError):
    """The residual quadratic of a fiber vanishes identically.

    ``axis`` names the involution that failed (1-based) and ``step`` the
    orbit index, when known.
    """

    def __init__(self, msg, axis=None, step=None):
        super().__init__(msg)
        self.axis = axis
        self.step = step


class DegenerateLine(DegenerateFiber):
    """The (1,1) form restricted to a fiber vanishes identically."""


class NullEntropy(SurfDynError):
    pass


class AmbiguousCone(SurfDynError):
    pass


class InfeasibleConfiguration(SurfDynError):
    pass


class InvalidDepth(SurfDynError, ValueError):
    pass


class Indeterminate(SurfDynError):
    pass


class InsufficientOrbit(SurfDynError):
    pass


class NotInvertible(SurfDynError, ValueError):
    pass


class PeriodicCenter(SurfDynError):
    pass


class PeriodicMap(SurfDynError):
    pass
