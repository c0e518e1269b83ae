"""Exception and warning types raised across the package."""


class LensfixError(Exception):
    pass


class DegenerateElimination(LensfixError):
    """A polynomial has no dependence on the variable being eliminated."""


class EliminationDegenerate(LensfixError):
    """The resultant vanishes identically in both elimination orders."""


class SingularJacobian(LensfixError):
    pass


class NoConvergenceWarning(RuntimeWarning):
    pass


class ModelError(LensfixError, ValueError):
    pass


class DuplicatePosition(ModelError):
    pass


class NonpositiveMass(ModelError):
    pass


class NonpositiveParameter(ModelError):
    pass


class ZeroDenominator(ModelError):
    pass


class PoleEvaluation(LensfixError, ZeroDivisionError):
    pass


class SymmetryViolation(LensfixError):
    pass


class NoPotentialForm(LensfixError):
    pass


class PotentialSingularity(LensfixError):
    pass


class DegeneratePoint(LensfixError):
    """Magnification requested at a fixed point sitting on a caustic."""


class NotRealImage(LensfixError):
    pass


class CenteredSource(LensfixError):
    pass


class EmptyWindow(LensfixError):
    pass


class ConfigError(LensfixError, ValueError):
    pass
