"""Exception hierarchy shared by every subsystem."""


class BalanceLawError(Exception):
    """Base class for all package errors."""


class StateSpaceViolation(BalanceLawError):
    pass


class NonFiniteResult(BalanceLawError):
    pass


class SingularTransform(BalanceLawError):
    pass


class ConstructionError(BalanceLawError):
    """A model failed its structural self-checks at construction time."""


class InvalidPressureLaw(ConstructionError):
    pass


class SubcharacteristicViolation(ConstructionError):
    pass


class SymmetryViolation(ConstructionError):
    pass


class NonNegativityViolation(ConstructionError):
    pass


class SamplingExhausted(BalanceLawError):
    pass


class RankMismatch(BalanceLawError):
    pass


class NotEquilibrium(BalanceLawError):
    pass


class NoEquilibriumFound(BalanceLawError):
    pass


class MaxwellianUnavailable(BalanceLawError):
    pass


class NoConvergence(BalanceLawError):
    pass


class StateSpaceExit(BalanceLawError):
    pass


class NewtonFailure(BalanceLawError):
    def __init__(self, message, cell=None, time=None):
        super().__init__(message)
        self.cell = cell
        self.time = time


class GridMismatch(BalanceLawError):
    pass


class ParseError(BalanceLawError):
    pass


class ValidationError(BalanceLawError):
    pass


class InsufficientSweepData(BalanceLawError):
    """Fewer than three eps values produced usable norms."""
