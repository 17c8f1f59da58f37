"""Exception hierarchy. Every failure raised by the library derives from RockforgeError."""


class RockforgeError(Exception):
    """Base class for library errors."""

    def __init__(self, message: str = "", witnesses=None):
        super().__init__(message)
        self.witnesses = witnesses or []


class InputError(RockforgeError):
    """Malformed or inconsistent input data."""


class SingularMatrix(RockforgeError):
    pass


class ZeroConstantTerm(RockforgeError):
    pass


class RankDeficient(RockforgeError):
    pass


class Unbounded(RockforgeError):
    pass


class Empty(RockforgeError):
    pass


class Disconnected(RockforgeError):
    pass


class TopNotUnique(RockforgeError):
    pass


class Unreachable(RockforgeError):
    pass


class NotAVertex(RockforgeError):
    pass


class NotInterior(RockforgeError):
    pass


class RetryExhausted(RockforgeError):
    pass


class NonPositiveRHS(RockforgeError):
    pass


class NonPositiveCoefficient(RockforgeError):
    pass


class ContainmentFailed(RockforgeError):
    pass


class SimplexCoreInvalid(RockforgeError):
    pass


class DimensionMismatch(RockforgeError):
    pass


class ScheduleInvalid(RockforgeError):
    pass


class NoMonotonePath(RockforgeError):
    pass


class RowsNotIdentified(RockforgeError):
    pass


class TransferInfeasible(RockforgeError):
    pass


class NotFound(RockforgeError):
    pass


class CycleDetected(RockforgeError):
    pass


class StartInfeasible(RockforgeError):
    pass


class NotSimpleAtVertex(RockforgeError):
    pass


class DegenerateSystem(RockforgeError):
    pass


class DimensionTooHigh(RockforgeError):
    pass
