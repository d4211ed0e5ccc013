"""Exception types raised on rejected input."""


class RingLpnError(Exception):
    """Base class for every error this package raises deliberately."""


class FactorizationInvalid(RingLpnError, ValueError):
    pass


class FactorsNotCoprime(RingLpnError, ValueError):
    pass


class ComponentTooLarge(RingLpnError, ValueError):
    pass


class DimensionTooLargeForExhaustive(RingLpnError, ValueError):
    pass


class RankDeficient(RingLpnError):
    """A linear system or information set did not reach full rank."""

    def __init__(self, message: str, free_variables: int = 0):
        super().__init__(message)
        self.free_variables = free_variables


class BatchTooLarge(RingLpnError, MemoryError):
    pass


class Infeasible(RingLpnError, ValueError):
    """No grid point satisfies the constraints; ``constraint`` names the binding one."""

    def __init__(self, message: str, constraint: str):
        super().__init__(message)
        self.constraint = constraint
