"""Exception hierarchy shared by every module."""


class TrueComplexityError(Exception):
    """Base class for all package errors."""


class DomainError(TrueComplexityError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class ShapeError(TrueComplexityError, ValueError):
    """Tables or matrices with incompatible shapes or ambient spaces."""


class BudgetError(TrueComplexityError):
    """The enumeration would exceed the configured point budget."""

    def __init__(self, what: str, cost: int, cap: int):
        self.what = what
        self.cost = int(cost)
        self.cap = int(cap)
        super().__init__(f"{what}: estimated cost {self.cost:,} exceeds budget {self.cap:,}")


class UnsupportedCharacteristicError(DomainError):
    """The operation needs p larger than a degree it was given."""


class ContractError(TrueComplexityError):
    """A documented precondition of an operation does not hold.

    ``violations`` lists human-readable descriptions of each violated bound.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class ConstructionError(TrueComplexityError):
    """A witness construction is impossible for the given input."""


class PolynomialSyntaxError(DomainError):
    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} at position {position}")
