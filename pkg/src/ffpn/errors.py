"""Shared exception types."""


class FfpnError(Exception):
    pass


class NotPrime(FfpnError):
    pass


class UnfactoredCofactor(FfpnError):
    """A composite cofactor survived the factoring budget.

    Carries the offending cofactor so it can be supplied through a hint or
    the factor cache file.
    """

    def __init__(self, cofactor, message=None):
        self.cofactor = cofactor
        super().__init__(message or f"unfactored composite cofactor {cofactor}")


class SizeBudgetExceeded(FfpnError):
    pass


class ZeroElement(FfpnError):
    pass


class DivisibilityViolation(FfpnError):
    pass
