"""Exception types shared by the package.

The CLI maps these onto exit codes: invalid input is 2, running out of
trustworthy continued-fraction depth is 3, a blown runtime budget is 4.
"""


class MalphaError(Exception):
    exit_code = 1


class InvalidAlpha(MalphaError, ValueError):
    exit_code = 2


class RationalDegenerate(MalphaError, ValueError):
    """m*alpha landed exactly on an integer or half-integer."""

    exit_code = 2

    def __init__(self, m=None, message="rational alpha: S_M undefined"):
        self.m = m
        if m is not None:
            message = f"{message} (m={m})"
        super().__init__(message)


class ExpansionExhausted(MalphaError, LookupError):
    exit_code = 3

    def __init__(self, available, requested):
        self.available = available
        self.requested = requested
        super().__init__(
            f"expansion exhausted after {available} quotients (requested {requested})"
        )


class HorizonExceeded(MalphaError, LookupError):
    exit_code = 3

    def __init__(self, horizon, requested):
        self.horizon = horizon
        self.requested = requested
        super().__init__(
            f"validity horizon is {horizon} quotients, requested {requested}"
        )


class CycleNotFound(MalphaError, RuntimeError):
    exit_code = 2


class CapExceeded(MalphaError, OverflowError):
    exit_code = 3

    def __init__(self, k, value, cap):
        self.k = k
        self.value = value
        self.cap = cap
        super().__init__(f"partial quotient a_{k} exceeds cap {cap}")


class BudgetExceeded(MalphaError, TimeoutError):
    exit_code = 4
