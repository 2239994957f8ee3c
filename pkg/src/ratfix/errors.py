"""Exception hierarchy shared by all modules."""


class RatfixError(Exception):
    """Base class for all errors raised by this package."""


class InputError(RatfixError):
    """Malformed or inconsistent user input (bad JSON, bad flags, bad terms)."""


class BudgetError(RatfixError):
    """A configurable resource budget was exhausted."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step
