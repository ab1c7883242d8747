"""Exception types shared by all modules.

Condition failures and inconclusive scans are *report statuses*, not
exceptions; exceptions are reserved for inputs a check cannot run on.
"""


class InputError(ValueError):
    """Input violates a precondition (bad sequence, grid, parameter...)."""


class TruncationError(InputError):
    """Query lies beyond what a truncated sequence or product can answer."""
