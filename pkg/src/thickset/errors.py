"""Exception hierarchy shared by all thickset modules.

The CLI maps these onto its exit-code contract: bad input is exit 1,
a certified hypothesis/threshold failure is exit 2, and an indeterminate
outcome (precision or search budget exhausted) is exit 3.
"""


class ThicksetError(Exception):
    """Base class for all library errors."""


class InputError(ThicksetError, ValueError):
    """Malformed or out-of-range input (precondition violation)."""


class HypothesisError(ThicksetError):
    """A required hypothesis was checked and certifiably fails."""


class Indeterminate(ThicksetError):
    """Neither certified true nor certified false at the allotted
    precision / search budget."""
