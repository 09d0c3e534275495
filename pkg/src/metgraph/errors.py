"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or inconsistent user input (files, flags, divisors)."""


class InternalInvariantError(RuntimeError):
    """A structural guarantee the computation relies on failed to hold.

    Raised when a cross-check that should be a tautology (uniqueness of
    the slope map per cell, a representative failing to reproduce its own
    configuration, a dimension mismatch between two derivations) comes
    back false.  Indicates a bug, never bad input.
    """


class EulerViolation(RuntimeError):
    """The alternating sum of a computed f-vector is not one."""
