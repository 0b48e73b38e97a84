"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes, so new error kinds should subclass one
of the classes below rather than ``Exception`` directly.
"""


class ArityLabError(Exception):
    """Base class for all errors raised by arity_lab."""


class InputError(ArityLabError, ValueError):
    """Malformed arguments: out-of-range elements, sort clashes, bad shapes."""


class ResourceError(ArityLabError):
    """A configured cap (universe size, table rows, search budget) was hit."""

    def __init__(self, message, cap=None, required=None):
        super().__init__(message)
        self.cap = cap
        self.required = required


class StaleWitnessError(ArityLabError):
    """A witness was checked against a structure with a different digest."""


class ConsistencyError(ArityLabError):
    """An invariant that a proof guarantees was observed to fail.

    Raised for impossible class-size mismatches, theorem violations and other
    situations that can only arise from a bug in this package.
    """
