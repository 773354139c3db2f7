from typing import Any, Optional


class GraphToolkitError(Exception):
    """Base class for every error raised by the toolkit."""

    exit_code = 1

    def __init__(self, message: str, *, details: Optional[Any] = None):
        super().__init__(message)
        self.message = message
        self.details = details


class ArgumentError(GraphToolkitError):
    """Bad vertex id, parameter out of range, or an unusable size."""

    exit_code = 2


class GraphParseError(ArgumentError):
    """Malformed edge-list input."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class SizeLimitError(ArgumentError):
    """Instance exceeds a configured brute-force cap."""


class GraphIOError(GraphToolkitError):
    exit_code = 3


class PreconditionError(GraphToolkitError):
    """A domain precondition of an operation does not hold.

    `details` may carry the MembershipReport explaining why an input graph
    is not a member of F(d, m).
    """

    exit_code = 4


class InternalInvariantError(GraphToolkitError):
    """A property guaranteed by theory failed; indicates a bug upstream."""

    exit_code = 5
