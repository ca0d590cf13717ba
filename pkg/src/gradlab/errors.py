"""Exceptions shared across the toolkit.

The command line maps these to exit codes: ResourceExhausted -> 2,
InvariantViolation -> 3.  Everything else is an ordinary error.
"""


class GradlabError(Exception):
    pass


class ResourceExhausted(GradlabError):
    """A computation hit a configured ceiling (cosets, search nodes, group order)."""

    def __init__(self, message, limit=None, reached=None):
        super().__init__(message)
        self.limit = limit
        self.reached = reached


class InvariantViolation(GradlabError):
    """An internal consistency check failed.

    These are raised when two pipelines that must agree do not, or when a
    certified identity fails.  They indicate a bug, never bad user input.
    """
