"""Shared exception types.

Every operation that can fail does so with one of these; nothing in the
library raises a bare ValueError for a domain-level problem.
"""


class RzcellError(Exception):
    """Base class for all library errors."""


class DomainError(RzcellError):
    """Input violates a documented precondition."""


class NotGroupLike(RzcellError):
    """A weighted lattice violates the group-scheme axioms mid-computation."""


class DepthExhausted(RzcellError):
    """A tower is too shallow to certify the requested quantity."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class PrecisionError(RzcellError):
    """p-adic working precision exhausted; rerun with a larger modulus."""


class StateError(RzcellError):
    """Operation applied to an object in the wrong state."""


class Exceeds(RzcellError):
    """A resource cap (radius, count, coset depth) was hit."""

    def __init__(self, cap, message=None, partial=None):
        super().__init__(message or f"cap {cap} exceeded")
        self.cap = cap
        self.partial = partial
