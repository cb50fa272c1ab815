"""Exception types shared across the package.

The CLI maps these onto its exit-code contract: usage and domain
problems exit 2, computation failures exit 1.
"""


class DomainError(ValueError):
    """An argument is outside an operation's documented precondition."""


class UsageError(ValueError):
    """A malformed command, flag, or config field."""


class ComputationError(RuntimeError):
    """A numerical procedure failed (bracket lost, divergent integral)."""


class UnsupportedSpecError(NotImplementedError):
    """The distribution spec lacks a closed form needed by the operation."""
