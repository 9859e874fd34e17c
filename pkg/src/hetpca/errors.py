"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested operation."""


class HypothesisViolation(ValueError):
    """A limit was requested outside the regime in which it holds."""


class InvariantError(RuntimeError):
    """An internal numerical guarantee failed; indicates a bug or extreme inputs."""
