"""Exception hierarchy.

Two broad classes matter to callers: domain/validation problems (bad
inputs, regions outside a model's reach) and numerical failures (a
bracket that should exist per the underlying theory but was not found,
a singular design where an invertible one is required).  The CLI maps
the former to exit code 1 and the latter to exit code 2.
"""


class DomainError(ValueError):
    """Input outside the mathematically valid range of an operation."""


class DocumentError(DomainError):
    """A design document failed to parse or validate."""


class UnclassifiableRegionError(DomainError):
    """Region spans a breakpoint; no single reduction theorem applies."""


class NumericalError(RuntimeError):
    """A numerical procedure failed in a way theory says it should not."""


class BracketError(NumericalError):
    """Root bracketing failed; usually signals a type misclassification."""


class SingularDesignError(NumericalError):
    """Operation requires a nonsingular information matrix."""
