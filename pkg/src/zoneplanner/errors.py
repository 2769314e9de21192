"""Exception types shared across the engine."""


class ZonePlannerError(Exception):
    """Base class for all engine errors."""


class DomainError(ZonePlannerError):
    """An argument is outside the mathematical domain of an operation."""


class DegenerateCellError(DomainError):
    """A split point lies on a zone boundary, producing a zero-area cell."""


class UnresolvableIntrusionError(ZonePlannerError):
    """No conflict-free bearing exists within a half-turn in either direction."""


class OccupiedCellError(ZonePlannerError):
    """The target cell already holds a window."""


class IntrusionError(ZonePlannerError):
    """The operation would place a window over an occlusion-free region."""


class PendingProposalError(ZonePlannerError):
    """A recommendation is already pending for this workspace."""


class InstanceTooLargeError(ZonePlannerError):
    """The exhaustive engine refused an instance above its evaluation budget."""


class ProviderError(ZonePlannerError):
    """The language-model provider timed out or returned unusable output."""


class ValidationError(ZonePlannerError):
    """A document or state snapshot violates its schema or invariants.

    ``diagnostics`` carries field-level messages for API error responses.
    """

    def __init__(self, message: str, diagnostics: list[str] | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or []
