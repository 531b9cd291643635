"""Exception hierarchy shared by every module."""


class MoranError(Exception):
    """Base class for all package errors."""


class ModelValidationError(MoranError, ValueError):
    """A model document or object violates a model constraint.

    ``violations`` holds one human-readable line per failed check.
    """

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class SchemaError(ModelValidationError):
    """A model document is malformed or has missing/ill-typed fields."""


class PreconditionError(MoranError, ValueError):
    """An operation was called outside its documented domain."""


class EnumerationCapError(PreconditionError):
    """Selector enumeration would exceed the configured cap."""

    def __init__(self, count, cap):
        super().__init__(
            f"selector enumeration needs {count} selectors, above the cap of {cap}; "
            "use method='bisect' instead"
        )
        self.count = count
        self.cap = cap


class ConsistencyError(MoranError, RuntimeError):
    """Two independent computations of the same quantity disagree."""
