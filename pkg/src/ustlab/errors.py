"""Exception types shared across the package."""


class ResourceLimitError(RuntimeError):
    """A configured size budget (vertices, edges, tree count, ...) was exceeded."""


class StepBudgetExceeded(RuntimeError):
    """A sampler ran out of its step budget before its stopping rule fired."""


class SpecValidationError(ValueError):
    """An experiment spec document failed schema validation.

    ``field`` holds a dotted path to the offending field when known.
    """

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)
