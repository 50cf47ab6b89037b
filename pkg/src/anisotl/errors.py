class InvalidInput(ValueError):
    pass


class InvalidState(RuntimeError):
    pass


class InvalidCombination(ValueError):
    """Raised when an option is not supported for the given inputs (e.g. exact method on an implicit sequence)."""


class CapacityError(RuntimeError):
    """A size budget was exceeded; callers may fall back to a cheaper method."""


class IndeterminateError(RuntimeError):
    """A numerical test could not reach a verdict within its configured limits."""


class NotFound(LookupError):
    pass
