class HyperbitError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(HyperbitError, ValueError):
    """An object violates one of its structural invariants."""


class DimensionMismatchError(ValidationError):
    pass


class ResourceLimitError(HyperbitError):
    """A requested size exceeds the configured desk-scale limits."""


class UnknownInputError(HyperbitError, KeyError):
    pass


class PostprocessingInfeasibleError(HyperbitError):
    """No affine postprocessing with |c| + |c'| <= 1 reproduces the protocol."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class UnsupportedFormError(HyperbitError):
    pass
