class DomainError(ValueError):
    """Input outside the domain of an operation (point outside the ball, bad lambda3, ...)."""


class NumericError(RuntimeError):
    """An integrator or finite-difference step could not produce a trustworthy value."""


class FocalPointError(NumericError):
    """The displacement map drops rank on the sampled grid."""

    def __init__(self, message, params=None, singular_values=None):
        super().__init__(message)
        self.params = params
        self.singular_values = singular_values


class NotApplicable(ValueError):
    """A check whose preconditions (eigenvalue structure) are not met by the data."""
