"""Exception types; the CLI maps them to exit codes."""


class NormalFormError(Exception):
    """Base class for failures reported by this package."""


class ValidationFailure(NormalFormError):
    """Input is well formed but does not meet a mathematical precondition."""


class NotNormalizable(ValidationFailure):
    pass


class PerturbationViolation(ValidationFailure):
    def __init__(self, monomials):
        self.monomials = list(monomials)
        super().__init__(f"weight < 3 deviation from the model at {self.monomials[:10]}")


class DistinguishedPartError(ValidationFailure):
    pass


class DecompositionFailure(NormalFormError):
    """A per-weight linear system was inconsistent or not uniquely solvable."""


class TriangularityBreach(NormalFormError):
    pass


class SchemaError(NormalFormError):
    """Input does not parse against the JSON schema."""
