"""Exception taxonomy.

Structural and argument errors are bugs in the caller's input. Contract
failures (reconstruction, decoding, bootstrap, statistical) are expected
outcomes of randomized procedures and carry a diagnostics payload.
"""


class ArgumentError(ValueError):
    pass


class CapacityError(ValueError):
    """A desk-scale guardrail was hit."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class StructuralError(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    pass


class ContractFailure(RuntimeError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class ReconstructionFailure(ContractFailure):
    pass


class DecodingFailure(ContractFailure):
    pass


class BootstrapFailure(ContractFailure):
    def __init__(self, message, arity=None, diagnostics=None):
        super().__init__(message, diagnostics)
        self.arity = arity


class StatisticalFailure(ContractFailure):
    pass


class LearnerFailure(ContractFailure):
    pass


class CompressionRejected(ContractFailure):
    """The learned hypothesis was too far from the table to patch."""
