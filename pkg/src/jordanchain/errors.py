"""Exception hierarchy shared by all modules.

Every error carries the CLI exit code it maps to: 2 for bad input,
3 for numerical failure.
"""


class JordanChainError(Exception):
    exit_code = 3


class ValidationError(JordanChainError, ValueError):
    exit_code = 2


class NumericalFailure(JordanChainError, ArithmeticError):
    exit_code = 3


# numerics
class SubdivisionLimit(NumericalFailure):
    pass


class NonFinite(NumericalFailure):
    pass


class NonDecayingIntegrand(ValidationError):
    pass


class SingularJacobian(NumericalFailure):
    pass


class NoConvergence(NumericalFailure):
    pass


class OrderUnsupported(ValidationError):
    pass


class InsufficientData(ValidationError):
    pass


class NonPositiveSample(ValidationError):
    pass


# potential
class NonMonotoneDatum(ValidationError):
    pass


class FitResidualTooLarge(NumericalFailure):
    pass


# hodograph / singularity
class RegularSectorViolated(NumericalFailure):
    pass


class OrderMismatch(NumericalFailure):
    pass


class Degenerate(NumericalFailure):
    pass


# jordan
class CflViolation(ValidationError):
    pass


class BlowupDetected(NumericalFailure):
    pass


# distributions
class DiracPointwiseEval(ValidationError):
    pass


class DomainViolation(ValidationError):
    pass


# reductions
class PsiNonPositive(NumericalFailure):
    pass


class RouteMismatch(NumericalFailure):
    pass


class MeanAmbiguity(ValidationError):
    pass


class NonUniqueBranch(ValidationError):
    pass


class AlgebraicBranchAmbiguity(ValidationError):
    pass
