"""Exception hierarchy shared by every module in the package."""


class DiracError(Exception):
    """Base class for all errors raised by sdf_dirac."""


class ValidationError(DiracError, ValueError):
    """One or more problem parameters violate their constraints.

    ``problems`` lists every violated constraint, not just the first.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class NonPositiveParameter(ValidationError):
    pass


class InvalidKappa(ValidationError):
    pass


class DomainError(DiracError, ValueError):
    pass


class ParameterOutOfRange(DiracError, ValueError):
    pass


class EmptyWindow(DiracError):
    pass


class NoRootFound(DiracError):
    def __init__(self, message, windows=()):
        self.windows = list(windows)
        super().__init__(message)


class AmbiguousRoot(DiracError):
    pass


class NonNormalizable(DiracError):
    pass


class EnergyDegenerateDenominator(DiracError, ZeroDivisionError):
    pass


class NonConvergentTail(DiracError):
    pass


class ZeroNorm(NonConvergentTail):
    pass


class NoValidBranch(DiracError):
    pass


class NoSignChange(DiracError):
    pass


class StiffnessFailure(DiracError):
    pass
