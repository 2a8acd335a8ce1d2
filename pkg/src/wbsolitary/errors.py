"""Exception hierarchy shared by the solver modules."""


class WBError(Exception):
    """Base class for all package errors."""


class ConfigurationError(WBError, ValueError):
    """Invalid user-facing configuration (symbol name, exponents, ladder...)."""


class ContractViolation(WBError, ValueError):
    """An operation was called outside its precondition."""


class DegenerateSymbolError(WBError):
    pass


class InvalidSymbolError(WBError):
    def __init__(self, name, failures):
        self.failures = failures
        super().__init__(f"symbol {name!r} fails admissibility: {', '.join(failures)}")


class AmplitudeError(WBError, ValueError):
    """The field leaves the region where sqrt(1 + w) is well conditioned."""

    def __init__(self, max_abs, min_value, message=None):
        self.max_abs = float(max_abs)
        self.min_value = float(min_value)
        super().__init__(
            message
            or f"amplitude guard violated: max|w| = {self.max_abs:.6g}, min w = {self.min_value:.6g}"
        )


class DomainError(WBError, ValueError):
    pass


class SupportError(WBError, ValueError):
    """A profile does not fit inside its window with the required standoff."""

    def __init__(self, message, standoff=None):
        self.standoff = standoff
        super().__init__(message)


class ProjectionError(WBError, ValueError):
    pass


class AdmissibilityError(WBError):
    """A field lies outside the admissible H^1 ball."""

    def __init__(self, message, h1_sq=None):
        self.h1_sq = h1_sq
        super().__init__(message)


class BoundaryMinimizerError(WBError):
    """Converged with the penalty active, i.e. not an interior minimizer."""

    def __init__(self, message, result=None):
        self.result = result
        super().__init__(message)


class NonWaveMultiplierError(WBError):
    def __init__(self, lam, result=None):
        self.lam = lam
        self.result = result
        super().__init__(f"Lagrange multiplier {lam:.6g} <= 0; wave speed undefined")


class NonConvergenceError(WBError):
    def __init__(self, message, history=None, result=None):
        self.history = list(history or [])
        self.result = result
        super().__init__(message)
