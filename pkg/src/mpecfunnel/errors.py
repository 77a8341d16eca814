"""Exception types raised by the solver and its components."""


class MpecError(Exception):
    """Base class for all package errors."""


class NonFiniteValue(MpecError, ArithmeticError):
    """An evaluator returned NaN or inf."""


class ParseError(MpecError, ValueError):
    """A problem or config document could not be parsed.

    ``locus`` names the offending line or field when known.
    """

    def __init__(self, message, locus=None):
        self.locus = locus
        if locus is not None:
            message = f"{locus}: {message}"
        super().__init__(message)


class DimensionMismatch(MpecError, ValueError):
    pass


class UnknownProblem(MpecError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown problem"


class ConfigError(MpecError, ValueError):
    """A configuration parameter is outside its admissible range."""


class QpError(MpecError):
    pass


class Infeasible(QpError):
    """The linear constraints of a QP admit no feasible point.

    ``violation`` is the minimum total violation found by phase 1.
    """

    def __init__(self, message, violation=None):
        self.violation = violation
        super().__init__(message)


class MaxIterations(QpError):
    pass


class NumericalBreakdown(QpError, ArithmeticError):
    pass


class RestorationFailure(MpecError):
    """Restoration stopped without reaching its infeasibility target."""

    def __init__(self, message, report=None):
        self.report = report
        super().__init__(message)
