"""Exception hierarchy shared across the package.

Two broad families matter operationally: ``InputDataError`` (bad or missing
input, CLI exit code 2) and ``AnalysisError`` (the data parsed but the
analysis cannot proceed, CLI exit code 1).
"""


class HubfairError(Exception):
    """Base class for all package errors."""


class InputDataError(HubfairError):
    """Malformed, inconsistent, or missing input data."""


class AnalysisError(HubfairError):
    """A modeling or diagnostic step failed on otherwise valid data."""


class RankDeficientError(AnalysisError):
    """Design matrix is not full column rank."""

    def __init__(self, message, dependent_columns=()):
        super().__init__(message)
        self.dependent_columns = tuple(dependent_columns)


class ConvergenceError(AnalysisError):
    """Iterative fit failed to converge; carries the last iterate."""

    def __init__(self, message, last_beta=None, iterations=0):
        super().__init__(message)
        self.last_beta = last_beta
        self.iterations = iterations


class CollinearityError(AnalysisError):
    """Collinearity screening failed or the predictor set is singular."""

    def __init__(self, message, columns=()):
        super().__init__(message)
        self.columns = tuple(columns)


class PhaseDetectionError(AnalysisError):
    """Automatic phase demarcation could not find enough valleys."""


class UndefinedRatioError(AnalysisError):
    """A ratio metric has a zero or empty denominator group."""
