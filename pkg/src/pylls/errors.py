# -*- coding: utf-8 -*-
"""
Exceptions raised by Pylls.

Validation problems (bad shapes, bad parameters, malformed files) derive from
:class:`ValidationError`, which is also a :class:`ValueError`. Numerical
breakdowns derive from :class:`NumericalError`, which is also an
:class:`ArithmeticError`.
"""

__all__ = [
    "PyllsError",
    "ValidationError",
    "NumericalError",
    "ShapeMismatch",
    "InvalidInput",
    "DegenerateInput",
    "ZeroColumn",
    "ZeroRow",
    "InvalidRank",
    "EmptyDomain",
    "InsufficientDistinctPoints",
    "OutOfSupport",
    "ConfigError",
    "DatasetParseError",
    "RankDeficient",
    "AnchorDeficient",
    "UndefinedPosterior",
    "TrainingDiverged",
    "GenerationBudgetExceeded",
    "StageError",
    "NMFConvergenceWarning",
    "PosteriorClippingWarning",
]


class PyllsError(Exception):
    """Base class of all Pylls errors"""


class ValidationError(PyllsError, ValueError):
    """Invalid input to a Pylls operation"""


class NumericalError(PyllsError, ArithmeticError):
    """A numerical procedure could not produce a valid result"""


class ShapeMismatch(ValidationError):
    pass


class InvalidInput(ValidationError):
    pass


class DegenerateInput(ValidationError):
    pass


class ZeroColumn(ValidationError):
    """A column that must have positive sum is all zero"""

    def __init__(self, index):
        self.index = index
        super().__init__(f"column {index} has zero sum")


class ZeroRow(ValidationError):
    """A row that must have positive sum is all zero"""

    def __init__(self, index):
        self.index = index
        super().__init__(f"row {index} has zero sum")


class InvalidRank(ValidationError):
    pass


class EmptyDomain(ValidationError):
    """A domain has no records"""

    def __init__(self, domain):
        self.domain = domain
        super().__init__(f"domain {domain} has no records")


class InsufficientDistinctPoints(ValidationError):
    pass


class OutOfSupport(ValidationError):
    pass


class ConfigError(ValidationError):
    """Invalid run configuration

    Attributes
    ----------
    key : str
        Dotted path of the offending key, if known.
    """

    def __init__(self, message, key=None):
        self.key = key
        if key is not None:
            message = f"{key}: {message}"
        super().__init__(message)


class DatasetParseError(ValidationError):
    """Malformed dataset file

    Attributes
    ----------
    line : int
        1-based line number in the file (the header is line 1).
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class RankDeficient(NumericalError):
    pass


class AnchorDeficient(NumericalError):
    pass


class UndefinedPosterior(NumericalError):
    pass


class TrainingDiverged(NumericalError):
    """Non-finite loss during training"""

    def __init__(self, epoch, loss=None):
        self.epoch = epoch
        self.loss = loss
        super().__init__(f"training diverged at epoch {epoch} (loss={loss})")


class GenerationBudgetExceeded(PyllsError):
    """Rejection sampling or layout construction gave up

    Attributes
    ----------
    attempts : int
        Number of attempts made.
    best_condition : float
        Smallest condition number seen, if applicable.
    """

    def __init__(self, message, attempts=None, best_condition=None):
        self.attempts = attempts
        self.best_condition = best_condition
        super().__init__(message)


class StageError(PyllsError):
    """Failure inside a named pipeline stage"""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")


class NMFConvergenceWarning(UserWarning):
    pass


class PosteriorClippingWarning(UserWarning):
    pass
