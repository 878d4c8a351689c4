"""Exception hierarchy shared across the package.

Every error that can surface through the CLI carries a short machine-readable
``code`` string that is printed to stderr and mapped to the exit status.
"""


class StochlabError(Exception):
    """Base class for all package errors."""

    code = "error"


class ParseError(StochlabError):
    code = "parse"


class DataError(StochlabError):
    code = "data"


class ParameterError(StochlabError):
    code = "parameter"


class DomainError(StochlabError):
    code = "domain"


class ExtrapolationError(DomainError):
    code = "extrapolation"


class EvaluationError(StochlabError):
    code = "evaluation"


class DivergenceError(StochlabError):
    code = "divergence"

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class SingularityError(StochlabError):
    code = "singularity"


class IdentifiabilityError(StochlabError):
    code = "identifiability"


class FitError(StochlabError):
    code = "fit"

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class SizeCapError(StochlabError):
    code = "size-cap"


class UndefinedIndexError(StochlabError):
    code = "undefined-index"
