"""Exception hierarchy shared across the package."""


class ExitsimError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(ExitsimError, ValueError):
    """A domain object violates one of its invariants."""


class DataError(ExitsimError, ValueError):
    """Malformed or unusable input data."""


class MalformedHeaderError(DataError):
    pass


class MalformedDateError(DataError):
    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


class AllMissingError(DataError):
    pass


class CountryMismatchError(DataError):
    def __init__(self, message, missing=()):
        super().__init__(message)
        self.missing = tuple(missing)


class TooFewRegionsError(DataError):
    pass


class DegenerateDataError(DataError):
    pass


class NumericalError(ExitsimError, ArithmeticError):
    """A numerical procedure failed (divergence, non-finite state, ...)."""


class NonFiniteStateError(NumericalError):
    pass


class FitFailureError(NumericalError):
    pass


class DivergenceError(NumericalError):
    pass


class SingularDesignError(NumericalError):
    pass


class AllTiesError(DataError):
    pass


class TooManyFeaturesError(ExitsimError, ValueError):
    pass
