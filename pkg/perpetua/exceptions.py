from typing import Union, Type, Tuple


ExceptionType = Union[Type[Exception], Tuple[Type[Exception]]]


class PerpetuaError(Exception):
    """Base class of the package errors.

    :param msg: An error message, list of error messages, or dict of
        error messages.
    :param detail: A `LoadResult`, an `IntegralResult`, or any information
        about the error detail.
    """

    def __init__(self, msg, detail=None):
        super().__init__()
        self.msg = msg
        self.detail = detail

    def __repr__(self):
        return f'{self.__class__.__name__}({self.msg!r})'

    def __str__(self):
        return str(self.msg)


class ValidationError(PerpetuaError):
    """Raised when a measure, a characteristic triplet, a config document
    or an argument is malformed.
    """


class NumericError(PerpetuaError):
    """Raised when a computation leaves the numeric policy: an exponent that
    is infinite on the whole search range, a Monte Carlo batch in which every
    sample overflowed, or a degenerate estimator.
    """
