import math
from typing import Dict, Iterable, Callable

from .exceptions import ValidationError
from .utils import ErrorMessageMixin, NEG_INF, bind_attrs


class Validator:
    """Check whether value is valid.

    :param validate: A callable to check the value.
        If the value is valid, return True, else False.
    :param error_message: Error message to raise if invalid.
        Can be interpolated with `{self}` and `{value}`.
    """
    error_cls = ValidationError
    error_message = 'Invalid value.'

    def __init__(self, validate: Callable = None, error_message: str = None):
        bind_attrs(self, validate=validate, error_message=error_message)

    def validate(self, value):
        """If the value is valid, return True, else False."""
        return value

    def __call__(self, value):
        if not self.validate(value):
            raise self.error_cls(self.error_message.format(self=self, value=value))


class MemberValidator(Validator):
    """Valid if the value is a member of `choices`.

    :param choices: A collection of valid values.
    """
    error_message = 'Must be one of {self.choices}.'

    def __init__(self, choices: Iterable, error_message: str = None):
        self.choices = choices
        super().__init__(None, error_message)

    def validate(self, value):
        return value in self.choices


class RangeValidator(ErrorMessageMixin, Validator):
    """Check the value against `minimum` and `maximum`.

    :param minimum: Lower bound, and `None` is equal to -∞.
    :param maximum: Upper bound, and `None` is equal to +∞.
    :param exclusive_minimum: Require ``value > minimum`` instead of ``>=``.
        Rates, exponents and horizons are strictly positive.
    :param exclusive_maximum: Require ``value < maximum``.
    :param error_messages: Keys {'too_small', 'too_large', 'not_between'}.
    """
    error_messages = {
        'too_small': 'Value must be {self.lower_op} {self.minimum}.',
        'too_large': 'Value must be {self.upper_op} {self.maximum}.',
        'not_between': 'Value must be between {self.minimum} and {self.maximum}.',
    }

    def __init__(
            self, minimum=None, maximum=None,
            exclusive_minimum: bool = False, exclusive_maximum: bool = False,
            error_messages: Dict[str, str] = None):
        if minimum is not None and maximum is not None and minimum > maximum:
            raise ValueError('"minimum" cannot be greater than "maximum".')
        self.minimum = minimum
        self.maximum = maximum
        self.exclusive_minimum = exclusive_minimum
        self.exclusive_maximum = exclusive_maximum
        self.lower_op = '>' if exclusive_minimum else '>='
        self.upper_op = '<' if exclusive_maximum else '<='
        self.collect_error_messages(error_messages)

        if minimum is not None and maximum is None:
            error_message = self.error_messages['too_small']
        elif minimum is None and maximum is not None:
            error_message = self.error_messages['too_large']
        else:
            error_message = self.error_messages['not_between']
        super().__init__(None, error_message)

    def validate(self, value):
        if math.isnan(value):
            return False
        if self.minimum is not None:
            if value < self.minimum or (self.exclusive_minimum and value == self.minimum):
                return False
        if self.maximum is not None:
            if value > self.maximum or (self.exclusive_maximum and value == self.maximum):
                return False
        return True


class NonZeroValidator(Validator):
    """Lévy measures carry no mass at the origin."""
    error_message = 'Value may not be 0.'

    def validate(self, value):
        return value != 0


class NonIncreasingValidator(Validator):
    """Check that a sequence is non-increasing, `NEG_INF` entries being
    smaller than every real number. An empty sequence is invalid.
    """
    error_message = 'Sequence must be non-empty and non-increasing, not {value}.'

    def validate(self, value):
        if not value:
            return False
        previous = math.inf
        for entry in value:
            current = -math.inf if entry is NEG_INF else entry
            if current > previous:
                return False
            previous = current
        return True


# Aliases
Assert = Validator
Range = RangeValidator
OneOf = MemberValidator
NonZero = NonZeroValidator
NonIncreasing = NonIncreasingValidator
