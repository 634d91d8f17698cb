import math
import numbers

from ..utils import copy_keys, bind_attrs
from ..validators import RangeValidator

from .base import Field


class NumberField(Field):
    """Base class for number fields. JSON strings are not coerced: a quoted
    number in a config is almost always a mistake.

    :param minimum: Lower bound, and `None` is equal to -∞.
    :param maximum: Upper bound, and `None` is equal to +∞.
    :param exclusive_minimum: Require ``value > minimum``.
    :param exclusive_maximum: Require ``value < maximum``.
    :param error_messages: Keys {'too_small', 'too_large', 'not_between', 'type', ...}.
    """
    obj_type = float
    error_messages = {
        'type': 'Not a valid number: {value!r}.',
    }

    def __init__(
            self, minimum=None, maximum=None,
            exclusive_minimum: bool = False, exclusive_maximum: bool = False,
            **kwargs):
        super().__init__(**kwargs)
        self.minimum = minimum
        self.maximum = maximum

        if minimum is not None or maximum is not None:
            msg_dict = copy_keys(self.error_messages, ('too_small', 'too_large', 'not_between'))
            self.add_validator(RangeValidator(
                minimum, maximum, exclusive_minimum, exclusive_maximum, msg_dict))

    def check_type(self, value):
        if isinstance(value, bool) or not isinstance(value, numbers.Real):
            raise self.error('type', value=value)

    def format(self, value):
        return self.obj_type(value)

    def parse(self, value):
        self.check_type(value)
        return self.obj_type(value)


class IntegerField(NumberField):
    """Integer field. Floats with an integral value (``1e4``) are accepted."""
    obj_type = int
    error_messages = {
        'type': 'Not a valid integer: {value!r}.',
    }

    def parse(self, value):
        self.check_type(value)
        if isinstance(value, float) and not value.is_integer():
            raise self.error('type', value=value)
        return int(value)


class FloatField(NumberField):
    """Finite float field.

    :param allow_infinite: Whether ``inf``/``-inf`` are valid values.
    """
    obj_type = float
    allow_infinite = False
    error_messages = {
        'finite': 'Value must be finite.',
    }

    def __init__(self, allow_infinite: bool = None, **kwargs):
        super().__init__(**kwargs)
        bind_attrs(self, allow_infinite=allow_infinite)

    def parse(self, value):
        value = super().parse(value)
        if math.isnan(value) or (math.isinf(value) and not self.allow_infinite):
            raise self.error('finite')
        return value


class ExtendedFloatField(FloatField):
    """Float field on the extended real line. JSON has no infinity, so
    ``"inf"`` and ``"-inf"`` are read as tokens and written back as tokens.
    """
    allow_infinite = True
    tokens = {'inf': math.inf, '+inf': math.inf, '-inf': -math.inf}

    def parse(self, value):
        if isinstance(value, str):
            if value not in self.tokens:
                raise self.error('type', value=value)
            return self.tokens[value]
        return super().parse(value)

    def format(self, value):
        value = float(value)
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return value
