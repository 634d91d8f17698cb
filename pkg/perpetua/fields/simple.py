from .base import Field


class StringField(Field):
    """String Field. Non-string JSON values are rejected."""
    error_messages = {
        'type': 'Not a valid string: {value!r}.',
        'in': 'Must be one of {self.choices}.',
    }

    def __init__(self, choices=None, **kwargs):
        self.choices = tuple(choices) if choices else None
        super().__init__(in_=self.choices, **kwargs)

    def parse(self, value):
        if not isinstance(value, str):
            raise self.error('type', value=value)
        return value


class BooleanField(Field):
    """Boolean field. Only JSON ``true``/``false`` are accepted."""
    error_messages = {
        'type': 'Not a valid boolean: {value!r}.',
    }

    def parse(self, value):
        if not isinstance(value, bool):
            raise self.error('type', value=value)
        return value
