import math
from typing import Iterable, Mapping, Callable as CallableType

from ..base import SchemaABC
from ..utils import BaseResult, NEG_INF, bind_attrs
from ..validators import NonIncreasingValidator
from ..exceptions import ValidationError, ExceptionType

from .base import Field
from .number import FloatField


def _process_many(
        data: Iterable,
        all_errors: bool,
        process_one: CallableType,
        except_exception: ExceptionType):
    """Apply `process_one` to every item, collecting errors by index."""
    valid_data, errors, invalid_data = [], {}, {}
    for i, item in enumerate(data):
        try:
            valid_data.append(process_one(item))
        except except_exception as e:
            if isinstance(e, ValidationError) and isinstance(e.detail, BaseResult):
                # distribute nested data in BaseResult
                valid_data.append(e.detail.valid_data)
                errors[i] = e.detail.errors
                invalid_data[i] = e.detail.invalid_data
            else:
                errors[i] = e
                invalid_data[i] = item
            if not all_errors:
                break
    if errors:
        result = BaseResult(valid_data, errors, invalid_data)
        raise ValidationError(msg=result.format_errors(), detail=result)
    return valid_data


class ListField(Field):
    """List field, handle list elements with another `Field`.
    Loaded lists are returned as tuples so loaded configs stay hashable
    and immutable.

    :param item_field: A `Field` instance.
    :param min_length: The minimum length of the list.
    :param max_length: The maximum length of the list.
    :param all_errors: Whether to collect errors for every list elements.
    """
    item_field: Field = None
    all_errors = True
    except_exception = Exception
    error_messages = {
        'type': 'Not a valid list: {value!r}.',
        'length': 'Length must be between {minimum} and {maximum}.',
    }

    def __init__(
            self,
            item_field: Field = None,
            min_length: int = None,
            max_length: int = None,
            all_errors: bool = None,
            **kwargs):
        super().__init__(**kwargs)
        bind_attrs(self, item_field=item_field, all_errors=all_errors)
        self.min_length = min_length
        self.max_length = max_length

        item_field = self.item_field
        if not isinstance(item_field, Field):
            raise TypeError(f'Argument "item_field" must be a Field instance, not "{item_field}".')
        self.format_item = getattr(item_field, 'dump')
        self.parse_item = getattr(item_field, 'load')

    def check_length(self, value):
        length = len(value)
        too_small = self.min_length is not None and length < self.min_length
        too_large = self.max_length is not None and length > self.max_length
        if too_small or too_large:
            raise self.error('length', minimum=self.min_length, maximum=self.max_length)

    def format(self, value):
        return _process_many(value, self.all_errors, self.format_item, self.except_exception)

    def parse(self, value):
        if isinstance(value, (str, bytes, Mapping)) or not isinstance(value, Iterable):
            raise self.error('type', value=value)
        value = list(value)
        self.check_length(value)
        return tuple(_process_many(value, self.all_errors, self.parse_item, self.except_exception))


class PairField(ListField):
    """Fixed-arity array such as ``[location, mass]`` or ``[x, y, rate]``.
    Each position has its own field.

    :param item_fields: One `Field` per position.
    """

    def __init__(self, *item_fields: Field, **kwargs):
        self.item_fields = item_fields
        super().__init__(
            item_field=item_fields[0],
            min_length=len(item_fields),
            max_length=len(item_fields),
            **kwargs)

    def format(self, value):
        return [field.dump(item) for field, item in zip(self.item_fields, value)]

    def parse(self, value):
        if isinstance(value, (str, bytes, Mapping)) or not isinstance(value, Iterable):
            raise self.error('type', value=value)
        value = list(value)
        self.check_length(value)
        items = iter(self.item_fields)
        return tuple(_process_many(
            value, self.all_errors,
            lambda item: next(items).load(item),
            self.except_exception))


class SequenceField(ListField):
    """Branching sequence ``x1 >= x2 >= ...`` padded with ``"-inf"``.
    The token is loaded as the `NEG_INF` sentinel and dumped back as
    ``"-inf"``; no finite stand-in is ever produced.
    """
    item_field = FloatField()
    validators = [NonIncreasingValidator()]

    def parse(self, value):
        if isinstance(value, (str, bytes, Mapping)) or not isinstance(value, Iterable):
            raise self.error('type', value=value)
        value = list(value)
        self.check_length(value)

        def parse_entry(entry):
            if entry == NEG_INF.token:
                return NEG_INF
            if isinstance(entry, float) and math.isinf(entry) and entry < 0:
                return NEG_INF
            return self.parse_item(entry)

        return tuple(_process_many(value, self.all_errors, parse_entry, self.except_exception))

    def format(self, value):
        return [NEG_INF.token if entry is NEG_INF else float(entry) for entry in value]


class NestedField(Field):
    """Nested field, handle one or more objects with a `Schema`.

    :param schema: A `Schema` instance.
    :param many: Whether to process a list of objects.
    """
    schema: SchemaABC = None
    many = False
    error_messages = {
        'type': 'Not a valid list: {value!r}.',
    }

    def __init__(self, schema: SchemaABC = None, many: bool = None, **kwargs):
        super().__init__(**kwargs)
        bind_attrs(self, schema=schema, many=many)

        schema = self.schema
        if not isinstance(schema, SchemaABC):
            raise TypeError(f'Argument "schema" must be a Schema instance, not "{schema}".')

    def format(self, value):
        if self.many:
            return [self.schema.dump(item, raise_error=True).valid_data for item in value]
        return self.schema.dump(value, raise_error=True).valid_data

    def parse(self, value):
        if self.many:
            if isinstance(value, (str, bytes, Mapping)) or not isinstance(value, Iterable):
                raise self.error('type', value=value)
            return tuple(_process_many(
                value, True,
                lambda item: self.schema.load(item, raise_error=True).valid_data,
                Exception))
        return self.schema.load(value, raise_error=True).valid_data


class TaggedField(Field):
    """Tagged union of schemas, dispatched on a tag key of the document
    (``{"kind": "levy", ...}``). Dumping asks each schema's ``model_type``
    whether the object belongs to it.

    :param schemas: Mapping of tag to `Schema` instance.
    :param tag: The discriminating key.
    """
    tag = 'kind'
    error_messages = {
        'type': 'Not a valid object: {value!r}.',
        'tag': '"{tag}" must be one of {choices}, not {value!r}.',
        'dump': 'No schema for object {value!r}.',
    }

    def __init__(self, schemas: Mapping[str, SchemaABC], tag: str = None, **kwargs):
        super().__init__(**kwargs)
        bind_attrs(self, tag=tag)
        self.schemas = dict(schemas)

    def parse(self, value):
        if not isinstance(value, Mapping):
            raise self.error('type', value=value)
        kind = value.get(self.tag)
        if kind not in self.schemas:
            raise self.error('tag', tag=self.tag, choices=sorted(self.schemas), value=kind)
        data = {k: v for k, v in value.items() if k != self.tag}
        return self.schemas[kind].load(data, raise_error=True).valid_data

    def format(self, value):
        for kind, schema in self.schemas.items():
            if isinstance(value, schema.model_type):
                data = {self.tag: kind}
                data.update(schema.dump(value, raise_error=True).valid_data)
                return data
        raise self.error('dump', value=value)
