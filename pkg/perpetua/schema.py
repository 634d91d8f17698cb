"""Schema class and its metaclass."""

import inspect
from collections import namedtuple
from typing import Iterable, Callable, Any, Mapping
from functools import wraps, partial

from .base import SchemaABC
from .fields import BaseField, FieldDict, Field
from .groups import FieldGroup
from .exceptions import ValidationError, ExceptionType
from .utils import (
    missing, assign_attr_or_item_getter, assign_item_getter,
    LoadResult, DumpResult, BaseResult, bind_attrs,
)


# type hints
PartialFields = namedtuple('PartialFields', [
    'field', 'source', 'target', 'required', 'default', 'field_method'])
PartialGroups = namedtuple('PartialGroups', [
    'group_method', 'error_key', 'source_target_pairs'])


def _override_fields(fields: FieldDict, attrs: dict):
    """Collect fields from dict, override fields and remove non fields."""
    for name, obj in attrs.items():
        if isinstance(obj, type) and issubclass(obj, BaseField):
            raise TypeError(
                f'Field for "{name}" must be declared as a Field instance, '
                f'not a class. Did you mean "{obj.__name__}()"?')

        if isinstance(obj, BaseField):
            fields[name] = obj
        elif name in fields:
            del fields[name]
    return fields


def _set_fields(cls, fields: FieldDict):
    """Generate `Field.name` and `Field.key` from the attribute name if unset,
    then inject fields into groups."""
    for name, field in fields.items():
        if field.name is None:
            field.name = name
        if field.key is None:
            field.key = name

    for field in fields.values():
        if isinstance(field, FieldGroup):
            field.set_fields(fields)

    cls.fields = fields


class SchemaMeta(type):
    """Metaclass for `Schema` class. Binds fields to `fields` attribute."""

    def __new__(mcs, name, bases, attrs):
        new_cls = super().__new__(mcs, name, bases, attrs)
        fields = {}
        for base in reversed(bases):
            if issubclass(base, SchemaABC):
                _override_fields(fields, base.fields)
        _override_fields(fields, attrs)
        _set_fields(new_cls, fields)
        return new_cls


class Schema(SchemaABC, metaclass=SchemaMeta):
    """Base Schema class for converting JSON documents to and from domain
    objects. ``load`` validates a document and ``post_load`` turns the
    valid data into the object named by `model_type`; ``dump`` reads the
    fields back from such an object.

    Some instantiation params can set default values by class variables.

    :param raise_error: Whether to raise error if error occurs when
        processing data. Errors are collected into a error dict, which key
        is field name, index of item of iterable or process name.
    :param all_errors: Whether to collect every errors of data and
        errors of process.
    :param forbid_unknown: Whether keys without a field are an error when
        loading. A misspelt option should not be silently ignored.
    :param except_exception: Which types of errors should be collected
        into process result.
    :param process_aliases: A dict which key is process name, and value
        is process alias used as the key in the error dict.
    """
    raise_error = False
    all_errors = True
    forbid_unknown = True
    except_exception: ExceptionType = Exception
    process_aliases = {}

    dump_required = True
    load_required = False
    dump_default = missing
    load_default = missing

    model_type: type = dict

    fields: FieldDict = {}

    error_messages = {
        'unknown': 'Unknown field.',
    }

    _assign_dump_getter = staticmethod(assign_attr_or_item_getter)
    _assign_load_getter = staticmethod(assign_item_getter)

    def __init__(
            self,
            raise_error: bool = None,
            all_errors: bool = None,
            forbid_unknown: bool = None,
            except_exception: ExceptionType = None,
            process_aliases: Mapping[str, str] = None):
        bind_attrs(
            self,
            raise_error=raise_error,
            all_errors=all_errors,
            forbid_unknown=forbid_unknown,
            except_exception=except_exception,
            process_aliases=process_aliases,
        )
        self._dump_fields = {k: v for k, v in self.fields.items() if not v.no_dump}
        self._load_fields = {k: v for k, v in self.fields.items() if not v.no_load}
        self._known_keys = {
            v.load_source for v in self._load_fields.values() if isinstance(v, Field)}

        self._do_dump = self._make_processor('dump')
        self._do_load = self._make_processor('load')

    @staticmethod
    def _process_one(
            data: Any,
            all_errors: bool,
            assign_getter: Callable,
            partial_fields: Iterable[PartialFields],
            partial_groups: Iterable[PartialGroups],
            except_exception: ExceptionType,
            unknown_keys: Callable):
        """Process one object using fields and schema options."""
        get_value = assign_getter(data)

        valid_data, errors, invalid_data = {}, {}, {}

        for key in unknown_keys(data):
            errors[key] = ValidationError(Schema.error_messages['unknown'])
            invalid_data[key] = data[key]
            if not all_errors:
                return valid_data, errors, invalid_data

        for field, source, target, required, default, field_method in partial_fields:
            value = missing
            try:
                value = get_value(data, source, missing)

                if value is missing:
                    value = default() if callable(default) else default

                if value is not missing:
                    value = field_method(value)

                if value is missing:
                    if required:
                        raise field.error('required')
                else:
                    valid_data[target] = value
            except except_exception as e:
                if isinstance(e, ValidationError) and isinstance(e.detail, BaseResult):
                    detail: BaseResult = e.detail
                    # distribute nested data in BaseResult
                    valid_data[target] = detail.valid_data
                    errors[source] = detail.errors
                    invalid_data[source] = detail.invalid_data
                else:
                    errors[source] = e
                    if value is not missing:
                        invalid_data[source] = value
                if not all_errors:
                    break

        # field groups depend on fields, if error occurs, do not continue
        if errors:
            return valid_data, errors, invalid_data

        for group_method, error_key, source_target_pairs in partial_groups:
            try:
                valid_data = group_method(valid_data, original_data=data)
            except except_exception as e:
                if isinstance(e, ValidationError) and isinstance(e.detail, BaseResult):
                    detail: BaseResult = e.detail
                    errors.update(detail.errors)
                    for source, target in source_target_pairs:
                        if source in detail.errors and target in valid_data:
                            invalid_data[source] = valid_data.pop(target)
                else:
                    errors[error_key] = e
                    for source, target in source_target_pairs:
                        if target in valid_data:
                            invalid_data[source] = valid_data.pop(target)
                if not all_errors:
                    break
        return valid_data, errors, invalid_data

    def _make_processor(self, name: str) -> Callable:
        """Create processor for dumping and loading processes, wrapping the
        main process with pre and post processes.
        """
        if name == 'dump':
            result_class = DumpResult
            assign_getter = self._assign_dump_getter
            field_dict = self._dump_fields
            source_attr, target_attr = 'dump_source', 'dump_target'
            required_attr, default_attr = 'dump_required', 'dump_default'
            unknown_keys = lambda data: ()
        elif name == 'load':
            result_class = LoadResult
            assign_getter = self._assign_load_getter
            field_dict = self._load_fields
            source_attr, target_attr = 'load_source', 'load_target'
            required_attr, default_attr = 'load_required', 'load_default'
            if self.forbid_unknown:
                known = self._known_keys
                unknown_keys = lambda data: [
                    k for k in data if k not in known] if isinstance(data, Mapping) else ()
            else:
                unknown_keys = lambda data: ()
        else:
            raise ValueError('Argument "name" must be "dump" or "load".')

        general_required = getattr(self, required_attr)
        general_default = getattr(self, default_attr)

        partial_fields, partial_groups = [], []
        for field in field_dict.values():
            if isinstance(field, FieldGroup):
                group_method = self._modify_processor_parameters(getattr(field, name))
                error_key = getattr(field, 'name')
                source_target_pairs = [
                    (getattr(f, source_attr), getattr(f, target_attr))
                    for f in field.fields.values()]
                partial_groups.append(
                    PartialGroups(group_method, error_key, source_target_pairs))
            elif isinstance(field, Field):
                required = getattr(field, required_attr)
                if required is None:
                    required = general_required
                default = getattr(field, default_attr)
                if default is ...:
                    default = general_default
                partial_fields.append(PartialFields(
                    field, getattr(field, source_attr), getattr(field, target_attr),
                    required, default, getattr(field, name)))

        main_process = partial(
            self._process_one,
            all_errors=self.all_errors,
            assign_getter=assign_getter,
            partial_fields=partial_fields,
            partial_groups=partial_groups,
            except_exception=self.except_exception,
            unknown_keys=unknown_keys)

        pre_process_name = f'pre_{name}'
        post_process_name = f'post_{name}'
        pre_process = getattr(self, pre_process_name)
        post_process = self._modify_processor_parameters(getattr(self, post_process_name))
        process_aliases = self.process_aliases
        default_raise_error = self.raise_error
        except_exception = self.except_exception

        def integrated_process(data, raise_error):
            """The actual execution function to do dumping and loading."""
            if raise_error is None:
                raise_error = default_raise_error

            try:
                process_name = pre_process_name
                valid_data = pre_process(data)

                process_name = name
                valid_data, errors, invalid_data = main_process(valid_data)

                if not errors:
                    process_name = post_process_name
                    valid_data = post_process(valid_data, original_data=data)
            except except_exception as e:
                key = process_aliases.get(process_name, process_name)
                errors = {key: e}
                invalid_data = data
                valid_data = {}

            result = result_class(valid_data, errors, invalid_data)
            if errors and raise_error:
                raise ValidationError(msg=result.format_errors(), detail=result)
            return result

        return integrated_process

    @staticmethod
    def _modify_processor_parameters(func):
        """Ignore `original_data` if it's not one of the parameters."""
        sig = inspect.signature(func)
        if 'original_data' not in sig.parameters:
            @wraps(func)
            def wrapper(data, original_data=None):
                return func(data)
            return wrapper
        return func

    def dump(self, data: Any, raise_error: bool = None) -> DumpResult:
        """Serialize `data` according to defined fields."""
        return self._do_dump(data, raise_error)

    def load(self, data: Any, raise_error: bool = None) -> LoadResult:
        """Deserialize `data` according to defined fields."""
        return self._do_load(data, raise_error)

    # pre and post processes
    def pre_dump(self, data):
        return data

    def post_dump(self, data, original_data=None):
        return data

    def pre_load(self, data):
        return data

    def post_load(self, data, original_data=None):
        return data
