import math
from unittest import TestCase

from perpetua.schema import Schema
from perpetua.fields import (
    Field, StringField, BooleanField, IntegerField, FloatField,
    ExtendedFloatField, ListField, PairField, SequenceField,
    NestedField, TaggedField,
)
from perpetua.exceptions import ValidationError
from perpetua.utils import NEG_INF, missing
from perpetua.validators import NonZeroValidator


class PointSchema(Schema):
    x = FloatField(load_required=True)


class FieldTest(TestCase):
    def test_field(self):
        field = Field()
        self.assertEqual(field.load(1), 1)
        self.assertEqual(field.dump('a'), 'a')
        self.assertIs(field.load(missing), missing)

        # none
        with self.assertRaises(ValidationError) as cm:
            field.load(None)
        self.assertEqual(str(cm.exception), 'Field may not be null.')
        field = Field(allow_none=True)
        self.assertIsNone(field.load(None))
        self.assertIsNone(field.dump(None))

        # error messages
        field = Field(error_messages={'none': 'no none'})
        with self.assertRaises(ValidationError) as cm:
            field.load(None)
        self.assertEqual(str(cm.exception), 'no none')

    def test_validators(self):
        field = Field(validators=NonZeroValidator())
        field.load(1)
        with self.assertRaises(ValidationError):
            field.load(0)

        field = Field(validators=[NonZeroValidator(), lambda v: None])
        self.assertEqual(len(field.validators), 2)

        field.add_validator(NonZeroValidator())
        self.assertEqual(len(field.validators), 3)

        with self.assertRaises(TypeError):
            Field(validators=['x'])
        with self.assertRaises(TypeError):
            field.add_validator(1)

        # validators are not shared between instances
        self.assertEqual(Field().validators, [])

    def test_defaults(self):
        field = Field(load_default=0, dump_default=None)
        self.assertEqual(field.load_default, 0)
        self.assertIsNone(field.dump_default)
        self.assertIs(Field().load_default, ...)

    def test_string(self):
        field = StringField()
        self.assertEqual(field.load('a'), 'a')
        with self.assertRaises(ValidationError):
            field.load(1)

        field = StringField(choices=['a', 'b'])
        self.assertEqual(field.load('b'), 'b')
        with self.assertRaises(ValidationError) as cm:
            field.load('c')
        self.assertEqual(str(cm.exception), "Must be one of ('a', 'b').")

    def test_boolean(self):
        field = BooleanField()
        self.assertIs(field.load(True), True)
        self.assertIs(field.load(False), False)
        with self.assertRaises(ValidationError):
            field.load(1)
        with self.assertRaises(ValidationError):
            field.load('true')


class NumberFieldTest(TestCase):
    def test_integer(self):
        field = IntegerField()
        self.assertEqual(field.load(1), 1)
        self.assertEqual(field.load(1e4), 10000)
        self.assertIsInstance(field.load(1e4), int)
        with self.assertRaises(ValidationError):
            field.load(1.5)
        with self.assertRaises(ValidationError):
            field.load(True)
        with self.assertRaises(ValidationError) as cm:
            field.load('1')
        self.assertEqual(str(cm.exception), "Not a valid integer: '1'.")

        field = IntegerField(minimum=1)
        with self.assertRaises(ValidationError) as cm:
            field.load(0)
        self.assertEqual(str(cm.exception), 'Value must be >= 1.')

    def test_float(self):
        field = FloatField()
        self.assertEqual(field.load(1), 1.0)
        self.assertIsInstance(field.load(1), float)
        self.assertEqual(field.dump(2), 2.0)
        with self.assertRaises(ValidationError):
            field.load('1.0')
        with self.assertRaises(ValidationError) as cm:
            field.load(math.inf)
        self.assertEqual(str(cm.exception), 'Value must be finite.')
        with self.assertRaises(ValidationError):
            field.load(math.nan)

        field = FloatField(minimum=0, exclusive_minimum=True)
        field.load(1e-300)
        with self.assertRaises(ValidationError) as cm:
            field.load(0)
        self.assertEqual(str(cm.exception), 'Value must be > 0.')

        field = FloatField(minimum=0, maximum=1)
        field.load(0)
        field.load(1)
        with self.assertRaises(ValidationError) as cm:
            field.load(1.5)
        self.assertEqual(str(cm.exception), 'Value must be between 0 and 1.')

        field = FloatField(allow_infinite=True)
        self.assertEqual(field.load(math.inf), math.inf)

    def test_extended_float(self):
        field = ExtendedFloatField()
        self.assertEqual(field.load('inf'), math.inf)
        self.assertEqual(field.load('+inf'), math.inf)
        self.assertEqual(field.load('-inf'), -math.inf)
        self.assertEqual(field.load(2), 2.0)
        with self.assertRaises(ValidationError):
            field.load('infinity')
        with self.assertRaises(ValidationError):
            field.load(math.nan)

        self.assertEqual(field.dump(math.inf), 'inf')
        self.assertEqual(field.dump(-math.inf), '-inf')
        self.assertEqual(field.dump(1), 1.0)


class ComplexFieldTest(TestCase):
    def test_list(self):
        field = ListField(FloatField())
        self.assertEqual(field.load([1, 2]), (1.0, 2.0))
        self.assertEqual(field.load(()), ())
        self.assertEqual(field.dump((1.0, 2.0)), [1.0, 2.0])

        with self.assertRaises(ValidationError):
            field.load('12')
        with self.assertRaises(ValidationError):
            field.load({'a': 1})
        with self.assertRaises(ValidationError):
            field.load(1)

        # errors are collected by index
        with self.assertRaises(ValidationError) as cm:
            field.load([1, 'a', 3, 'b'])
        result = cm.exception.detail
        self.assertEqual(set(result.errors), {1, 3})
        self.assertEqual(result.valid_data, [1.0, 3.0])
        self.assertEqual(result.invalid_data, {1: 'a', 3: 'b'})

        field = ListField(FloatField(), all_errors=False)
        with self.assertRaises(ValidationError) as cm:
            field.load([1, 'a', 3, 'b'])
        self.assertEqual(set(cm.exception.detail.errors), {1})

        field = ListField(FloatField(), min_length=1, max_length=2)
        with self.assertRaises(ValidationError) as cm:
            field.load([])
        self.assertEqual(str(cm.exception), 'Length must be between 1 and 2.')
        with self.assertRaises(ValidationError):
            field.load([1, 2, 3])

        with self.assertRaises(TypeError):
            ListField()
        with self.assertRaises(TypeError):
            ListField(FloatField)

    def test_pair(self):
        field = PairField(FloatField(validators=[NonZeroValidator()]), IntegerField())
        self.assertEqual(field.load([1.5, 2]), (1.5, 2))
        self.assertEqual(field.dump((1.5, 2)), [1.5, 2])

        with self.assertRaises(ValidationError):
            field.load([1.5])
        with self.assertRaises(ValidationError):
            field.load([1.5, 2, 3])
        with self.assertRaises(ValidationError) as cm:
            field.load([0, 2.5])
        self.assertEqual(set(cm.exception.detail.errors), {0, 1})

    def test_sequence(self):
        field = SequenceField()
        self.assertEqual(field.load([1, 0]), (1.0, 0.0))
        self.assertEqual(field.load([0, '-inf', '-inf']), (0.0, NEG_INF, NEG_INF))
        self.assertEqual(field.load(['-inf']), (NEG_INF,))
        self.assertEqual(field.load([0, -math.inf]), (0.0, NEG_INF))
        self.assertEqual(field.dump((0.0, NEG_INF)), [0.0, '-inf'])

        with self.assertRaises(ValidationError):
            field.load([0, 1])
        with self.assertRaises(ValidationError):
            field.load(['-inf', 0])
        with self.assertRaises(ValidationError):
            field.load([])
        with self.assertRaises(ValidationError) as cm:
            field.load([0, 'x'])
        self.assertEqual(set(cm.exception.detail.errors), {1})

    def test_nested(self):
        field = NestedField(PointSchema())
        self.assertEqual(field.load({'x': 1}), {'x': 1.0})
        self.assertEqual(field.dump({'x': 1.0}), {'x': 1.0})

        with self.assertRaises(ValidationError) as cm:
            field.load({})
        self.assertEqual(set(cm.exception.detail.errors), {'x'})
        with self.assertRaises(ValidationError) as cm:
            field.load({'x': 1, 'y': 2})
        self.assertEqual(set(cm.exception.detail.errors), {'y'})

        field = NestedField(PointSchema(), many=True)
        self.assertEqual(field.load([{'x': 1}, {'x': 2}]), ({'x': 1.0}, {'x': 2.0}))
        self.assertEqual(field.dump([{'x': 1.0}]), [{'x': 1.0}])
        with self.assertRaises(ValidationError) as cm:
            field.load([{'x': 1}, {}])
        self.assertEqual(set(cm.exception.detail.errors), {1})
        with self.assertRaises(ValidationError):
            field.load({'x': 1})

        with self.assertRaises(TypeError):
            NestedField()
        with self.assertRaises(TypeError):
            NestedField(PointSchema)

    def test_tagged(self):
        field = TaggedField({'point': PointSchema()})
        self.assertEqual(field.load({'kind': 'point', 'x': 1}), {'x': 1.0})
        self.assertEqual(field.dump({'x': 1.0}), {'kind': 'point', 'x': 1.0})

        with self.assertRaises(ValidationError) as cm:
            field.load({'kind': 'line', 'x': 1})
        self.assertEqual(str(cm.exception), "\"kind\" must be one of ['point'], not 'line'.")
        with self.assertRaises(ValidationError):
            field.load({'x': 1})
        with self.assertRaises(ValidationError):
            field.load([1])
        with self.assertRaises(ValidationError):
            field.dump(1)

        field = TaggedField({'point': PointSchema()}, tag='type')
        self.assertEqual(field.load({'type': 'point', 'x': 2}), {'x': 2.0})
