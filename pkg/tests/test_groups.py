from unittest import TestCase

from perpetua.schema import Schema
from perpetua.fields import IntegerField, FloatField, StringField
from perpetua.groups import FieldGroup, CompareFields, RequiredByMode


class GroupsTest(TestCase):
    def test_field_group(self):
        group = FieldGroup(declared_fields=['num'])

        self.assertFalse(hasattr(group, 'fields'))

        fields = {'num': IntegerField(), 'xxx': IntegerField()}
        group.set_fields(fields)
        self.assertEqual(set(group.fields), {'num'})

        with self.assertRaises(ValueError):
            group.set_fields({})

        with self.assertRaises(TypeError):
            group.set_fields({'num': None})

        self.assertIsNone(group.load(None))
        self.assertIsNone(group.dump(None))

        # test "*" all fields, exclude FieldGroup
        group = FieldGroup(declared_fields='*')
        fields['group'] = group
        group.set_fields(fields)
        self.assertSetEqual(set(group.fields), {'xxx', 'num'})

    def test_compare_fields(self):
        class IntervalSchema(Schema):
            lo = IntegerField(allow_none=True)
            hi = IntegerField(allow_none=True)
            order = CompareFields('lo', '<', 'hi')

        schema = IntervalSchema()
        self.assertEqual({'lo', 'hi'}, set(schema.order.fields))
        self.assertEqual({'lo', 'hi'}, set(schema._dump_fields))
        self.assertEqual({'lo', 'hi', 'order'}, set(schema._load_fields))

        valid_data = {'lo': 1, 'hi': 100}
        result = schema.load(valid_data)
        self.assertTrue(result.is_valid)
        self.assertDictEqual(valid_data, result.valid_data)

        invalid_data = {'lo': 100, 'hi': 1}
        result = schema.load(invalid_data)
        self.assertFalse(result.is_valid)
        self.assertIn('order', result.errors)
        self.assertEqual(str(result.errors['order']), '"lo" must be less than "hi".')
        self.assertDictEqual(invalid_data, result.invalid_data)
        self.assertDictEqual(result.valid_data, {})

        # equal values are not strictly ordered
        self.assertFalse(schema.load({'lo': 1, 'hi': 1}).is_valid)

        ignored_data = {'lo': 100, 'hi': None}
        result = schema.load(ignored_data)
        self.assertTrue(result.is_valid)

        with self.assertRaises(ValueError):
            CompareFields('lo', '!=', 'hi')

    def test_required_by_mode(self):
        class RunSchema(Schema):
            mode = StringField(load_required=True)
            p = FloatField(load_default=None, allow_none=True)
            T = FloatField(load_default=None, allow_none=True)
            required = RequiredByMode('mode', {'moment': ('p',), 'both': ('p', 'T')})

        schema = RunSchema()
        self.assertEqual(set(schema.required.fields), {'mode', 'p', 'T'})

        result = schema.load({'mode': 'moment', 'p': 1})
        self.assertTrue(result.is_valid)
        self.assertEqual(result.valid_data, {'mode': 'moment', 'p': 1.0, 'T': None})

        result = schema.load({'mode': 'moment'})
        self.assertFalse(result.is_valid)
        self.assertEqual(set(result.errors), {'p'})
        self.assertEqual(str(result.errors['p']), 'Missing data required by mode "moment".')

        result = schema.load({'mode': 'both', 'T': 1})
        self.assertEqual(set(result.errors), {'p'})
        result = schema.load({'mode': 'both'})
        self.assertEqual(set(result.errors), {'p', 'T'})

        # modes without requirements
        self.assertTrue(schema.load({'mode': 'other'}).is_valid)
