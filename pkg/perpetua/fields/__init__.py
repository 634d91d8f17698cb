"""Field classes for config documents."""

from .base import (
    BaseField,
    FieldDict,
    Field,
)
from .simple import (
    StringField,
    BooleanField,
)
from .number import (
    NumberField,
    IntegerField,
    FloatField,
    ExtendedFloatField,
)
from .complex import (
    ListField,
    PairField,
    SequenceField,
    NestedField,
    TaggedField,
)


# Aliases
Str = String = StringField
Bool = Boolean = BooleanField
Int = Integer = IntegerField
Float = FloatField
Number = NumberField
List = ListField
Pair = PairField
Nested = NestedField
Tagged = TaggedField
