"""Run configuration: one JSON document per experiment.

The document is loaded through schemas, so every problem is reported at
once under its field path (``model.lambda1.atoms.0.0``) instead of
stopping at the first one.
"""

import json
from pathlib import Path
from typing import Any, Mapping, NamedTuple, Optional, Tuple, Union

from .branching import BranchAtom, BranchingChars
from .exceptions import ValidationError
from .exponents import LevyTriplet
from .fields import (
    BooleanField, ExtendedFloatField, FloatField, IntegerField, ListField,
    NestedField, PairField, SequenceField, StringField, TaggedField,
)
from .groups import CompareFields, FieldGroup, RequiredByMode
from .measures import FAMILIES, DensityPiece, LevyMeasure, make_family
from .schema import Schema
from .utils import BaseResult
from .validators import NonZeroValidator

LEVY_MODES = ('criteria-perpetuity', 'simulate-perpetuity', 'estimate-moment')
BRANCHING_MODES = ('criteria-branching', 'simulate-branching', 'verify-martingale', 'spine')
MODES = ('validate',) + LEVY_MODES + BRANCHING_MODES

REQUIRED_BY_MODE = {
    'criteria-perpetuity': ('p',),
    'simulate-perpetuity': ('n_samples',),
    'estimate-moment': ('p', 'n_samples'),
    'simulate-branching': ('T',),
    'verify-martingale': ('times', 'n_samples'),
    'spine': ('T',),
}

DEFAULT_EPS = 1e-3
DEFAULT_MAX_PARTICLES = 10 ** 6
DEFAULT_TOLERANCE = 1e-10


class DensitySchema(Schema):
    model_type = DensityPiece
    process_aliases = {'post_load': 'family'}

    family = StringField(choices=sorted(FAMILIES), load_required=True)
    lo = ExtendedFloatField(load_required=True)
    hi = ExtendedFloatField(load_required=True)
    c = FloatField(dump_required=False)
    alpha = FloatField(dump_required=False)
    rate = FloatField(dump_required=False)

    order = CompareFields('lo', '<', 'hi')

    def pre_dump(self, piece):
        data = {'family': piece.family.name, 'lo': piece.lo, 'hi': piece.hi}
        data.update(piece.family.params)
        return data

    def post_load(self, data):
        params = {k: data[k] for k in ('c', 'alpha', 'rate') if k in data}
        try:
            family = make_family(data['family'], **params)
        except TypeError:
            raise ValidationError(
                f'Parameters {sorted(params)} do not match family {data["family"]!r}.')
        return DensityPiece(family, data['lo'], data['hi'])


class MeasureSchema(Schema):
    model_type = LevyMeasure
    process_aliases = {'post_load': 'densities'}

    atoms = ListField(
        PairField(
            FloatField(validators=[NonZeroValidator()]),
            FloatField(minimum=0, exclusive_minimum=True)),
        load_default=())
    densities = NestedField(DensitySchema(), many=True, load_default=())

    def post_load(self, data):
        return LevyMeasure(data['atoms'], data['densities'])


class LevyModelSchema(Schema):
    model_type = LevyTriplet
    process_aliases = {'post_load': 'model'}

    v2 = FloatField(minimum=0, load_default=0.0)
    b = FloatField(load_default=0.0)
    lambda1 = NestedField(MeasureSchema(), load_default=dict)
    lambda2 = NestedField(MeasureSchema(), load_default=dict)
    joint = ListField(
        PairField(FloatField(), FloatField(), FloatField(minimum=0, exclusive_minimum=True)),
        load_default=())

    def post_load(self, data):
        return LevyTriplet(**data)


class BranchAtomSchema(Schema):
    model_type = BranchAtom

    rate = FloatField(minimum=0, exclusive_minimum=True, load_required=True)
    entries = SequenceField(key='sequence', load_required=True)

    def post_load(self, data):
        return BranchAtom.from_entries(data['rate'], data['entries'])


class BranchingModelSchema(Schema):
    model_type = BranchingChars
    process_aliases = {'post_load': 'model'}

    sigma2 = FloatField(minimum=0, load_default=0.0)
    a = FloatField(load_default=0.0)
    pi = NestedField(BranchAtomSchema(), many=True, load_default=())
    theta = FloatField(minimum=0, exclusive_minimum=True, load_required=True)

    def post_load(self, data):
        return BranchingChars(**data)


class ModelForMode(FieldGroup):
    """The model kind a mode works on.

    :param mode: The name of the mode field.
    :param model: The name of the model field.
    :param kinds: Mapping of mode value to model type.
    """
    no_dump = True
    error_messages = {
        'kind': 'Mode "{mode}" needs a {kind} model.',
    }

    def __init__(self, mode: str, model: str, kinds: Mapping[str, type], **kwargs):
        self.mode = mode
        self.model = model
        self.kinds = dict(kinds)
        super().__init__(declared_fields=(mode, model), **kwargs)

    def load(self, data: dict, original_data=None):
        mode = data.get(self.fields[self.mode].load_target)
        model = data.get(self.fields[self.model].load_target)
        kind = self.kinds.get(mode)
        if kind is not None and model is not None and not isinstance(model, kind):
            name = 'levy' if kind is LevyTriplet else 'branching'
            errors = {self.fields[self.model].load_source: self.error('kind', mode=mode, kind=name)}
            result = BaseResult(data, errors, {})
            raise self.error_cls(result.format_errors(), detail=result)
        return data


class RunConfig(NamedTuple):
    mode: str
    model: Union[LevyTriplet, BranchingChars]
    p: Optional[float] = None
    T: Optional[float] = None
    times: Optional[Tuple[float, ...]] = None
    z: Optional[float] = None
    n_samples: Optional[int] = None
    n_iter: Optional[int] = None
    eps: float = DEFAULT_EPS
    max_particles: int = DEFAULT_MAX_PARTICLES
    tolerance: float = DEFAULT_TOLERANCE
    prune_below: Optional[float] = None
    seed: Optional[int] = None
    output_dir: Optional[str] = None
    threads: Optional[int] = None
    write_paths: bool = False


class RunConfigSchema(Schema):
    model_type = RunConfig

    mode = StringField(choices=MODES, load_required=True)
    model = TaggedField({'levy': LevyModelSchema(), 'branching': BranchingModelSchema()},
                        load_required=True)
    p = FloatField(minimum=0, exclusive_minimum=True, load_default=None, allow_none=True)
    T = FloatField(minimum=0, load_default=None, allow_none=True)
    times = ListField(FloatField(minimum=0), min_length=1, load_default=None, allow_none=True)
    z = FloatField(load_default=None, allow_none=True)
    n_samples = IntegerField(minimum=1, load_default=None, allow_none=True)
    n_iter = IntegerField(minimum=1, load_default=None, allow_none=True)
    eps = FloatField(minimum=0, maximum=1, load_default=DEFAULT_EPS)
    max_particles = IntegerField(minimum=1, load_default=DEFAULT_MAX_PARTICLES)
    tolerance = FloatField(minimum=0, exclusive_minimum=True, load_default=DEFAULT_TOLERANCE)
    prune_below = FloatField(minimum=0, exclusive_minimum=True, load_default=None, allow_none=True)
    seed = IntegerField(minimum=0, maximum=2 ** 64 - 1, load_default=None, allow_none=True)
    output_dir = StringField(load_default=None, allow_none=True)
    threads = IntegerField(minimum=1, load_default=None, allow_none=True)
    write_paths = BooleanField(load_default=False)

    required = RequiredByMode('mode', REQUIRED_BY_MODE)
    model_kind = ModelForMode(
        'mode', 'model',
        {**{m: LevyTriplet for m in LEVY_MODES}, **{m: BranchingChars for m in BRANCHING_MODES}})

    def post_load(self, data):
        return RunConfig(**data)


run_config_schema = RunConfigSchema()


def parse_config(data: Any) -> RunConfig:
    """Load a config document.

    :raises ValidationError: With the `LoadResult` as detail.
    """
    if not isinstance(data, Mapping):
        raise ValidationError(f'Config must be a JSON object, not {type(data).__name__}.')
    return run_config_schema.load(data, raise_error=True).valid_data


def load_config(filename: Union[str, Path]) -> RunConfig:
    try:
        text = Path(filename).read_text()
    except OSError as e:
        raise ValidationError(f'Cannot read config {str(filename)!r}: {e.strerror}.')
    if not text.strip():
        raise ValidationError(f'Config {str(filename)!r} is empty.')
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f'Config {str(filename)!r} is not valid JSON: {e}.')
    return parse_config(data)


def dump_config(config: RunConfig) -> dict:
    """The JSON form of `config`; ``parse_config(dump_config(c)) == c``."""
    return run_config_schema.dump(config, raise_error=True).valid_data
