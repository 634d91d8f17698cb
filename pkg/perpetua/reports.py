"""Criterion reports.

Every criterion returns a :class:`CriterionReport` instead of raising on a
negative outcome. A report is a conjunction of :class:`Condition` values,
each carrying the computed quantity, the bound it is compared against, the
margin and the tolerance used.
"""

import enum
import math
from typing import NamedTuple, Iterable, Mapping, Tuple

import daiquiri

logger = daiquiri.getLogger(__name__)


class Verdict(str, enum.Enum):
    HOLDS = 'holds'
    FAILS = 'fails'
    INDETERMINATE = 'indeterminate'


class Condition(NamedTuple):
    """One inequality behind a verdict.

    ``margin`` is positive when the condition holds; it is ``inf`` for a
    finiteness condition with a finite value and ``-inf`` for a divergent one.
    """
    name: str
    value: float
    bound: float
    margin: float
    tolerance: float
    verdict: Verdict
    boundary: bool = False
    note: str = ''

    def as_dict(self) -> dict:
        data = self._asdict()
        data['verdict'] = self.verdict.value
        return data


def strictly_less(name: str, value: float, bound: float, tolerance: float,
                  note: str = '') -> Condition:
    """``value < bound`` with a tolerance band. Values inside the band fail
    with the boundary flag set, since the criteria are strict inequalities.
    """
    margin = bound - value
    if math.isnan(value):
        verdict, boundary = Verdict.INDETERMINATE, False
    elif abs(margin) <= tolerance:
        verdict, boundary = Verdict.FAILS, True
    elif margin > 0:
        verdict, boundary = Verdict.HOLDS, False
    else:
        verdict, boundary = Verdict.FAILS, False
    return Condition(name, value, bound, margin, tolerance, verdict, boundary, note)


def strictly_greater(name: str, value: float, bound: float, tolerance: float,
                     note: str = '') -> Condition:
    """``value > bound``, the mirror of :func:`strictly_less`."""
    condition = strictly_less(name, -value, -bound, tolerance, note)
    return condition._replace(value=value, bound=bound)


class CriterionReport:
    """Structured verdict.

    :param name: The criterion name.
    :param components: The conditions of the conjunction.
    :param notes: Free-form remarks, e.g. the degenerate case.
    :param values: Extra numbers exposed next to the conditions.
    """

    def __init__(
            self,
            name: str,
            components: Iterable[Condition] = (),
            notes: Iterable[str] = (),
            values: Mapping[str, float] = None):
        self.name = name
        self.components: Tuple[Condition, ...] = tuple(components)
        self.notes: Tuple[str, ...] = tuple(notes)
        self.values = dict(values or {})
        if self.verdict is Verdict.INDETERMINATE:
            logger.warning('criterion %s is indeterminate', name)

    @property
    def verdict(self) -> Verdict:
        verdicts = {c.verdict for c in self.components}
        if Verdict.FAILS in verdicts:
            return Verdict.FAILS
        if Verdict.INDETERMINATE in verdicts:
            return Verdict.INDETERMINATE
        return Verdict.HOLDS

    @property
    def boundary(self) -> bool:
        return any(c.boundary for c in self.components)

    def __getitem__(self, name: str) -> Condition:
        for condition in self.components:
            if condition.name == name:
                return condition
        raise KeyError(name)

    def __repr__(self):
        return f'{self.__class__.__name__}({self.name!r}, verdict={self.verdict.value!r})'

    def as_dict(self) -> dict:
        return {
            'name': self.name,
            'verdict': self.verdict.value,
            'boundary': self.boundary,
            'components': [c.as_dict() for c in self.components],
            'values': dict(self.values),
            'notes': list(self.notes),
        }
