"""One-dimensional Lévy measures and their integral functionals.

A :class:`LevyMeasure` is a finite list of atoms plus a finite list of
density pieces, each piece a built-in :class:`DensityFamily` on an interval
that does not contain 0. Integrals against a measure are assembled from an
exact atomic sum and a quadrature per density piece; :func:`integrate`
detects divergence instead of looping and returns an
:class:`IntegralResult` whose method tells which case occurred.
"""

import enum
import math
from typing import Callable, Dict, Iterable, NamedTuple, Optional, Sequence, Tuple, Union

import daiquiri
import numpy as np
from scipy import integrate as scipy_integrate

from .exceptions import ValidationError
from .reports import Condition, CriterionReport, Verdict
from .utils import ErrorMessageMixin

logger = daiquiri.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-10
DEFAULT_BUDGET = 10 ** 6
DIVERGENCE_CAP = 1e12

LOG_SCALE_ABOVE = 1e300
MIN_SHELLS = 4
MAX_SHELLS = 1000


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


class Method(str, enum.Enum):
    EXACT_ATOMIC = 'exact_atomic'
    QUADRATURE = 'quadrature'
    DIVERGENCE_DETECTED = 'divergence_detected'
    INDETERMINATE = 'indeterminate'


class IntegralResult(NamedTuple):
    """``value`` is ``inf`` on divergence and ``nan`` when the integral could
    not be bracketed; ``bounds`` then holds the partial-sum bracket."""
    value: float
    abs_error_bound: float
    method: Method
    bounds: Tuple[float, float]

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)


class Interval(NamedTuple):
    """Interval of the real line; the closedness flags only matter for atoms."""
    lo: float = -math.inf
    hi: float = math.inf
    left_closed: bool = False
    right_closed: bool = False

    def __contains__(self, x: float) -> bool:
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo:
            return self.left_closed
        if x == self.hi:
            return self.right_closed
        return True

    def overlap(self, lo: float, hi: float) -> Optional[Tuple[float, float]]:
        a, b = max(lo, self.lo), min(hi, self.hi)
        if a < b:
            return a, b
        return None


REAL_LINE = Interval()
Domain = Union[Interval, Sequence[Interval]]


def above(y: float) -> Interval:
    """The half-line ``(y, ∞)``."""
    return Interval(y, math.inf)


def outside(r: float, closed: bool = False) -> Tuple[Interval, Interval]:
    """The set ``{|x| > r}``, or ``{|x| >= r}`` when `closed`."""
    return Interval(-math.inf, -r, right_closed=closed), Interval(r, math.inf, left_closed=closed)


def inside(r: float) -> Interval:
    """The set ``{|x| <= r}``."""
    return Interval(-r, r, True, True)


class Atom(NamedTuple):
    location: float
    mass: float


# density families

class DensityFamily(ErrorMessageMixin):
    """Radial density ``f(|x|)``; a piece on a negative interval mirrors it.

    :attr hint: The exponent ``α`` of the ``|x|^{-α}`` behaviour near 0.
    """
    name = ''
    hint = 0.0
    error_messages = {
        'positive': 'Parameter "{name}" must be positive.',
        'range': 'Parameter "{name}" must be in {lower} < value < {upper}.',
    }

    def _positive(self, **params):
        for name, value in params.items():
            if not (math.isfinite(value) and value > 0):
                raise self.error('positive', name=name)

    @property
    def params(self) -> Dict[str, float]:
        raise NotImplementedError

    @property
    def tail_integrable(self) -> bool:
        """Whether the mass on ``[1, ∞)`` is finite."""
        raise NotImplementedError

    def log_density(self, r: float) -> float:
        raise NotImplementedError

    def __call__(self, r: float) -> float:
        return _exp(self.log_density(r))

    def sample(self, rng: np.random.Generator, size: int, a: float, b: float) -> np.ndarray:
        """Draw `size` radii from the density restricted to ``[a, b]``."""
        raise NotImplementedError

    def __eq__(self, other):
        return type(self) is type(other) and self.params == other.params

    def __hash__(self):
        return hash((type(self), tuple(sorted(self.params.items()))))

    def __repr__(self):
        params = ', '.join(f'{k}={v!r}' for k, v in self.params.items())
        return f'{self.__class__.__name__}({params})'


def _power_inverse_cdf(u: np.ndarray, alpha: float, a: float, b: float) -> np.ndarray:
    beta = 1.0 - alpha
    if beta == 0:
        return a * (b / a) ** u
    lo = a ** beta
    hi = 0.0 if math.isinf(b) else b ** beta
    return (lo + u * (hi - lo)) ** (1.0 / beta)


class PowerDensity(DensityFamily):
    """``c |x|^{-alpha}``."""
    name = 'power'

    def __init__(self, c: float, alpha: float):
        self._positive(c=c)
        if not math.isfinite(alpha):
            raise self.error('range', name='alpha', lower='-inf', upper='inf')
        self.c = float(c)
        self.alpha = float(alpha)
        self.hint = self.alpha

    @property
    def params(self):
        return {'c': self.c, 'alpha': self.alpha}

    @property
    def tail_integrable(self):
        return self.alpha > 1

    def log_density(self, r):
        return math.log(self.c) - self.alpha * math.log(r)

    def sample(self, rng, size, a, b):
        return _power_inverse_cdf(rng.uniform(size=size), self.alpha, a, b)


class ExponentialDensity(DensityFamily):
    """``c e^{-rate |x|}``."""
    name = 'exponential'

    def __init__(self, c: float, rate: float):
        self._positive(c=c, rate=rate)
        self.c = float(c)
        self.rate = float(rate)

    @property
    def params(self):
        return {'c': self.c, 'rate': self.rate}

    @property
    def tail_integrable(self):
        return True

    def log_density(self, r):
        return math.log(self.c) - self.rate * r

    def sample(self, rng, size, a, b):
        u = rng.uniform(size=size)
        width = -math.expm1(-self.rate * (b - a))
        return a - np.log1p(-u * width) / self.rate


class TemperedStableDensity(DensityFamily):
    """``c |x|^{-1-alpha} e^{-rate |x|}`` with ``0 < alpha < 2``: a stable
    density with exponentially truncated tails."""
    name = 'truncated-stable'

    def __init__(self, c: float, alpha: float, rate: float):
        self._positive(c=c, rate=rate)
        if not 0 < alpha < 2:
            raise self.error('range', name='alpha', lower=0, upper=2)
        self.c = float(c)
        self.alpha = float(alpha)
        self.rate = float(rate)
        self.hint = 1.0 + self.alpha

    @property
    def params(self):
        return {'c': self.c, 'alpha': self.alpha, 'rate': self.rate}

    @property
    def tail_integrable(self):
        return True

    def log_density(self, r):
        return math.log(self.c) - (1.0 + self.alpha) * math.log(r) - self.rate * r

    def sample(self, rng, size, a, b):
        # power proposal, accepted with probability e^{-rate (x - a)}
        out = np.empty(size)
        filled = 0
        while filled < size:
            need = size - filled
            x = _power_inverse_cdf(rng.uniform(size=2 * need), self.hint, a, b)
            keep = x[rng.uniform(size=x.size) < np.exp(-self.rate * (x - a))][:need]
            out[filled:filled + keep.size] = keep
            filled += keep.size
        return out


FAMILIES = {
    PowerDensity.name: PowerDensity,
    ExponentialDensity.name: ExponentialDensity,
    TemperedStableDensity.name: TemperedStableDensity,
}


def make_family(name: str, **params) -> DensityFamily:
    """Build a registered density family from its config name."""
    try:
        family = FAMILIES[name]
    except KeyError:
        raise ValidationError(f'Unknown density family {name!r}, must be one of {sorted(FAMILIES)}.')
    return family(**params)


class DensityPiece(NamedTuple):
    family: DensityFamily
    lo: float
    hi: float

    @property
    def sign(self) -> float:
        return 1.0 if self.lo >= 0 else -1.0

    @property
    def radial(self) -> Tuple[float, float]:
        if self.lo >= 0:
            return self.lo, self.hi
        return -self.hi, -self.lo

    @property
    def infinite_activity(self) -> bool:
        return self.radial[0] == 0 and self.family.hint >= 1

    def beyond(self, eps: float) -> Optional['DensityPiece']:
        """The piece restricted to ``{|x| > eps}``."""
        a, b = self.radial
        a = max(a, eps)
        if a >= b:
            return None
        if self.sign > 0:
            return DensityPiece(self.family, a, b)
        return DensityPiece(self.family, -b, -a)

    def density(self, x: float) -> float:
        return self.family(abs(x))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        a, b = self.radial
        return self.sign * self.family.sample(rng, size, a, b)


class LevyMeasure(ErrorMessageMixin):
    """A σ-finite measure on ``ℝ∖{0}``: atoms plus density pieces.
    Immutable after construction.

    :param atoms: ``(location, mass)`` pairs, ``location != 0`` and ``mass > 0``.
    :param densities: :class:`DensityPiece` values on intervals excluding 0.
    """
    error_messages = {
        'location': 'atoms[{index}]: atom location must be finite and non-zero, not {value!r}.',
        'mass': 'atoms[{index}]: atom mass must be finite and positive, not {value!r}.',
        'interval': 'densities[{index}]: interval ({lo}, {hi}) must be non-empty and exclude 0.',
        'family': 'densities[{index}]: not a density family: {value!r}.',
        'tail': 'densities[{index}]: mass on {{|x| > 1}} is infinite.',
    }

    def __init__(self, atoms: Iterable = (), densities: Iterable = ()):
        self.atoms: Tuple[Atom, ...] = tuple(Atom(float(x), float(m)) for x, m in atoms)
        self.densities: Tuple[DensityPiece, ...] = tuple(
            piece if isinstance(piece, DensityPiece) else DensityPiece(*piece)
            for piece in densities)
        self._check()

    def _check(self):
        for index, (location, mass) in enumerate(self.atoms):
            if not math.isfinite(location) or location == 0:
                raise self.error('location', index=index, value=location)
            if not math.isfinite(mass) or mass <= 0:
                raise self.error('mass', index=index, value=mass)
        for index, piece in enumerate(self.densities):
            if not isinstance(piece.family, DensityFamily):
                raise self.error('family', index=index, value=piece.family)
            lo, hi = piece.lo, piece.hi
            if not lo < hi or (lo < 0 < hi) or math.isnan(lo) or math.isnan(hi):
                raise self.error('interval', index=index, lo=lo, hi=hi)
            if math.isinf(piece.radial[1]) and not piece.family.tail_integrable:
                raise self.error('tail', index=index)

    @classmethod
    def atomic(cls, *atoms: Tuple[float, float]) -> 'LevyMeasure':
        return cls(atoms=atoms)

    @classmethod
    def density(cls, family: DensityFamily, lo: float, hi: float) -> 'LevyMeasure':
        return cls(densities=[DensityPiece(family, lo, hi)])

    @property
    def is_trivial(self) -> bool:
        return not self.atoms and not self.densities

    @property
    def is_atomic(self) -> bool:
        return not self.densities

    @property
    def infinite_activity(self) -> bool:
        return any(piece.infinite_activity for piece in self.densities)

    def __add__(self, other: 'LevyMeasure') -> 'LevyMeasure':
        return LevyMeasure(self.atoms + other.atoms, self.densities + other.densities)

    def __eq__(self, other):
        if not isinstance(other, LevyMeasure):
            return NotImplemented
        return self.atoms == other.atoms and self.densities == other.densities

    def __hash__(self):
        return hash((self.atoms, self.densities))

    def __repr__(self):
        return f'LevyMeasure(atoms={list(self.atoms)}, densities={list(self.densities)})'


# quadrature

class _Budget:
    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    @property
    def exhausted(self) -> bool:
        return self.used > self.limit


class _Part(NamedTuple):
    value: float
    error: float
    method: Method
    lower: float
    upper: float


def _quad(g: Callable, lo: float, hi: float, tol: float, budget: _Budget) -> Tuple[float, float]:
    value, error, info, *_ = scipy_integrate.quad(
        g, lo, hi, epsabs=tol, epsrel=1e-11, limit=200, full_output=1)
    budget.used += info['neval']
    return value, error


def _shells(g, edges, tol, budget, cap, offset) -> _Part:
    """Sum quadratures over geometrically growing shells until the remainder
    is negligible, extrapolating a stable geometric ratio, or until the
    increments stop shrinking."""
    total = error = 0.0
    prev = None
    ratios = []
    small_run = 0
    nonnegative = True
    for k, (lo, hi) in enumerate(edges):
        if budget.exhausted or k >= MAX_SHELLS or not math.isfinite(hi) or lo == hi:
            break
        value, err = _quad(g, lo, hi, tol * 1e-2, budget)
        if not math.isfinite(value):
            logger.debug('non-finite shell [%g, %g]', lo, hi)
            return _Part(math.copysign(math.inf, value) if not math.isnan(value) else math.nan,
                         math.inf, Method.DIVERGENCE_DETECTED, -math.inf, math.inf)
        nonnegative = nonnegative and value >= 0
        total += value
        error += err
        if abs(offset + total) > cap:
            logger.debug('partial sum %g beyond cap after %d shells', total, k + 1)
            return _Part(math.copysign(math.inf, total), math.inf,
                         Method.DIVERGENCE_DETECTED, -math.inf, math.inf)

        small_run = small_run + 1 if abs(value) <= tol * 1e-3 else 0
        if small_run >= 3 and k >= MIN_SHELLS:
            return _Part(total, error + tol * 1e-3, Method.QUADRATURE, total, total)

        if prev:
            ratios.append(value / prev)
        prev = value
        if k < MIN_SHELLS or len(ratios) < 3:
            continue
        last = ratios[-3:]
        jitter = max(last) - min(last)
        r = last[-1]
        if min(last) >= 1 - 1e-9 and jitter < 1e-3:
            logger.debug('shell increments not shrinking (ratio %g)', r)
            return _Part(math.copysign(math.inf, total), math.inf,
                         Method.DIVERGENCE_DETECTED, -math.inf, math.inf)
        if 0 <= r < 1 - 1e-9:
            tail = value * r / (1 - r)
            tail_error = abs(tail) * max(1e-12, jitter / (1 - r))
            if abs(offset + total + tail) > cap:
                return _Part(math.copysign(math.inf, total), math.inf,
                             Method.DIVERGENCE_DETECTED, -math.inf, math.inf)
            if tail_error < tol * 0.5 and (abs(tail) < tol or jitter < 1e-6 * (1 - r)):
                return _Part(total + tail, error + tail_error, Method.QUADRATURE,
                             total + tail, total + tail)

    logger.debug('shell budget exhausted at partial sum %g', total)
    lower = total if nonnegative else -math.inf
    return _Part(math.nan, math.inf, Method.INDETERMINATE, lower, math.inf)


def _integrate_radial(g, a, b, tol, budget, cap) -> _Part:
    """``∫_a^b g(r) dr`` with ``0 <= a < b <= ∞``."""
    near = a == 0
    far = math.isinf(b)
    if near and far:
        c0, c1 = 1.0, 2.0
    elif near:
        c0, c1 = b / 2, b
    elif far:
        c0, c1 = a, max(2 * a, 1.0)
    else:
        c0, c1 = a, b

    value, error = _quad(g, c0, c1, tol * 1e-2, budget)
    if not math.isfinite(value):
        return _Part(value, math.inf, Method.DIVERGENCE_DETECTED, -math.inf, math.inf)
    parts = [_Part(value, error, Method.QUADRATURE, value, value)]
    if near:
        edges = ((c0 * 2.0 ** (-k - 1), c0 * 2.0 ** -k) for k in range(MAX_SHELLS))
        parts.append(_shells(g, edges, tol, budget, cap, value))
    if far:
        edges = ((c1 * 2.0 ** k, c1 * 2.0 ** (k + 1)) for k in range(MAX_SHELLS))
        parts.append(_shells(g, edges, tol, budget, cap, value))
    return _combine(parts)


def _combine(parts: Sequence[_Part]) -> _Part:
    methods = {part.method for part in parts}
    if Method.DIVERGENCE_DETECTED in methods:
        signs = {math.copysign(1, p.value) for p in parts
                 if p.method is Method.DIVERGENCE_DETECTED and not math.isnan(p.value)}
        if len(signs) == 1:
            return _Part(signs.pop() * math.inf, math.inf, Method.DIVERGENCE_DETECTED,
                         -math.inf, math.inf)
        return _Part(math.nan, math.inf, Method.INDETERMINATE, -math.inf, math.inf)
    lower = sum(p.lower for p in parts)
    upper = sum(p.upper for p in parts)
    if Method.INDETERMINATE in methods:
        return _Part(math.nan, math.inf, Method.INDETERMINATE, lower, upper)
    method = Method.QUADRATURE if Method.QUADRATURE in methods else Method.EXACT_ATOMIC
    value = sum(p.value for p in parts)
    return _Part(value, sum(p.error for p in parts), method, value, value)


def _safe(f: Callable[[float], float]) -> Callable[[float], float]:
    def wrapper(x):
        try:
            return f(x)
        except OverflowError:
            return math.inf
    return wrapper


def _weighted(f, log_abs_f, sign: float, family: DensityFamily) -> Callable[[float], float]:
    """Radial integrand ``f(sign r) · density(r)``, formed in log space once
    ``f`` overflows."""
    def g(r):
        x = sign * r
        value = f(x)
        if value == 0:
            return 0.0
        log_density = family.log_density(r)
        if log_abs_f is not None and not abs(value) < LOG_SCALE_ABOVE:
            if math.isnan(value):
                return value
            return math.copysign(_exp(log_abs_f(x) + log_density), value)
        weight = _exp(log_density)
        if weight == 0 and math.isfinite(value):
            return 0.0
        return value * weight
    return g


def integrate(
        m: LevyMeasure,
        f: Callable[[float], float],
        domain: Domain = REAL_LINE,
        tol: float = DEFAULT_TOLERANCE,
        budget: int = DEFAULT_BUDGET,
        cap: float = DIVERGENCE_CAP,
        breakpoints: Iterable[float] = (),
        log_abs_f: Optional[Callable[[float], float]] = None) -> IntegralResult:
    """Integrate `f` against `m` over `domain`.

    Atoms are summed exactly. Each density piece is integrated by adaptive
    quadrature on a core interval plus geometric shells towards 0 and
    towards infinity; shells whose increments do not shrink, or partial sums
    beyond `cap`, flag divergence. When `budget` function evaluations are
    spent first the result is indeterminate with partial-sum bounds.

    :param breakpoints: Points where `f` is discontinuous, e.g. ``(-1, 1)``
        for the compensation indicator.
    :param log_abs_f: ``log |f|``, used in place of `f` where ``|f|`` is
        infinite or beyond ``LOG_SCALE_ABOVE`` so that a vanishing density
        weight is not multiplied into an overflowed value.
    """
    if tol <= 0:
        raise ValidationError('Argument "tol" must be positive.')
    domains = (domain,) if isinstance(domain, Interval) else tuple(domain)
    f = _safe(f)
    parts = []

    atomic = 0.0
    for location, mass in m.atoms:
        if any(location in d for d in domains):
            atomic += f(location) * mass
    if math.isnan(atomic):
        parts.append(_Part(math.nan, math.inf, Method.INDETERMINATE, -math.inf, math.inf))
    elif math.isinf(atomic):
        parts.append(_Part(atomic, math.inf, Method.DIVERGENCE_DETECTED, -math.inf, math.inf))
    else:
        parts.append(_Part(atomic, 0.0, Method.EXACT_ATOMIC, atomic, atomic))

    counter = _Budget(budget)
    breakpoints = tuple(breakpoints)
    for piece in m.densities:
        for d in domains:
            span = d.overlap(piece.lo, piece.hi)
            if span is None:
                continue
            sign = 1.0 if span[0] >= 0 else -1.0
            ra, rb = (span[0], span[1]) if sign > 0 else (-span[1], -span[0])
            g = _safe(_weighted(f, log_abs_f, sign, piece.family))
            cuts = sorted({abs(p) for p in breakpoints if ra < abs(p) < rb})
            edges = [ra, *cuts, rb]
            for lo, hi in zip(edges, edges[1:]):
                parts.append(_integrate_radial(g, lo, hi, tol, counter, cap))

    total = _combine(parts)
    if counter.exhausted and total.method is not Method.DIVERGENCE_DETECTED:
        total = _Part(math.nan, math.inf, Method.INDETERMINATE, total.lower, total.upper)
    return IntegralResult(total.value, total.error, total.method, (total.lower, total.upper))


def tail_mass(m: LevyMeasure, y: float, tol: float = DEFAULT_TOLERANCE) -> float:
    """``m((y, ∞))``; infinite when the tail diverges."""
    if not y > 0:
        raise ValidationError(f'Argument "y" must be positive, not {y!r}.')
    result = integrate(m, lambda x: 1.0, above(y), tol=tol)
    if result.method is Method.INDETERMINATE:
        logger.warning('tail mass above %g could not be bracketed: %s', y, result.bounds)
    return result.value


def mass_outside(m: LevyMeasure, r: float, tol: float = DEFAULT_TOLERANCE) -> float:
    """``m({|x| > r})``."""
    return integrate(m, lambda x: 1.0, outside(r), tol=tol).value


def finiteness(name: str, result: IntegralResult, note: str = '') -> Condition:
    """Condition stating that the integral behind `result` is finite."""
    if result.method is Method.INDETERMINATE:
        return Condition(
            name, result.value, math.inf, math.nan, result.abs_error_bound,
            Verdict.INDETERMINATE, False,
            note or f'quadrature could not bracket the integral within {result.bounds}')
    if result.method is Method.DIVERGENCE_DETECTED or math.isinf(result.value):
        return Condition(name, math.inf, math.inf, -math.inf, 0.0, Verdict.FAILS, False, note)
    return Condition(
        name, result.value, math.inf, math.inf, result.abs_error_bound, Verdict.HOLDS, False, note)


def validate_standing_assumptions(
        lambda1: LevyMeasure,
        lambda2: LevyMeasure,
        tol: float = DEFAULT_TOLERANCE) -> CriterionReport:
    """``∫(x² ∧ 1) Λ₁(dx) < ∞`` and ``∫(|y| ∧ 1) Λ₂(dy) < ∞``."""
    for name, value in (('lambda1', lambda1), ('lambda2', lambda2)):
        if not isinstance(value, LevyMeasure):
            raise ValidationError(f'{name}: not a LevyMeasure: {value!r}.')
    square = integrate(lambda1, lambda x: min(x * x, 1.0), tol=tol, breakpoints=(-1, 1))
    variation = integrate(lambda2, lambda y: min(abs(y), 1.0), tol=tol, breakpoints=(-1, 1))
    return CriterionReport('standing_assumptions', [
        finiteness('lambda1_square_integrable', square),
        finiteness('lambda2_bounded_variation', variation),
    ])
