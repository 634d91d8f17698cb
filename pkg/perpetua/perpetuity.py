"""The Lévy-type perpetuity ``S = ∫_0^∞ e^{-X_{s-}} dZ_s``.

Finiteness and moment criteria are exact decisions on the triplet. The
Monte Carlo side iterates the affine recursion ``S ← Q + M S`` over
i.i.d. embedding pairs ``(M, Q)``: after ``n`` steps
``S_n = Σ_{k<=n} M_1 ⋯ M_{k-1} Q_k``, which has the law of the perpetuity
stopped at time ``n``.
"""

import math
from typing import Iterable, NamedTuple, Optional, Sequence, Tuple, Union

import daiquiri
import numpy as np

from .exceptions import NumericError, ValidationError
from .exponents import A_function, LevyTriplet, laplace_exponent_result
from .measures import (
    DEFAULT_TOLERANCE, Interval, Method, finiteness, integrate, outside,
)
from .reports import Condition, CriterionReport, Verdict, strictly_greater, strictly_less
from .rng import SeedLike, as_generator, map_chunks
from .sampler import DEFAULT_EPS, JumpSource, sample_MQ_batch
from .stats import BatchSpread, RunningMoments, batch_spread, merge_all

logger = daiquiri.getLogger(__name__)

N_MAX = 1000
CHECK_EVERY = 10
STOP_TOLERANCE = 1e-9
PATIENCE = 3
MIN_MOMENT_SAMPLES = 100


class PerpetuitySample(NamedTuple):
    value: float
    n_iterations: int
    pairs_seed: Optional[int]
    overflowed: bool = False


# pair sources

class PairSource:
    """Source of i.i.d. pairs ``(M, Q)``."""

    def draw(self, rng: np.random.Generator, size: int) -> Tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError


class LevyPairSource(PairSource):
    """Embedding pairs ``(e^{-X_1}, ∫_{[0,1]} e^{-X_{s-}} dZ_s)`` of a triplet."""

    def __init__(self, t: LevyTriplet, eps: float = DEFAULT_EPS):
        self.triplet = t
        self.jumps = JumpSource(t, eps)

    def draw(self, rng, size):
        return sample_MQ_batch(self.jumps, size, rng)


class ConstantPairSource(PairSource):
    def __init__(self, m: float, q: float):
        self.m = float(m)
        self.q = float(q)

    def draw(self, rng, size):
        return np.full(size, self.m), np.full(size, self.q)


class DiscretePairSource(PairSource):
    """Pairs drawn from finitely many outcomes ``(m, q, probability)``."""

    def __init__(self, outcomes: Iterable[Tuple[float, float, float]]):
        self.outcomes = _check_outcomes(outcomes)
        self._m = np.array([o[0] for o in self.outcomes])
        self._q = np.array([o[1] for o in self.outcomes])
        self._p = np.array([o[2] for o in self.outcomes])

    def draw(self, rng, size):
        index = rng.choice(self._p.size, size=size, p=self._p / self._p.sum())
        return self._m[index], self._q[index]


Source = Union[LevyTriplet, PairSource]


def as_pair_source(source: Source, eps: float = DEFAULT_EPS) -> PairSource:
    if isinstance(source, PairSource):
        return source
    if isinstance(source, LevyTriplet):
        return LevyPairSource(source, eps)
    raise ValidationError(f'Not a triplet or pair source: {source!r}.')


def _check_outcomes(outcomes) -> Tuple[Tuple[float, float, float], ...]:
    outcomes = tuple((float(m), float(q), float(p)) for m, q, p in outcomes)
    if not outcomes:
        raise ValidationError('A discrete pair law needs at least one outcome.')
    for index, (m, q, p) in enumerate(outcomes):
        if not (math.isfinite(m) and math.isfinite(q)):
            raise ValidationError(f'outcomes[{index}]: values must be finite.')
        if not p > 0:
            raise ValidationError(f'outcomes[{index}]: probability must be positive.')
    total = math.fsum(p for _, _, p in outcomes)
    if abs(total - 1) > 1e-12:
        raise ValidationError(f'Outcome probabilities sum to {total}, not 1.')
    return outcomes


# criteria

def drift_report(t: LevyTriplet, tol: float = DEFAULT_TOLERANCE) -> Condition:
    """Whether ``X_t → +∞`` a.s., decided on the mean of ``X_1``.

    With both tails integrable the sign of ``E X_1 = b + ∫_{|x|>1} x Λ₁(dx)``
    decides, ``E X_1 = 0`` failing (X oscillates). A non-integrable tail on one
    side forces ``E X_1 = ±∞``; with both tails non-integrable the mean is
    undefined and the condition is indeterminate.
    """
    measure = t.marginal_x
    positive = integrate(measure, lambda x: x, Interval(1.0, math.inf), tol=tol)
    negative = integrate(measure, lambda x: -x, Interval(-math.inf, -1.0), tol=tol)
    name = 'drift_to_infinity'
    if Method.INDETERMINATE in (positive.method, negative.method):
        return Condition(name, math.nan, 0.0, math.nan, tol, Verdict.INDETERMINATE, False,
                         'tail integrals of the jump measure could not be bracketed')
    up, down = math.isinf(positive.value), math.isinf(negative.value)
    if up and down:
        return Condition(name, math.nan, 0.0, math.nan, tol, Verdict.INDETERMINATE, False,
                         'E|X_1| is infinite with both tails non-integrable')
    if up:
        return Condition(name, math.inf, 0.0, math.inf, tol, Verdict.HOLDS, False,
                         'E X_1 = +inf')
    if down:
        return Condition(name, -math.inf, 0.0, -math.inf, tol, Verdict.FAILS, False,
                         'E X_1 = -inf')
    mean = t.b + positive.value - negative.value
    condition = strictly_greater(name, mean, 0.0, tol)
    if condition.boundary:
        condition = condition._replace(note='E X_1 = 0: X oscillates and does not drift to +inf')
    return condition


def check_as_finiteness(t: LevyTriplet, tol: float = DEFAULT_TOLERANCE) -> CriterionReport:
    """Almost sure convergence of the perpetuity: ``X_t → +∞`` and
    ``∫_{|y|>e} log|y| / A(log|y|) Λ₂(dy) < ∞``."""
    drift = drift_report(t, tol)
    lambda1 = t.marginal_x

    def integrand(y):
        log_y = math.log(abs(y))
        return log_y / A_function(lambda1, log_y, tol)

    integral = integrate(t.marginal_y, integrand, outside(math.e), tol=tol)
    return CriterionReport(
        'as_finiteness',
        [drift, finiteness('log_payment_integral', integral)],
        notes=[drift.note] if drift.note else (),
        values={'mean_X': drift.value})


def check_moment_finiteness(t: LevyTriplet, p: float, tol: float = DEFAULT_TOLERANCE) -> CriterionReport:
    """``E|S|^p < ∞`` iff ``E e^{-p X_1} < 1`` and ``∫_{|y|>1} |y|^p Λ₂(dy) < ∞``."""
    if not p > 0:
        raise ValidationError(f'Argument "p" must be positive, not {p!r}.')
    if t.marginal_y.is_trivial:
        return CriterionReport(
            'moment_finiteness', (),
            notes=['degenerate: Z has no jumps, so S = 0 and every moment is finite'],
            values={'p': p})

    psi = laplace_exponent_result(t, p, tol)
    exponent = strictly_less('laplace_exponent', psi.value, 0.0, tol)
    if psi.method is Method.INDETERMINATE:
        exponent = exponent._replace(note=f'exponent bracket {psi.bounds}')
    payments = integrate(t.marginal_y, lambda y: abs(y) ** p, outside(1.0), tol=tol)
    with np.errstate(over='ignore'):
        discount = float(np.exp(psi.value))
    return CriterionReport(
        'moment_finiteness',
        [exponent, finiteness('payment_moment', payments)],
        values={'p': p, 'laplace_exponent': psi.value, 'mean_discount_moment': discount})


def discrete_moment_criterion(
        outcomes: Iterable[Tuple[float, float, float]],
        p: float,
        tol: float = DEFAULT_TOLERANCE) -> CriterionReport:
    """Moment criterion for a perpetuity with a finite discrete pair law:
    ``E|S|^p < ∞`` iff ``E|M|^p < 1`` and ``E|Q|^p < ∞``, provided
    ``P{M = 0} = 0`` and ``P{Q + M r = r} < 1`` for every ``r``.
    """
    outcomes = _check_outcomes(outcomes)
    contraction = math.fsum(prob * abs(m) ** p for m, _, prob in outcomes)
    payments = math.fsum(prob * abs(q) ** p for _, q, prob in outcomes)

    reasons = []
    if any(m == 0 for m, _, _ in outcomes):
        reasons.append('P{M = 0} > 0')
    if all(q == 0 for _, q, _ in outcomes):
        reasons.append('Q = 0 almost surely')
    else:
        fixed = {q / (1 - m) for m, q, _ in outcomes if m != 1}
        unit_ok = all(q == 0 for m, q, _ in outcomes if m == 1)
        if unit_ok and len(fixed) == 1:
            reasons.append(f'Q = r(1 - M) almost surely with r = {fixed.pop()!r}')
    if reasons:
        degenerate = Condition('non_degenerate', math.nan, 0.0, math.nan, 0.0,
                               Verdict.INDETERMINATE, False, '; '.join(reasons))
    else:
        degenerate = Condition('non_degenerate', 0.0, 0.0, math.inf, 0.0, Verdict.HOLDS)

    return CriterionReport('discrete_moment_criterion', [
        strictly_less('contraction', contraction, 1.0, tol),
        Condition('payment_moment', payments, math.inf, math.inf, 0.0, Verdict.HOLDS),
        degenerate,
    ], values={'p': p})


def embedding_moment(t: LevyTriplet, p: float) -> float:
    """``E (M★)^p = E e^{-p X_1}`` by a Poisson series over the atoms of the
    jump measure, with the Gaussian factor in closed form.

    Independent of the exponent code path; only atomic jump measures.
    """
    measure = t.marginal_x
    if not measure.is_atomic:
        raise ValidationError('embedding_moment needs an atomic jump measure.')
    rate = math.fsum(mass for _, mass in measure.atoms)
    drift = t.b - math.fsum(x * mass for x, mass in measure.atoms if -1 <= x <= 1)
    log_value = t.v2 * p * p / 2 - p * drift
    if rate > 0:
        try:
            mean_jump = math.fsum(mass / rate * math.exp(-p * x) for x, mass in measure.atoms)
        except OverflowError:
            return math.inf
        mu = rate * mean_jump
        n_terms = int(mu + 40 * math.sqrt(mu) + 50)
        logs = [n * math.log(mu) - math.lgamma(n + 1) for n in range(n_terms)]
        top = max(logs)
        log_value += -rate + top + math.log(math.fsum(math.exp(v - top) for v in logs))
    try:
        return math.exp(log_value)
    except OverflowError:
        return math.inf


# Monte Carlo

def iterate_affine(
        source: Source,
        n: int,
        eps: float = DEFAULT_EPS,
        seed: SeedLike = 0) -> PerpetuitySample:
    """``S_n`` from `n` i.i.d. pairs of `source`.

    A sample whose running product leaves the float range stops at that
    step and comes back flagged, with a ``nan`` value.
    """
    if n < 1:
        raise ValidationError(f'Argument "n" must be >= 1, not {n!r}.')
    pairs = as_pair_source(source, eps)
    rng = as_generator(seed)
    value, product = 0.0, 1.0
    pairs_seed = seed if isinstance(seed, int) else None
    with np.errstate(over='ignore', invalid='ignore'):
        for step in range(1, n + 1):
            m, q = pairs.draw(rng, 1)
            value += product * float(q[0])
            product *= float(m[0])
            if not (math.isfinite(value) and math.isfinite(product)):
                logger.warning('perpetuity sample overflowed at step %d of %d', step, n)
                return PerpetuitySample(math.nan, step, pairs_seed, overflowed=True)
    return PerpetuitySample(value, n, pairs_seed)


class PerpetuityBatch(NamedTuple):
    values: np.ndarray
    iterations: np.ndarray
    n_overflow: int


def iterate_batch(
        pairs: PairSource,
        rng: np.random.Generator,
        size: int,
        n_iter: Optional[int] = None,
        n_max: int = N_MAX) -> PerpetuityBatch:
    """`size` independent ``S_n``. With `n_iter` None each sample stops once
    ``|S_{n+10} − S_n| < 1e-9`` at three consecutive checks, or at `n_max`.
    Samples that overflow are dropped and counted."""
    values = np.zeros(size)
    product = np.ones(size)
    iterations = np.zeros(size, dtype=int)
    active = np.ones(size, dtype=bool)
    overflow = np.zeros(size, dtype=bool)
    checkpoint = np.zeros(size)
    streak = np.zeros(size, dtype=int)
    steps = n_iter if n_iter is not None else n_max

    with np.errstate(over='ignore', invalid='ignore'):
        for n in range(1, steps + 1):
            index = np.flatnonzero(active)
            if index.size == 0:
                break
            m, q = pairs.draw(rng, index.size)
            values[index] += product[index] * q
            product[index] *= m
            iterations[index] = n

            bad = ~(np.isfinite(values[index]) & np.isfinite(product[index]))
            if bad.any():
                overflow[index[bad]] = True
                active[index[bad]] = False

            if n_iter is None and n % CHECK_EVERY == 0:
                index = np.flatnonzero(active)
                close = np.abs(values[index] - checkpoint[index]) < STOP_TOLERANCE
                streak[index] = np.where(close, streak[index] + 1, 0)
                checkpoint[index] = values[index]
                active[index[streak[index] >= PATIENCE]] = False

    n_overflow = int(overflow.sum())
    if n_overflow:
        logger.warning('%d of %d perpetuity samples overflowed and were excluded', n_overflow, size)
    return PerpetuityBatch(values[~overflow], iterations[~overflow], n_overflow)


def simulate_perpetuity(
        source: Source,
        n_samples: int,
        n_iter: Optional[int] = None,
        eps: float = DEFAULT_EPS,
        seed: int = 0,
        threads: int = 1) -> PerpetuityBatch:
    """`n_samples` perpetuity samples in seeded chunks."""
    pairs = as_pair_source(source, eps)
    chunks = map_chunks(
        lambda rng, size: iterate_batch(pairs, rng, size, n_iter),
        n_samples, seed, 'perpetuity', threads=threads)
    return PerpetuityBatch(
        np.concatenate([c.values for c in chunks]) if chunks else np.zeros(0),
        np.concatenate([c.iterations for c in chunks]) if chunks else np.zeros(0, int),
        sum(c.n_overflow for c in chunks))


class MomentEstimate(NamedTuple):
    p: float
    n_samples: int
    n_iter: Optional[int]
    estimate: float
    std_error: float
    stable: bool
    spread: BatchSpread
    n_overflow: int

    def as_dict(self) -> dict:
        data = self._asdict()
        data['spread'] = self.spread._asdict()
        return data


def estimate_abs_moment(
        source: Source,
        p: float,
        n_samples: int,
        n_iter: Optional[int] = None,
        eps: float = DEFAULT_EPS,
        seed: int = 0,
        threads: int = 1) -> MomentEstimate:
    """Sample mean of ``|S_{n_iter}|^p`` with its standard error and a
    four-batch stability diagnostic.

    :raises NumericError: If every sample overflowed.
    """
    if n_samples < MIN_MOMENT_SAMPLES:
        raise ValidationError(f'Argument "n_samples" must be >= {MIN_MOMENT_SAMPLES}.')
    if not p > 0:
        raise ValidationError(f'Argument "p" must be positive, not {p!r}.')
    pairs = as_pair_source(source, eps)

    def chunk(rng, size):
        batch = iterate_batch(pairs, rng, size, n_iter)
        with np.errstate(over='ignore'):
            powers = np.abs(batch.values) ** p
        return powers, RunningMoments.from_values(powers), batch.n_overflow

    # same streams as simulate_perpetuity
    chunks = map_chunks(chunk, n_samples, seed, 'perpetuity', threads=threads)
    powers, parts, overflows = zip(*chunks)
    n_overflow = sum(overflows)
    moments = merge_all(parts)
    if moments.count == 0:
        raise NumericError('every perpetuity sample overflowed', detail=n_overflow)
    powers = np.concatenate(powers)
    spread = batch_spread(powers)
    if not spread.stable:
        logger.warning('moment p=%g unstable: batch spread %g exceeds 10 standard errors (%g)',
                       p, spread.spread, spread.pooled_std_error)
    return MomentEstimate(
        p, n_samples, n_iter, moments.mean, moments.std_error, spread.stable, spread, n_overflow)


def hill_tail_index(samples: Sequence[float], k: int) -> float:
    """Hill estimator ``k / Σ_{i<=k} log(|S|_{(n-i+1)} / |S|_{(n-k)})``.

    :raises ValidationError: With fewer than ``k + 1`` positive samples.
    :raises NumericError: If the top order statistics are all equal.
    """
    x = np.abs(np.asarray(samples, dtype=float))
    x = x[np.isfinite(x) & (x > 0)]
    if k < 1 or x.size < k + 1:
        raise ValidationError(f'Hill estimator needs at least k + 1 = {k + 1} positive samples.')
    top = np.sort(x)[::-1][:k + 1]
    total = float(np.log(top[:k] / top[k]).sum())
    if total <= 0:
        raise NumericError('Hill estimator is degenerate: the top order statistics are equal')
    return k / total


def default_hill_k(n: int) -> int:
    return max(10, n // 100)
