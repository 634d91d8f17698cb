"""Branching Lévy processes with a finite atomic branching measure Π.

A particle moves as a Brownian motion with drift and carries an exponential
branch clock of total rate ``Σ rate``. At a branch event an atom
``(rate, x)`` is chosen with probability proportional to its rate; the
particle itself moves by ``x_1`` and children are born at offsets
``x_2, x_3, ...``. Entries at ``-inf`` are offspring that are never born, so
an atom whose sequence is all ``-inf`` kills the particle.

Labels follow the Ulam–Harris convention: the root is ``()`` and the n-th
child of ``u`` is ``u + (n,)``.
"""

import bisect
import collections
import math
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import daiquiri
import numpy as np

from .exceptions import ValidationError
from .exponents import (
    A_function, JointAtom, LevyTriplet, kappa, kappa_prime, kappa_prime_numeric, kappa_prime_richardson,
)
from .measures import DEFAULT_TOLERANCE, Interval, IntegralResult, Method, integrate
from .perpetuity import drift_report
from .reports import Condition, CriterionReport, Verdict, strictly_less
from .rng import map_indexed, stream
from .stats import RunningMoments, z_score
from .utils import ErrorMessageMixin, NEG_INF
from .validators import NonIncreasingValidator, RangeValidator

logger = daiquiri.getLogger(__name__)

MAX_PARTICLES = 10 ** 6
KAPPA_PRIME_AGREEMENT = 1e-5


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _compensated(x: float) -> bool:
    return -1 <= x <= 1


class BranchAtom(NamedTuple):
    """An atom of Π: `rate` and the finite entries of the sequence."""
    rate: float
    sequence: Tuple[float, ...]

    @classmethod
    def from_entries(cls, rate: float, entries: Iterable) -> 'BranchAtom':
        """Validate a ``-inf``-padded sequence and strip the padding.

        :raises ValidationError: If the sequence is empty, not non-increasing,
            or the rate is not positive.
        """
        rate = float(rate)
        if not (math.isfinite(rate) and rate > 0):
            raise ValidationError(f'rate: must be finite and positive, not {rate!r}.')
        try:
            entries = [
                NEG_INF if (e is NEG_INF or e == NEG_INF.token or (isinstance(e, float) and e == -math.inf))
                else float(e)
                for e in entries]
        except (TypeError, ValueError) as e:
            raise ValidationError(f'sequence: {e}') from e
        for entry in entries:
            if entry is not NEG_INF and not math.isfinite(entry):
                raise ValidationError(f'sequence: entries must be real or -inf, not {entry!r}.')
        NonIncreasingValidator()(entries)
        return cls(rate, tuple(e for e in entries if e is not NEG_INF))

    @property
    def entries(self) -> Tuple:
        """The sequence as loaded from a config, a killing atom being ``(-inf,)``."""
        return self.sequence or (NEG_INF,)


class BranchingChars(ErrorMessageMixin):
    """Characteristics ``(σ², a, Π)`` and the fixed parameter θ.

    :param pi: :class:`BranchAtom` values or ``(rate, entries)`` pairs.
    """
    error_messages = {
        'sigma2': 'sigma2: must be finite and >= 0, not {value!r}.',
        'a': 'a: must be finite, not {value!r}.',
        'theta': 'theta: must be finite and > 0, not {value!r}.',
    }

    def __init__(self, sigma2: float = 0.0, a: float = 0.0, pi: Iterable = (), theta: float = 1.0):
        self.sigma2 = float(sigma2)
        self.a = float(a)
        self.theta = float(theta)
        atoms = []
        for index, atom in enumerate(pi):
            try:
                if not isinstance(atom, BranchAtom):
                    atom = BranchAtom.from_entries(*atom)
                else:
                    atom = BranchAtom.from_entries(atom.rate, atom.entries)
            except ValidationError as e:
                raise ValidationError(f'pi[{index}]: {e.msg}') from e
            atoms.append(atom)
        self.pi: Tuple[BranchAtom, ...] = tuple(atoms)

        if not math.isfinite(self.sigma2) or self.sigma2 < 0:
            raise self.error('sigma2', value=self.sigma2)
        if not math.isfinite(self.a):
            raise self.error('a', value=self.a)
        if not math.isfinite(self.theta) or self.theta <= 0:
            raise self.error('theta', value=self.theta)

    @property
    def total_rate(self) -> float:
        return math.fsum(atom.rate for atom in self.pi)

    def __eq__(self, other):
        if not isinstance(other, BranchingChars):
            return NotImplemented
        return (self.sigma2, self.a, self.pi, self.theta) == (other.sigma2, other.a, other.pi, other.theta)

    def __hash__(self):
        return hash((self.sigma2, self.a, self.pi, self.theta))

    def __repr__(self):
        return (f'BranchingChars(sigma2={self.sigma2!r}, a={self.a!r}, '
                f'pi={list(self.pi)!r}, theta={self.theta!r})')


def validate_branching(c: BranchingChars) -> CriterionReport:
    """``∫(x_1² ∧ 1) Π(dx) < ∞`` and ``∫ Σ_k e^{θx_k} 1_{(1,∞)}(x_1) Π(dx) < ∞``.
    Both are finite sums for an atomic Π."""
    levy = math.fsum(atom.rate * min(atom.sequence[0] ** 2, 1.0) for atom in c.pi if atom.sequence)
    moment = math.fsum(
        atom.rate * math.fsum(_exp(c.theta * x) for x in atom.sequence)
        for atom in c.pi if atom.sequence and atom.sequence[0] > 1)

    def finite(name, value):
        if math.isfinite(value):
            return Condition(name, value, math.inf, math.inf, 0.0, Verdict.HOLDS)
        return Condition(name, value, math.inf, -math.inf, 0.0, Verdict.FAILS)

    return CriterionReport('branching_assumptions', [
        finite('first_jump_square_integrable', levy),
        finite('exponential_moment', moment),
    ], values={'exponential_moment': moment})


# population

class Particle:
    """One individual. ``knots`` are ``(time, left, right)`` positions at the
    birth, at every branch event and at the observation times; ``left`` and
    ``right`` differ only where the particle jumped."""
    __slots__ = ('label', 'birth_time', 'birth_position', 'death_time', 'pruned', 'knots', 'n_children')

    def __init__(self, label: Tuple[int, ...], birth_time: float, birth_position: float):
        self.label = label
        self.birth_time = birth_time
        self.birth_position = birth_position
        self.death_time: Optional[float] = None
        self.pruned = False
        self.knots: List[Tuple[float, float, float]] = [(birth_time, birth_position, birth_position)]
        self.n_children = 0

    def alive_at(self, t: float) -> bool:
        return self.birth_time <= t and (self.death_time is None or t < self.death_time)

    def __repr__(self):
        return f'Particle(label={self.label!r}, birth_time={self.birth_time!r})'


def format_label(label: Tuple[int, ...]) -> str:
    return '.'.join(str(n) for n in label) if label else 'root'


class PopulationTree:
    """Particles of one simulated branching Lévy process on ``[0, horizon]``.

    ``pruned_mass[t]`` is the summed martingale weight of particles removed
    by pruning at or before the observation time ``t``.
    """

    def __init__(
            self,
            chars: BranchingChars,
            horizon: float,
            particles: List[Particle],
            truncated: bool,
            pruned_mass: Dict[float, float],
            seed: int,
            key: tuple = ()):
        self.chars = chars
        self.horizon = horizon
        self.particles = particles
        self.truncated = truncated
        self.pruned_mass = pruned_mass
        self.seed = seed
        self.key = key

    def alive(self, t: float) -> List[Particle]:
        self._check_time(t)
        return [u for u in self.particles if u.alive_at(t)]

    def _check_time(self, t: float):
        if not 0 <= t <= self.horizon:
            raise ValidationError(f'Time {t!r} is outside [0, {self.horizon!r}].')

    def position_at(self, particle: Particle, t: float) -> float:
        """``X_t(u)``; between knots a Brownian bridge is drawn from a stream
        keyed by the label and `t`, so repeated calls agree."""
        if not particle.alive_at(t):
            raise ValidationError(f'{particle!r} is not alive at {t!r}.')
        times = [knot[0] for knot in particle.knots]
        index = bisect.bisect_right(times, t) - 1
        s0, _, right = particle.knots[index]
        if s0 == t:
            return right
        s1, left, _ = particle.knots[index + 1]
        mean = right + (t - s0) / (s1 - s0) * (left - right)
        if self.chars.sigma2 == 0:
            return mean
        rng = stream(self.seed, 'bridge', *self.key, *particle.label, t)
        std = math.sqrt(self.chars.sigma2 * (t - s0) * (s1 - t) / (s1 - s0))
        return mean + std * float(rng.standard_normal())

    def size(self, t: float) -> int:
        return len(self.alive(t))

    def additive_sum(self, z: float, t: float) -> float:
        """``Σ_{u ∈ N_t} e^{z X_t(u)}``."""
        return math.fsum(_exp(z * self.position_at(u, t)) for u in self.alive(t))


def particle_drift(c: BranchingChars) -> float:
    """Drift of the motion between branch events. The jumps by ``x_1`` are
    left uncompensated, so ``a`` loses ``Σ rate · x_1 1_{[-1,1]}(x_1)``."""
    return c.a - math.fsum(
        atom.rate * atom.sequence[0] for atom in c.pi
        if atom.sequence and _compensated(atom.sequence[0]))


def simulate_population(
        c: BranchingChars,
        T: float,
        max_particles: int = MAX_PARTICLES,
        seed: int = 0,
        times: Iterable[float] = (),
        prune_below: Optional[float] = None,
        key: tuple = ()) -> PopulationTree:
    """Simulate the population on ``[0, T]``.

    Positions are recorded exactly at the branch events, at `times` and at
    `T`. Once `max_particles` individuals exist no more are created and the
    tree is flagged as truncated. With `prune_below`, a particle whose
    weight ``e^{θX_s(u) − sκ(θ)}`` drops below the threshold at a knot or at
    birth is removed and its weight is credited to ``pruned_mass``.
    """
    if not T >= 0:
        raise ValidationError(f'Argument "T" must be >= 0, not {T!r}.')
    RangeValidator(1, None)(max_particles)
    observe = sorted({float(s) for s in times if 0 < s <= T} | {float(T)})
    rng = stream(seed, 'population', *key)

    theta = c.theta
    kappa_theta = kappa(c, theta)
    drift = particle_drift(c)
    sigma = math.sqrt(c.sigma2)
    total = c.total_rate
    probabilities = np.array([atom.rate for atom in c.pi]) / total if total > 0 else None
    pruned_mass = dict.fromkeys(observe, 0.0)

    def move(x, dt):
        return x + drift * dt + sigma * math.sqrt(dt) * float(rng.standard_normal())

    def prune(s, x):
        if prune_below is None:
            return False
        weight = _exp(theta * x - s * kappa_theta)
        if weight >= prune_below:
            return False
        for obs in observe:
            if obs >= s:
                pruned_mass[obs] += weight
        return True

    root = Particle((), 0.0, 0.0)
    particles = [root]
    queue = collections.deque([root])
    truncated = False

    while queue:
        u = queue.popleft()
        s, x = u.birth_time, u.birth_position
        while True:
            tau = s + float(rng.exponential(1 / total)) if total > 0 else math.inf
            removed = False
            for obs in observe:
                if s < obs < tau:
                    x = move(x, obs - s)
                    s = obs
                    u.knots.append((s, x, x))
                    if prune(s, x):
                        removed = True
                        break
            if removed:
                u.death_time, u.pruned = s, True
                break
            if tau > T:
                break

            left = move(x, tau - s)
            s = tau
            atom = c.pi[int(rng.choice(len(c.pi), p=probabilities))]
            if not atom.sequence:
                u.knots.append((s, left, left))
                u.death_time = s
                break
            x = left + atom.sequence[0]
            u.knots.append((s, left, x))
            for offset in atom.sequence[1:]:
                if len(particles) >= max_particles:
                    truncated = True
                    break
                label = u.label + (u.n_children,)
                u.n_children += 1
                if prune(s, left + offset):
                    continue
                child = Particle(label, s, left + offset)
                particles.append(child)
                queue.append(child)
            if prune(s, x):
                u.death_time, u.pruned = s, True
                break

    if truncated:
        logger.warning('population truncated at %d particles (seed=%r, key=%r)', max_particles, seed, key)
    return PopulationTree(c, float(T), particles, truncated, pruned_mass, seed, tuple(key))


def biggins_W(tree: PopulationTree, t: float, include_pruned: bool = False) -> float:
    """``W_t = Σ_{u ∈ N_t} e^{θX_t(u) − tκ(θ)}``.

    A truncated tree gives a lower bound. With `include_pruned` the pruned
    weight is added back, which keeps the value unbiased.
    """
    c = tree.chars
    offset = t * kappa(c, c.theta)
    value = math.fsum(_exp(c.theta * tree.position_at(u, t) - offset) for u in tree.alive(t))
    if include_pruned:
        value += tree.pruned_mass.get(float(t), 0.0)
    return value


class MartingaleTrace(NamedTuple):
    times: Tuple[float, ...]
    mean: Tuple[float, ...]
    std_error: Tuple[float, ...]
    median: Tuple[float, ...]
    n_trees: int
    n_truncated: int

    def rows(self) -> List[Tuple[float, float]]:
        return sorted(zip(self.times, self.mean))


def martingale_trace(
        c: BranchingChars,
        times: Sequence[float],
        n_trees: int,
        seed: int = 0,
        max_particles: int = MAX_PARTICLES,
        prune_below: Optional[float] = None,
        threads: int = 1) -> MartingaleTrace:
    """Monte Carlo mean, standard error and median of ``W_t`` over the
    observation `times`, one batch of trees for all times. Truncated trees
    are excluded."""
    times = tuple(sorted({float(s) for s in times}))
    if not times or times[0] < 0:
        raise ValidationError('Argument "times" must be non-empty and non-negative.')
    horizon = times[-1]

    def one(index):
        tree = simulate_population(c, horizon, max_particles, seed, times, prune_below, key=(index,))
        return tree.truncated, [biggins_W(tree, t) for t in times]

    results = map_indexed(one, n_trees, threads)
    kept = np.array([values for truncated, values in results if not truncated], dtype=float)
    n_truncated = sum(truncated for truncated, _ in results)
    if n_truncated:
        logger.warning('%d of %d trees truncated and excluded from the trace', n_truncated, n_trees)
    if kept.size == 0:
        nan = (math.nan,) * len(times)
        return MartingaleTrace(times, nan, nan, nan, n_trees, n_truncated)
    moments = [RunningMoments.from_values(kept[:, i]) for i in range(len(times))]
    return MartingaleTrace(
        times,
        tuple(m.mean for m in moments),
        tuple(m.std_error for m in moments),
        tuple(float(v) for v in np.median(kept, axis=0)),
        n_trees, n_truncated)


class MonteCarloCheck(NamedTuple):
    """A Monte Carlo estimate against a target value."""
    estimate: float
    std_error: float
    target: float
    target_std_error: float
    z_score: float
    n_samples: int
    n_truncated: int

    @property
    def flagged(self) -> bool:
        return self.n_truncated > 0

    def as_dict(self) -> dict:
        data = self._asdict()
        data['flagged'] = self.flagged
        return data


def verify_many_to_one(
        c: BranchingChars,
        z: float,
        t: float,
        n_samples: int,
        seed: int = 0,
        max_particles: int = MAX_PARTICLES,
        threads: int = 1) -> MonteCarloCheck:
    """``E Σ_{u ∈ N_t} e^{z X_t(u)}`` by simulation against ``e^{tκ(z)}``."""
    rhs = kappa(c, z)
    if not math.isfinite(rhs):
        raise ValidationError(f'kappa({z!r}) is not finite.')
    rhs = _exp(t * rhs)

    def one(index):
        tree = simulate_population(c, t, max_particles, seed, (t,), key=(index,))
        return tree.truncated, tree.additive_sum(z, t)

    results = map_indexed(one, n_samples, threads)
    n_truncated = sum(truncated for truncated, _ in results)
    if n_truncated:
        logger.warning('many-to-one: %d of %d trees truncated and excluded', n_truncated, n_samples)
    moments = RunningMoments.from_values([value for truncated, value in results if not truncated])
    return MonteCarloCheck(
        moments.mean, moments.std_error, rhs, 0.0,
        z_score(moments.mean, moments.std_error, rhs), n_samples, n_truncated)


# spine

def hat_a(c: BranchingChars) -> float:
    """Drift of the spine: ``a + θσ² + Σ rate (Σ_k x_k e^{θx_k} 1_{[-1,1]}(x_k)
    − x_1 1_{[-1,1]}(x_1))``."""
    theta = c.theta
    total = c.a + theta * c.sigma2
    for atom in c.pi:
        x = atom.sequence
        if not x:
            continue
        term = math.fsum(xk * _exp(theta * xk) for xk in x if _compensated(xk))
        if _compensated(x[0]):
            term -= x[0]
        total += atom.rate * term
    return total


def _spine_events(c: BranchingChars):
    """``(atom, k, rate · e^{θx_k})`` for every atom of the tilted measure."""
    return [
        (atom, k, atom.rate * _exp(c.theta * xk))
        for atom in c.pi for k, xk in enumerate(atom.sequence)]


def spine_measures(c: BranchingChars) -> LevyTriplet:
    """Triplet of ``X = −θξ̂ + tκ(θ)`` with ``Z`` collecting
    ``Σ_{j≠k} e^{θx_j}`` at each spine event.

    Each spine event ``(x, k)`` becomes a coupled jump
    ``(−θx_k, Σ_{j≠k} e^{θx_j})``. Events moving neither X nor Z are dropped
    and equal jumps are merged. The drift keeps the ``1_{[-1,1]}``
    compensation of X's own jumps ``−θx_k``.
    """
    theta = c.theta
    kappa_theta = kappa(c, theta)
    joint: Dict[Tuple[float, float], float] = {}
    correction = 0.0
    for atom, k, rate in _spine_events(c):
        x = atom.sequence
        xk = x[k]
        if _compensated(xk):
            correction += rate * xk
        if _compensated(theta * xk):
            correction -= rate * xk
        i = -theta * xk + 0.0
        y = math.fsum(_exp(theta * xj) for j, xj in enumerate(x) if j != k)
        if i == 0 and y == 0:
            continue
        joint[(i, y)] = joint.get((i, y), 0.0) + rate

    b = -theta * hat_a(c) + kappa_theta + theta * correction
    return LevyTriplet(
        v2=theta * theta * c.sigma2,
        b=b,
        joint=[JointAtom(i, y, rate) for (i, y), rate in joint.items()])


def offspring_tail_A(c: BranchingChars, y: float) -> float:
    """``A(y) = 1 + ∫ Σ_k e^{θx_k} ((−x_k) ∧ y − 1)_+ Π(dx)`` for ``y >= 1``."""
    if not y >= 1:
        raise ValidationError(f'Argument "y" must be >= 1, not {y!r}.')
    return 1.0 + math.fsum(
        rate * max(min(-atom.sequence[k], y) - 1.0, 0.0)
        for atom, k, rate in _spine_events(c))


def _offspring_weight(c: BranchingChars, atom: BranchAtom, k: int) -> float:
    return math.fsum(_exp(c.theta * xj) for j, xj in enumerate(atom.sequence) if j != k)


def ui_integral(c: BranchingChars) -> float:
    """``∫ Σ_k e^{θx_k} log w_k / A(log w_k) 1_{(e,∞)}(w_k) Π(dx)`` with
    ``w_k = Σ_{j≠k} e^{θx_j}``, summed term by term."""
    terms = []
    for atom, k, rate in _spine_events(c):
        w = _offspring_weight(c, atom, k)
        if w > math.e:
            log_w = math.log(w)
            terms.append(rate * log_w / offspring_tail_A(c, log_w))
    return math.fsum(terms)


def ui_integral_via_spine(c: BranchingChars, tol: float = DEFAULT_TOLERANCE) -> IntegralResult:
    """The same finiteness question phrased on the spine perpetuity:
    ``∫_{(e,∞)} log y / A(log y) Λ₂(dy)`` with ``A`` built from the spine's
    jump measure."""
    t = spine_measures(c)
    lambda1 = t.marginal_x
    return integrate(
        t.marginal_y,
        lambda y: math.log(y) / A_function(lambda1, math.log(y), tol),
        Interval(math.e, math.inf), tol=tol)


def _finite_sum(name: str, value: float) -> Condition:
    if math.isfinite(value):
        return Condition(name, value, math.inf, math.inf, 0.0, Verdict.HOLDS)
    return Condition(name, value, math.inf, -math.inf, 0.0, Verdict.FAILS)


def check_ui_criterion(c: BranchingChars, tol: float = DEFAULT_TOLERANCE) -> CriterionReport:
    """Uniform integrability of the Biggins martingale: ``θξ_t − tκ(θ) → −∞``
    a.s. and the offspring integral is finite."""
    spine = spine_measures(c)
    drift = drift_report(spine, tol)._replace(name='spine_drift')
    theta = c.theta
    kappa_theta = kappa(c, theta)
    analytic = kappa_prime(c, theta)
    numeric = kappa_prime_numeric(c, theta)
    richardson = kappa_prime_richardson(c, theta)

    notes = [drift.note] if drift.note else []
    if abs(analytic - numeric) > KAPPA_PRIME_AGREEMENT * max(1.0, abs(analytic)):
        notes.append(f'kappa_prime: analytic {analytic!r} and central difference {numeric!r} disagree')
    via_spine = ui_integral_via_spine(c, tol)
    if via_spine.method is not Method.INDETERMINATE and via_spine.is_finite != math.isfinite(ui_integral(c)):
        notes.append('offspring integral and its spine reformulation disagree on finiteness')

    return CriterionReport('uniform_integrability', [
        drift,
        _finite_sum('offspring_integral', ui_integral(c)),
    ], notes=notes, values={
        'kappa_theta': kappa_theta,
        'kappa_prime_theta': analytic,
        'kappa_prime_numeric': numeric,
        'kappa_prime_richardson': richardson,
        'theta_kappa_prime_minus_kappa': theta * analytic - kappa_theta,
        'offspring_integral_via_spine': via_spine.value,
    })


def check_lp_criterion(c: BranchingChars, p: float, tol: float = DEFAULT_TOLERANCE) -> CriterionReport:
    """``L_p`` convergence for ``p ∈ (1, 2]``: ``κ(pθ) < pκ(θ)`` and
    ``∫ Σ_k e^{θx_k} w_k^{p−1} 1_{(e,∞)}(w_k) Π(dx) < ∞``."""
    RangeValidator(1, 2, exclusive_minimum=True)(p)
    theta = c.theta
    kappa_p = kappa(c, p * theta)
    kappa_theta = kappa(c, theta)
    terms = []
    for atom, k, rate in _spine_events(c):
        w = _offspring_weight(c, atom, k)
        if w > math.e:
            terms.append(rate * w ** (p - 1))
    return CriterionReport('lp_convergence', [
        strictly_less('kappa_convexity', kappa_p, p * kappa_theta, tol),
        _finite_sum('offspring_moment', math.fsum(terms)),
    ], values={'p': p, 'kappa_p_theta': kappa_p, 'p_kappa_theta': p * kappa_theta})


class SpineEvent(NamedTuple):
    time: float
    position_left: float
    k: int
    sequence: Tuple[float, ...]
    offspring: Tuple[float, ...]


class SpineRealization(NamedTuple):
    """One spine on ``[0, horizon]``. ``partial_sums`` are the spine
    perpetuity ``S_t`` right after each event."""
    horizon: float
    theta: float
    kappa_theta: float
    final_position: float
    events: Tuple[SpineEvent, ...]
    partial_sums: Tuple[float, ...]

    @property
    def S(self) -> float:
        return self.partial_sums[-1] if self.partial_sums else 0.0

    @property
    def w_star(self) -> float:
        """``e^{θξ̂_T − Tκ(θ)} + S_T``, the conditional mean of ``W_T`` given the spine."""
        return _exp(self.theta * self.final_position - self.horizon * self.kappa_theta) + self.S


def simulate_spine(c: BranchingChars, T: float, seed: int = 0, key: tuple = ()) -> SpineRealization:
    """Sample the spine under the size-biased law.

    Events arrive at rate ``Σ rate Σ_k e^{θx_k}`` and pick ``(x, k)`` with
    probability proportional to ``rate · e^{θx_k}``. The spine moves by
    ``x_k``; the other entries are the offspring ``Ω_s``.
    """
    if not T >= 0:
        raise ValidationError(f'Argument "T" must be >= 0, not {T!r}.')
    rng = stream(seed, 'spine', *key)
    theta = c.theta
    kappa_theta = kappa(c, theta)
    choices = _spine_events(c)
    rates = np.array([rate for _, _, rate in choices])
    total = float(rates.sum()) if choices else 0.0
    # jumps by x_k are drawn uncompensated
    drift = hat_a(c) - math.fsum(
        rate * atom.sequence[k] for atom, k, rate in choices if _compensated(atom.sequence[k]))
    sigma = math.sqrt(c.sigma2)

    count = int(rng.poisson(total * T)) if total > 0 else 0
    times = np.sort(rng.uniform(0.0, T, size=count))
    position, now, S = 0.0, 0.0, 0.0
    events, partial_sums = [], []
    for tau in times:
        tau = float(tau)
        left = position + drift * (tau - now) + sigma * math.sqrt(tau - now) * float(rng.standard_normal())
        atom, k, _ = choices[int(rng.choice(len(choices), p=rates / total))]
        offspring = tuple(xj for j, xj in enumerate(atom.sequence) if j != k)
        S += _exp(theta * left - tau * kappa_theta) * math.fsum(_exp(theta * z) for z in offspring)
        position, now = left + atom.sequence[k], tau
        events.append(SpineEvent(tau, left, k, atom.sequence, offspring))
        partial_sums.append(S)
    final = position + drift * (T - now) + sigma * math.sqrt(T - now) * float(rng.standard_normal())
    return SpineRealization(float(T), theta, kappa_theta, final, tuple(events), tuple(partial_sums))


def check_spine_identity(
        c: BranchingChars,
        t: float,
        n_samples: int,
        seed: int = 0,
        max_particles: int = MAX_PARTICLES,
        threads: int = 1) -> MonteCarloCheck:
    """Size-bias cross-check ``Ê W*_t = E W_t²``: the spine-side mean of
    ``W*_t`` against the population-side mean of ``W_t²``, both by
    simulation; the z-score uses the joint standard error."""
    spines = map_indexed(lambda i: simulate_spine(c, t, seed, key=(i,)).w_star, n_samples, threads)
    lhs = RunningMoments.from_values(spines)

    def squared(index):
        tree = simulate_population(c, t, max_particles, seed, (t,), key=(index,))
        return tree.truncated, biggins_W(tree, t) ** 2

    results = map_indexed(squared, n_samples, threads)
    n_truncated = sum(truncated for truncated, _ in results)
    if n_truncated:
        logger.warning('spine identity: %d of %d trees truncated and excluded', n_truncated, n_samples)
    rhs = RunningMoments.from_values([value for truncated, value in results if not truncated])
    joint = math.hypot(lhs.std_error, rhs.std_error)
    return MonteCarloCheck(
        lhs.mean, lhs.std_error, rhs.mean, rhs.std_error,
        z_score(lhs.mean, joint, rhs.mean), n_samples, n_truncated)


def population_rows(tree: PopulationTree, t: float) -> List[list]:
    """Snapshot of ``N_t`` as ``label,birth_time,position_at_t`` rows, header first."""
    rows = [['label', 'birth_time', 'position_at_t']]
    for u in tree.alive(t):
        rows.append([format_label(u.label), u.birth_time, tree.position_at(u, t)])
    return rows
