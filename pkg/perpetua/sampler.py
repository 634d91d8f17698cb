"""Sampling of the bivariate Lévy process (X, Z) and of the embedding pair
``(M★, Q★) = (e^{-X_1}, ∫_{[0,1]} e^{-X_{s-}} dZ_s)``.

Jumps come from a compound Poisson source: every atom of ``Λ₁``, ``Λ₂``
and of the coupled part, plus the density pieces restricted to
``{|x| > eps}``. The density jumps inside ``[-1, 1]`` are compensated
through the drift; the density mass below `eps` is dropped, and the bias
this causes is reported by :func:`small_jump_bias`.
"""

import math
from typing import List, NamedTuple, Optional, Tuple, Union

import daiquiri
import numpy as np

from .exceptions import ValidationError
from .exponents import LevyTriplet
from .measures import DensityPiece, LevyMeasure, inside, integrate
from .rng import SeedLike, as_generator

logger = daiquiri.getLogger(__name__)

DEFAULT_EPS = 1e-3
STEPS_PER_UNIT = 2 ** 10


class Jump(NamedTuple):
    time: float
    i: float
    j: float


class PathSkeleton(NamedTuple):
    """A sampled trajectory on ``[0, T]``.

    ``times`` are the grid and jump times; ``x_values`` and ``z_values`` are
    the (right-continuous) values there and ``x_left`` the left limits,
    which differ from ``x_values`` only at jump times.
    """
    horizon: float
    times: np.ndarray
    x_values: np.ndarray
    x_left: np.ndarray
    z_values: np.ndarray
    jumps: Tuple[Jump, ...]
    truncation_eps: float
    seed: Optional[int]


class EmbeddingPair(NamedTuple):
    m_star: float
    q_star: float


class SmallJumpBias(NamedTuple):
    """Dropped small-jump activity: ``∫_{|y|<=eps} |y| Λ₂(dy)`` bounds the
    expected discarded Z variation per unit time, ``∫_{|x|<=eps} x² Λ₁(dx)``
    is the variance of the removed compensated X jumps."""
    eps: float
    z_variation: float
    x_variance: float

    def as_dict(self) -> dict:
        return self._asdict()


def small_jump_bias(t: LevyTriplet, eps: float = DEFAULT_EPS) -> SmallJumpBias:
    """Bias of the truncation at `eps`; atoms are never truncated."""
    def dropped(measure: LevyMeasure) -> LevyMeasure:
        return LevyMeasure(densities=measure.densities)

    if eps == 0:
        return SmallJumpBias(0.0, 0.0, 0.0)
    z = integrate(dropped(t.lambda2), abs, inside(eps)).value
    x = integrate(dropped(t.lambda1), lambda v: v * v, inside(eps)).value
    return SmallJumpBias(eps, z, x)


class JumpSource:
    """Compound Poisson source of ``(i, j)`` jump marks of a triplet."""

    def __init__(self, t: LevyTriplet, eps: float = DEFAULT_EPS):
        if not 0 <= eps <= 1:
            raise ValidationError(f'Argument "eps" must be in [0, 1], not {eps!r}.')
        if eps == 0 and (t.lambda1.infinite_activity or t.lambda2.infinite_activity):
            raise ValidationError(
                'eps = 0 with an infinite-activity density: pick eps > 0 '
                '(e.g. 1e-3) so the small jumps are truncated.')
        self.eps = eps

        marks, rates = [], []
        for location, mass in t.lambda1.atoms:
            marks.append((location, 0.0))
            rates.append(mass)
        for location, mass in t.lambda2.atoms:
            marks.append((0.0, location))
            rates.append(mass)
        for x, y, rate in t.joint:
            marks.append((x, y))
            rates.append(rate)
        self.atom_marks = np.array(marks, dtype=float).reshape(-1, 2)

        self.pieces = []
        compensation = 0.0
        for axis, measure in ((0, t.lambda1), (1, t.lambda2)):
            for piece in measure.densities:
                kept = piece.beyond(eps)
                if kept is None:
                    continue
                one = LevyMeasure(densities=[kept])
                mass = integrate(one, lambda v: 1.0).value
                if not math.isfinite(mass):
                    raise ValidationError(f'density piece {piece!r} has infinite mass beyond eps={eps}')
                self.pieces.append((kept, axis))
                rates.append(mass)
                if axis == 0:
                    compensation += integrate(one, lambda v: v, inside(1.0), breakpoints=(-1, 1)).value

        # atoms inside [-1, 1] are compensated exactly, as in the exponent
        for location, mass in t.marginal_x.atoms:
            if -1 <= location <= 1:
                compensation += location * mass
        self.drift = t.b - compensation
        self.rates = np.array(rates, dtype=float)
        self.total_rate = float(self.rates.sum())
        self.v = math.sqrt(t.v2)

    def draw(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Return an array of shape ``(count, 2)`` of ``(i, j)`` marks."""
        out = np.zeros((count, 2))
        if count == 0:
            return out
        component = rng.choice(self.rates.size, size=count, p=self.rates / self.total_rate)
        n_atoms = len(self.atom_marks)
        is_atom = component < n_atoms
        out[is_atom] = self.atom_marks[component[is_atom]]
        for index, (piece, axis) in enumerate(self.pieces):
            chosen = component == n_atoms + index
            size = int(chosen.sum())
            if size:
                out[chosen, axis] = piece.sample(rng, size)
        return out


def _source(t: Union[LevyTriplet, JumpSource], eps: float) -> JumpSource:
    return t if isinstance(t, JumpSource) else JumpSource(t, eps)


def sample_path(
        t: LevyTriplet,
        T: float,
        eps: float = DEFAULT_EPS,
        seed: SeedLike = 0,
        steps_per_unit: int = STEPS_PER_UNIT) -> PathSkeleton:
    """Sample ``(X, Z)`` on ``[0, T]`` on an equal-step grid plus the jump times."""
    if not T > 0:
        raise ValidationError(f'Argument "T" must be positive, not {T!r}.')
    source = _source(t, eps)
    rng = as_generator(seed)

    n_jumps = rng.poisson(source.total_rate * T) if source.total_rate > 0 else 0
    jump_times = np.sort(rng.uniform(0.0, T, size=n_jumps))
    marks = source.draw(rng, n_jumps)

    grid = np.linspace(0.0, T, int(math.ceil(T * steps_per_unit)) + 1)
    grid[-1] = T
    if T >= 1:
        grid = np.union1d(grid, [1.0])
    times = np.union1d(grid, jump_times)
    dt = np.diff(times)
    brownian = np.concatenate(([0.0], np.cumsum(rng.standard_normal(dt.size) * np.sqrt(dt))))
    continuous = source.drift * times + source.v * brownian

    position = np.searchsorted(times, jump_times)
    i_steps = np.zeros(times.size)
    j_steps = np.zeros(times.size)
    np.add.at(i_steps, position, marks[:, 0])
    np.add.at(j_steps, position, marks[:, 1])
    x_values = continuous + np.cumsum(i_steps)
    x_left = x_values - i_steps
    z_values = np.cumsum(j_steps)

    jumps = tuple(Jump(float(s), float(i), float(j)) for s, (i, j) in zip(jump_times, marks))
    return PathSkeleton(
        float(T), times, x_values, x_left, z_values, jumps, source.eps,
        seed if isinstance(seed, int) else None)


def embedding_pair(path: PathSkeleton) -> EmbeddingPair:
    """``(e^{-X_1}, Σ_{τ_k <= 1} e^{-X_{τ_k-}} j_k)`` read off a skeleton.
    Exact given the skeleton, since Z moves only by jumps."""
    if path.horizon < 1:
        raise ValidationError('The embedding pair needs a path of horizon >= 1.')
    index = dict((float(s), n) for n, s in enumerate(path.times))
    q_star = 0.0
    with np.errstate(over='ignore'):
        for jump in path.jumps:
            if jump.time <= 1 and jump.j != 0:
                q_star += float(np.exp(-path.x_left[index[jump.time]])) * jump.j
        one = int(np.searchsorted(path.times, 1.0))
        m_star = float(np.exp(-path.x_values[one]))
    return EmbeddingPair(m_star, q_star)


def sample_MQ(t: LevyTriplet, eps: float = DEFAULT_EPS, seed: SeedLike = 0) -> EmbeddingPair:
    """One embedding pair from a horizon-1 skeleton."""
    return embedding_pair(sample_path(t, 1.0, eps, seed))


def sample_MQ_batch(
        t: Union[LevyTriplet, JumpSource],
        size: int,
        rng: np.random.Generator,
        eps: float = DEFAULT_EPS) -> Tuple[np.ndarray, np.ndarray]:
    """`size` independent embedding pairs, vectorized.

    X is needed only at the jump times and at 1, so the Brownian part is
    sampled exactly there instead of on a grid.
    """
    source = _source(t, eps)
    counts = rng.poisson(source.total_rate, size) if source.total_rate > 0 else np.zeros(size, int)
    n = int(counts.sum())
    owner = np.repeat(np.arange(size), counts)
    times = rng.uniform(size=n)
    marks = source.draw(rng, n)
    order = np.lexsort((times, owner))
    times, marks = times[order], marks[order]

    starts = np.concatenate(([0], np.cumsum(counts)[:-1])).astype(int)
    first = starts[counts > 0]
    previous = np.empty(n)
    previous[1:] = times[:-1]
    previous[first] = 0.0
    increments = rng.standard_normal(n) * np.sqrt(times - previous)

    def within_group(values):
        running = np.cumsum(values)
        base = np.concatenate(([0.0], running))[starts]
        return running - np.repeat(base, counts)

    brownian = within_group(increments)
    jumps_before = within_group(marks[:, 0]) - marks[:, 0]
    x_left = source.drift * times + source.v * brownian + jumps_before

    last_brownian = np.zeros(size)
    last_time = np.zeros(size)
    has = counts > 0
    last = starts[has] + counts[has] - 1
    last_brownian[has] = brownian[last]
    last_time[has] = times[last]
    brownian_one = last_brownian + rng.standard_normal(size) * np.sqrt(1.0 - last_time)
    x_one = source.drift + source.v * brownian_one + np.bincount(
        owner, weights=marks[:, 0], minlength=size)

    with np.errstate(over='ignore', invalid='ignore'):
        paying = marks[:, 1] != 0
        payments = np.exp(-x_left[paying]) * marks[paying, 1]
        q_star = np.bincount(owner[paying], weights=payments, minlength=size)
        m_star = np.exp(-x_one)
    return m_star, q_star


def path_rows(path: PathSkeleton) -> List[list]:
    """A skeleton as ``time,X,Z,is_jump,i_k,j_k`` rows, header first."""
    steps = {jump.time: jump for jump in path.jumps}
    rows = [['time', 'X', 'Z', 'is_jump', 'i_k', 'j_k']]
    for s, x, z in zip(path.times, path.x_values, path.z_values):
        jump = steps.get(float(s))
        rows.append([
            float(s), float(x), float(z), int(jump is not None),
            jump.i if jump else 0.0, jump.j if jump else 0.0])
    return rows
