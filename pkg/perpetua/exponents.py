"""Analytic functions the criteria are phrased in.

The Laplace exponent ``ψ(p) = log E e^{-p X_1}`` of a :class:`LevyTriplet`,
the truncated-tail function ``A``, the cumulant ``κ`` of a branching Lévy
process and the spine exponent ``Ψ(s) = κ(θ + is) − κ(θ)``.

Sequences of :class:`~perpetua.branching.BranchAtom` store only their finite
entries, so an entry at ``-inf`` contributes nothing to any ``Σ e^{z x_k}``.
"""

import cmath
import math
from typing import Iterable, NamedTuple, Tuple, Union

import daiquiri
from scipy.optimize import brentq

from .exceptions import NumericError, ValidationError
from .measures import (
    DEFAULT_TOLERANCE, IntegralResult, LevyMeasure, Method, above, integrate,
    validate_standing_assumptions,
)
from .reports import Verdict
from .utils import ErrorMessageMixin

logger = daiquiri.getLogger(__name__)

KAPPA_STEP = 1e-6


class JointAtom(NamedTuple):
    """Coupled jump: X jumps by ``x`` and Z by ``y`` at the same time."""
    x: float
    y: float
    rate: float


class LevyTriplet(ErrorMessageMixin):
    """Characteristics ``(v², b, Λ₁)`` of X and ``Λ₂`` of the drift-free
    bounded-variation Z.

    Jumps of X and Z are independent (``lambda1``, ``lambda2``) except for
    the `joint` atoms, each of which moves both at once. The marginal jump
    measures are :attr:`marginal_x` and :attr:`marginal_y`.

    :raises ValidationError: If the standing assumptions fail.
    """
    error_messages = {
        'v2': 'v2: Brownian variance must be finite and >= 0, not {value!r}.',
        'b': 'b: drift must be finite, not {value!r}.',
        'joint': 'joint[{index}]: {reason}',
        'assumption': '{name}: standing assumption fails.',
    }

    def __init__(
            self,
            v2: float = 0.0,
            b: float = 0.0,
            lambda1: LevyMeasure = None,
            lambda2: LevyMeasure = None,
            joint: Iterable = ()):
        self.v2 = float(v2)
        self.b = float(b)
        self.lambda1 = lambda1 if lambda1 is not None else LevyMeasure()
        self.lambda2 = lambda2 if lambda2 is not None else LevyMeasure()
        self.joint: Tuple[JointAtom, ...] = tuple(JointAtom(*map(float, j)) for j in joint)
        self._check()

    def _check(self):
        if not math.isfinite(self.v2) or self.v2 < 0:
            raise self.error('v2', value=self.v2)
        if not math.isfinite(self.b):
            raise self.error('b', value=self.b)
        for index, (x, y, rate) in enumerate(self.joint):
            if not (math.isfinite(x) and math.isfinite(y)):
                raise self.error('joint', index=index, reason='jump sizes must be finite.')
            if x == 0 and y == 0:
                raise self.error('joint', index=index, reason='jump may not be (0, 0).')
            if not (math.isfinite(rate) and rate > 0):
                raise self.error('joint', index=index, reason='rate must be positive.')
        report = validate_standing_assumptions(self.marginal_x, self.marginal_y)
        for condition in report.components:
            if condition.verdict is Verdict.FAILS:
                raise self.error('assumption', name=condition.name)
            if condition.verdict is Verdict.INDETERMINATE:
                logger.warning('standing assumption %s could not be decided', condition.name)

    @property
    def marginal_x(self) -> LevyMeasure:
        extra = [(x, rate) for x, _, rate in self.joint if x != 0]
        return LevyMeasure(self.lambda1.atoms + tuple(extra), self.lambda1.densities)

    @property
    def marginal_y(self) -> LevyMeasure:
        extra = [(y, rate) for _, y, rate in self.joint if y != 0]
        return LevyMeasure(self.lambda2.atoms + tuple(extra), self.lambda2.densities)

    def __eq__(self, other):
        if not isinstance(other, LevyTriplet):
            return NotImplemented
        return (self.v2, self.b, self.lambda1, self.lambda2, self.joint) == \
            (other.v2, other.b, other.lambda1, other.lambda2, other.joint)

    def __hash__(self):
        return hash((self.v2, self.b, self.lambda1, self.lambda2, self.joint))

    def __repr__(self):
        return (f'LevyTriplet(v2={self.v2!r}, b={self.b!r}, lambda1={self.lambda1!r}, '
                f'lambda2={self.lambda2!r}, joint={list(self.joint)!r})')


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def laplace_exponent_result(t: LevyTriplet, p: float, tol: float = DEFAULT_TOLERANCE) -> IntegralResult:
    """``ψ(p)`` together with the quadrature record of its jump part."""
    if not p > 0:
        raise ValidationError(f'Argument "p" must be positive, not {p!r}.')

    def integrand(x):
        # e^{-px} - 1 + p x 1_{[-1,1]}(x)
        value = math.expm1(-p * x) if -p * x < 700 else math.inf
        if -1 <= x <= 1:
            value += p * x
        return value

    def log_abs_integrand(x):
        # only consulted for x < -1, where e^{-px} > 1
        return -p * x + math.log1p(-math.exp(p * x))

    jumps = integrate(t.marginal_x, integrand, tol=tol, breakpoints=(-1, 1),
                      log_abs_f=log_abs_integrand)
    gaussian = t.v2 * p * p / 2 - t.b * p
    if jumps.method is Method.DIVERGENCE_DETECTED:
        return IntegralResult(math.inf, math.inf, jumps.method, (math.inf, math.inf))
    if jumps.method is Method.INDETERMINATE:
        lower = gaussian + jumps.bounds[0]
        return IntegralResult(math.nan, math.inf, jumps.method, (lower, math.inf))
    value = gaussian + jumps.value
    return IntegralResult(value, jumps.abs_error_bound, jumps.method, (value, value))


def laplace_exponent_X(t: LevyTriplet, p: float, tol: float = DEFAULT_TOLERANCE) -> float:
    """``ψ(p) = log E e^{-p X_1}``; ``inf`` when the negative jumps make
    ``E e^{-p X_1}`` infinite and ``nan`` when quadrature is indeterminate."""
    return laplace_exponent_result(t, p, tol).value


def A_function(lambda1: LevyMeasure, x: float, tol: float = DEFAULT_TOLERANCE) -> float:
    """``A(x) = 1 + ∫_1^x Λ₁((y, ∞)) dy``, evaluated in the equivalent form
    ``1 + ∫ (x ∧ z − 1)₊ Λ₁(dz)`` so that atoms are summed exactly."""
    if not x >= 1:
        raise ValidationError(f'Argument "x" must be >= 1, not {x!r}.')
    if x == 1:
        return 1.0
    result = integrate(lambda1, lambda z: min(x, z) - 1.0, above(1.0), tol=tol, breakpoints=(x,))
    return 1.0 + result.value


# branching cumulant

Number = Union[float, complex]


def _atom_terms(sequence: Tuple[float, ...], z: Number) -> Number:
    """``Σ_k e^{z x_k} − 1 − z x₁ 1_{[-1,1]}(x₁)`` for one sequence."""
    if isinstance(z, complex):
        theta, s = z.real, z.imag
        real = imag = 0.0
        for x in sequence:
            scale = _exp(theta * x)
            real += scale * math.cos(s * x)
            imag += scale * math.sin(s * x)
        total = complex(real, imag) - 1
    else:
        total = math.fsum(_exp(z * x) for x in sequence) - 1
    if sequence and -1 <= sequence[0] <= 1:
        total -= z * sequence[0]
    return total


def kappa(chars, z: Number) -> Number:
    """Cumulant ``κ(z)`` of a branching Lévy process with finite atomic Π:
    ``σ²z²/2 + az + Σ rate (Σ_k e^{z x_k} − 1 − z x₁ 1_{[-1,1]}(x₁))``.

    Real `z` gives a float (``inf`` on overflow); complex `z` is assembled
    from ``cos``/``sin`` of ``Im z · x_k``.
    """
    value = chars.sigma2 * z * z / 2 + chars.a * z
    for atom in chars.pi:
        value += atom.rate * _atom_terms(atom.sequence, z)
    if isinstance(value, complex) and not cmath.isfinite(value):
        logger.warning('kappa diverges at z=%r', z)
    return value


def kappa_prime(chars, z: float) -> float:
    """``κ′(z) = σ²z + a + Σ rate (Σ_k x_k e^{z x_k} − x₁ 1_{[-1,1]}(x₁))``."""
    value = chars.sigma2 * z + chars.a
    for atom in chars.pi:
        x = atom.sequence
        term = math.fsum(xk * _exp(z * xk) for xk in x)
        if x and -1 <= x[0] <= 1:
            term -= x[0]
        value += atom.rate * term
    return value


def kappa_prime_numeric(chars, z: float, step: float = KAPPA_STEP) -> float:
    """Central difference of :func:`kappa`."""
    return (kappa(chars, z + step) - kappa(chars, z - step)) / (2 * step)


def kappa_prime_richardson(chars, z: float, step: float = KAPPA_STEP) -> float:
    """Richardson extrapolation of two central differences."""
    coarse = kappa_prime_numeric(chars, z, step)
    fine = kappa_prime_numeric(chars, z, step / 2)
    return (4 * fine - coarse) / 3


def psi_spine(chars, s: float) -> complex:
    """``Ψ(s) = κ(θ + is) − κ(θ)``."""
    theta = chars.theta
    if s == 0:
        return 0j
    return kappa(chars, complex(theta, s)) - kappa(chars, theta)


def critical_moment(
        t: LevyTriplet,
        p_max: float,
        tol: float = 1e-10,
        quad_tol: float = DEFAULT_TOLERANCE) -> float:
    """Root ``p*`` of ``ψ(p) = 0`` in ``(0, p_max]``.

    Returns ``None`` when ``ψ < 0`` on the whole range and ``0.0`` when ``ψ``
    is non-negative near 0, i.e. no positive moment of the perpetuity exists.

    :raises NumericError: If ``ψ`` is infinite on the whole range or cannot
        be evaluated at a point the root search visits.
    """
    if not p_max > 0:
        raise ValidationError(f'Argument "p_max" must be positive, not {p_max!r}.')
    psi = lambda p: laplace_exponent_X(t, p, quad_tol)

    top = psi(p_max)
    if math.isnan(top):
        raise NumericError(f'exponent could not be evaluated at p_max={p_max}')
    if top < 0:
        return None

    # ψ is convex with ψ(0) = 0, a negative value brackets the root
    lo = None
    finite_seen = math.isfinite(top)
    for k in range(1, 64):
        p = p_max * 2.0 ** -k
        value = psi(p)
        if math.isnan(value):
            raise NumericError(f'exponent could not be evaluated at p={p}')
        finite_seen = finite_seen or math.isfinite(value)
        if value < 0:
            lo = p
            break
    if not finite_seen:
        raise NumericError('exponent undefined: psi is infinite on the whole range')
    if lo is None:
        return 0.0

    def clipped(p):
        # ψ may jump to +inf past the edge of its domain
        value = psi(p)
        if math.isnan(value):
            raise NumericError(f'exponent could not be evaluated at p={p}')
        return value if value < 1.0 else 1.0

    root = brentq(clipped, lo, p_max, xtol=tol)
    logger.debug('critical moment %r from bracket [%r, %r]', root, lo, p_max)
    return root
