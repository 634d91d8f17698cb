import math
from unittest import TestCase

import numpy as np

from perpetua.exceptions import ValidationError
from perpetua.measures import (
    LevyMeasure, DensityPiece, PowerDensity, ExponentialDensity, TemperedStableDensity,
    Method, Interval, above, outside, inside, make_family, integrate, tail_mass,
    mass_outside, validate_standing_assumptions,
)
from perpetua.reports import Verdict


class MeasureTest(TestCase):
    def test_errors(self):
        with self.assertRaises(ValidationError) as cm:
            LevyMeasure.atomic((0, 1))
        self.assertEqual(str(cm.exception),
                         'atoms[0]: atom location must be finite and non-zero, not 0.0.')

        with self.assertRaises(ValidationError) as cm:
            LevyMeasure.atomic((1, 1), (2, -1))
        self.assertEqual(str(cm.exception),
                         'atoms[1]: atom mass must be finite and positive, not -1.0.')

        with self.assertRaises(ValidationError) as cm:
            LevyMeasure.density(PowerDensity(1, 0.5), -1, 1)
        self.assertEqual(str(cm.exception),
                         'densities[0]: interval (-1, 1) must be non-empty and exclude 0.')

        with self.assertRaises(ValidationError) as cm:
            LevyMeasure.density(PowerDensity(1, 1), 1, math.inf)
        self.assertEqual(str(cm.exception), 'densities[0]: mass on {|x| > 1} is infinite.')

        with self.assertRaises(ValidationError):
            LevyMeasure(densities=[(None, 0, 1)])

    def test_families(self):
        self.assertEqual(make_family('power', c=1, alpha=2), PowerDensity(1, 2))
        self.assertEqual(make_family('exponential', c=2, rate=1), ExponentialDensity(2, 1))
        self.assertNotEqual(PowerDensity(1, 2), PowerDensity(1, 3))
        with self.assertRaises(ValidationError):
            make_family('gamma', c=1)

        with self.assertRaises(ValidationError) as cm:
            TemperedStableDensity(1, 2, 1)
        self.assertEqual(str(cm.exception), 'Parameter "alpha" must be in 0 < value < 2.')
        with self.assertRaises(ValidationError) as cm:
            ExponentialDensity(1, 0)
        self.assertEqual(str(cm.exception), 'Parameter "rate" must be positive.')

        self.assertEqual(repr(PowerDensity(1, 2)), 'PowerDensity(c=1.0, alpha=2.0)')

        self.assertAlmostEqual(PowerDensity(2, 1.5)(4), 0.25, places=15)
        self.assertAlmostEqual(TemperedStableDensity(1, 0.5, 2)(1), math.exp(-2), places=15)
        self.assertEqual(ExponentialDensity(1, 3)(300), 0.0)
        self.assertEqual(ExponentialDensity(1, 3).log_density(300), -900.0)

    def test_properties(self):
        self.assertTrue(LevyMeasure().is_trivial)
        self.assertTrue(LevyMeasure.atomic((1, 1)).is_atomic)
        self.assertFalse(LevyMeasure.atomic((1, 1)).infinite_activity)

        self.assertTrue(LevyMeasure.density(PowerDensity(1, 1.5), 0, 1).infinite_activity)
        self.assertTrue(LevyMeasure.density(TemperedStableDensity(1, 0.5, 1), 0, math.inf).infinite_activity)
        self.assertFalse(LevyMeasure.density(PowerDensity(1, 0.5), 0, 1).infinite_activity)
        self.assertFalse(LevyMeasure.density(PowerDensity(1, 1.5), 0.1, 1).infinite_activity)

        m = LevyMeasure.atomic((1, 1)) + LevyMeasure.atomic((2, 3))
        self.assertEqual(m.atoms, ((1.0, 1.0), (2.0, 3.0)))
        self.assertEqual(m, LevyMeasure.atomic((1, 1), (2, 3)))

    def test_pieces(self):
        piece = DensityPiece(PowerDensity(1, 0.5), -1, 0)
        self.assertEqual(piece.sign, -1.0)
        self.assertEqual(piece.radial, (0, 1))
        self.assertEqual(piece.beyond(0.1), DensityPiece(PowerDensity(1, 0.5), -1, -0.1))
        self.assertIsNone(piece.beyond(1))

        rng = np.random.default_rng(5)
        for family, lo, hi in [
                (PowerDensity(1, 1.5), 0.1, 1),
                (PowerDensity(1, 3), 1, math.inf),
                (ExponentialDensity(1, 2), 0.5, 3),
                (TemperedStableDensity(1, 0.5, 1), 0.1, math.inf)]:
            draws = DensityPiece(family, lo, hi).sample(rng, 500)
            self.assertEqual(draws.shape, (500,))
            self.assertTrue(np.all(draws >= lo))
            self.assertTrue(np.all(draws <= hi))
        draws = piece.beyond(0.1).sample(rng, 100)
        self.assertTrue(np.all((draws <= -0.1) & (draws >= -1)))

    def test_intervals(self):
        self.assertNotIn(1, above(1))
        self.assertIn(1.5, above(1))
        low, high = outside(1, closed=True)
        self.assertIn(1, high)
        self.assertIn(-1, low)
        self.assertNotIn(1, outside(1)[1])
        self.assertIn(1, inside(1))
        self.assertIn(-1, inside(1))
        self.assertIsNone(Interval(0, 1).overlap(1, 2))
        self.assertEqual(Interval(0, 1).overlap(0.5, 2), (0.5, 1))


class IntegrateTest(TestCase):
    def test_atomic(self):
        m = LevyMeasure.atomic((1, 1))
        for p in (0.5, 1, 3):
            result = integrate(m, lambda y: abs(y) ** p, above(0.5))
            self.assertEqual(result.value, 1.0)
            self.assertIs(result.method, Method.EXACT_ATOMIC)
            self.assertEqual(result.abs_error_bound, 0.0)

        m = LevyMeasure.atomic((1, 1), (math.e ** 2, 1))
        result = integrate(m, lambda y: math.log(y) if y > math.e else 0.0)
        self.assertAlmostEqual(result.value, 2.0, places=12)

        # atoms outside the domain are ignored
        self.assertEqual(integrate(m, lambda y: 1.0, above(10)).value, 0.0)

    def test_quadrature(self):
        m = LevyMeasure.density(ExponentialDensity(1, 1), 0, math.inf)
        result = integrate(m, lambda x: x, above(0))
        self.assertIs(result.method, Method.QUADRATURE)
        self.assertAlmostEqual(result.value, 1.0, places=8)
        self.assertTrue(result.is_finite)

        # mirrored piece on the negative half-line
        m = LevyMeasure.density(ExponentialDensity(1, 1), -math.inf, 0)
        self.assertAlmostEqual(integrate(m, lambda x: x).value, -1.0, places=8)

        m = LevyMeasure.density(PowerDensity(1, 2.5), 0, 1)
        result = integrate(m, lambda x: x * x)
        self.assertAlmostEqual(result.value, 2.0, places=6)

    def test_divergence(self):
        m = LevyMeasure.density(PowerDensity(1, 2), 0, 1)
        result = integrate(m, lambda y: abs(y))
        self.assertIs(result.method, Method.DIVERGENCE_DETECTED)
        self.assertEqual(result.value, math.inf)
        self.assertFalse(result.is_finite)

        m = LevyMeasure.density(PowerDensity(1, 2), 1, math.inf)
        result = integrate(m, lambda y: y ** 1.5)
        self.assertIs(result.method, Method.DIVERGENCE_DETECTED)

    def test_budget(self):
        m = LevyMeasure.density(ExponentialDensity(1, 1), 0, math.inf)
        result = integrate(m, lambda x: 1.0, budget=1)
        self.assertIs(result.method, Method.INDETERMINATE)
        self.assertTrue(math.isnan(result.value))
        self.assertEqual(result.bounds[1], math.inf)

        with self.assertRaises(ValidationError):
            integrate(m, lambda x: 1.0, tol=0)

    def test_tail_mass(self):
        m = LevyMeasure.atomic((1, 1))
        self.assertEqual(tail_mass(m, 0.5), 1.0)
        self.assertEqual(tail_mass(m, 2), 0.0)

        m = LevyMeasure.density(PowerDensity(1, 2), 1, math.inf)
        self.assertAlmostEqual(tail_mass(m, 2), 0.5, places=8)

        with self.assertRaises(ValidationError):
            tail_mass(m, 0)

        m = LevyMeasure.atomic((2, 1), (-3, 2), (0.5, 1))
        self.assertEqual(mass_outside(m, 1), 3.0)

    def test_tail_mass_monotone(self):
        m = (LevyMeasure.atomic((2, 1), (0.5, 1), (-1, 3))
             + LevyMeasure.density(PowerDensity(1, 1.5), 0, 1)
             + LevyMeasure.density(ExponentialDensity(1, 1), 1, math.inf))
        grid = [0.05 * k for k in range(1, 101)]
        masses = [tail_mass(m, y) for y in grid]
        for y, larger, smaller in zip(grid, masses, masses[1:]):
            self.assertLessEqual(smaller, larger + 1e-9, y)
        # ∫_y^1 r^{-1.5} dr + 2 atoms + e^{-1}
        self.assertAlmostEqual(tail_mass(m, 0.25), 2 + 2 + math.exp(-1), places=7)

    def test_log_scale(self):
        # e^{2.9 x} overflows long before e^{-3 x} underflows to 0
        m = LevyMeasure.density(ExponentialDensity(1, 3), 1, math.inf)
        f = lambda x: math.exp(2.9 * x)
        result = integrate(m, f, log_abs_f=lambda x: 2.9 * x)
        self.assertIs(result.method, Method.QUADRATURE)
        self.assertAlmostEqual(result.value, 10 * math.exp(-0.1), places=6)


class StandingAssumptionsTest(TestCase):
    def test_atomic(self):
        atom = LevyMeasure.atomic((1, 1))
        report = validate_standing_assumptions(atom, atom)
        self.assertIs(report.verdict, Verdict.HOLDS)
        self.assertEqual(report['lambda1_square_integrable'].value, 1.0)
        self.assertEqual(report['lambda2_bounded_variation'].value, 1.0)

    def test_densities(self):
        lambda1 = LevyMeasure.density(PowerDensity(1, 2.5), 0, 1)
        report = validate_standing_assumptions(lambda1, LevyMeasure())
        self.assertIs(report.verdict, Verdict.HOLDS)
        self.assertAlmostEqual(report['lambda1_square_integrable'].value, 2.0, places=6)

        lambda2 = LevyMeasure.density(PowerDensity(1, 2), 0, 1)
        report = validate_standing_assumptions(LevyMeasure(), lambda2)
        self.assertIs(report.verdict, Verdict.FAILS)
        self.assertIs(report['lambda2_bounded_variation'].verdict, Verdict.FAILS)
        self.assertIs(report['lambda1_square_integrable'].verdict, Verdict.HOLDS)

        with self.assertRaises(ValidationError):
            validate_standing_assumptions([(1, 1)], LevyMeasure())

    def test_exponent_sweep(self):
        # near 0, square integrable iff hint < 3 and bounded variation iff hint < 2
        families = [PowerDensity(1, alpha) for alpha in (0.5, 1.5, 2.5, 3.0, 3.5)]
        families += [TemperedStableDensity(1, alpha, 1) for alpha in (0.5, 0.75, 1.5)]
        for family in families:
            m = LevyMeasure.density(family, 0, 1)
            report = validate_standing_assumptions(m, LevyMeasure())
            expected = Verdict.HOLDS if family.hint < 3 else Verdict.FAILS
            self.assertIs(report.verdict, expected, family)
            report = validate_standing_assumptions(LevyMeasure(), m)
            expected = Verdict.HOLDS if family.hint < 2 else Verdict.FAILS
            self.assertIs(report.verdict, expected, family)

        for alpha, square in ((0.5, 0.4), (1.5, 2 / 3), (2.5, 2.0)):
            m = LevyMeasure.density(PowerDensity(1, alpha), 0, 1)
            report = validate_standing_assumptions(m, LevyMeasure())
            self.assertAlmostEqual(report['lambda1_square_integrable'].value, square, places=6)
        for alpha, variation in ((0.5, 2 / 3), (1.5, 2.0)):
            m = LevyMeasure.density(PowerDensity(1, alpha), 0, 1)
            report = validate_standing_assumptions(LevyMeasure(), m)
            self.assertAlmostEqual(report['lambda2_bounded_variation'].value, variation, places=6)
