import math
from unittest import TestCase

import numpy as np

from perpetua.exceptions import ValidationError
from perpetua.exponents import LevyTriplet, laplace_exponent_X
from perpetua.measures import LevyMeasure, PowerDensity, ExponentialDensity
from perpetua.rng import stream
from perpetua.sampler import (
    Jump, PathSkeleton, JumpSource, sample_path, embedding_pair, sample_MQ,
    sample_MQ_batch, small_jump_bias, path_rows,
)
from perpetua.stats import RunningMoments


class SamplePathTest(TestCase):
    def test_drift(self):
        path = sample_path(LevyTriplet(b=1), 1.0, seed=4)
        self.assertEqual(path.jumps, ())
        np.testing.assert_allclose(path.x_values, path.times)
        np.testing.assert_array_equal(path.z_values, 0)
        self.assertEqual(path.times[0], 0.0)
        self.assertEqual(path.times[-1], 1.0)
        self.assertEqual(path.seed, 4)

        pair = embedding_pair(path)
        self.assertAlmostEqual(pair.m_star, math.exp(-1), places=15)
        self.assertEqual(pair.q_star, 0.0)

    def test_seed(self):
        t = LevyTriplet(v2=1, lambda1=LevyMeasure.atomic((1, 1)), lambda2=LevyMeasure.atomic((2, 1)))
        a = sample_path(t, 2.0, seed=9)
        b = sample_path(t, 2.0, seed=9)
        np.testing.assert_array_equal(a.x_values, b.x_values)
        self.assertEqual(a.jumps, b.jumps)
        for jump in a.jumps:
            self.assertIn(jump.time, a.times)

    def test_jump_counts(self):
        x_jumps = LevyTriplet(b=1, lambda1=LevyMeasure.atomic((1, 1)))
        counts = [len(sample_path(x_jumps, 1.0, seed=s, steps_per_unit=4).jumps) for s in range(2000)]
        moments = RunningMoments.from_values(counts)
        self.assertLess(abs(moments.mean - 1.0), 4 * moments.std_error)

        # the drift cancels the compensation: X counts the jumps
        path = sample_path(x_jumps, 1.0, seed=3)
        self.assertEqual(path.x_values[-1], len(path.jumps))

        z_jumps = LevyTriplet(lambda2=LevyMeasure.atomic((1, 1)))
        counts = [len(sample_path(z_jumps, 2.0, seed=s, steps_per_unit=4).jumps) for s in range(2000)]
        moments = RunningMoments.from_values(counts)
        self.assertLess(abs(moments.mean - 2.0), 4 * moments.std_error)

    def test_errors(self):
        with self.assertRaises(ValidationError):
            sample_path(LevyTriplet(), 0)
        short = sample_path(LevyTriplet(b=1), 0.5)
        with self.assertRaises(ValidationError):
            embedding_pair(short)

    def test_path_rows(self):
        t = LevyTriplet(lambda2=LevyMeasure.atomic((1, 1)))
        path = sample_path(t, 1.0, seed=1, steps_per_unit=4)
        rows = path_rows(path)
        self.assertEqual(rows[0], ['time', 'X', 'Z', 'is_jump', 'i_k', 'j_k'])
        self.assertEqual(len(rows), path.times.size + 1)
        self.assertEqual(sum(row[3] for row in rows[1:]), len(path.jumps))
        for row in rows[1:]:
            self.assertEqual(row[5], 1.0 if row[3] else 0.0)


class EmbeddingPairTest(TestCase):
    def test_payments(self):
        # X ≡ 0: the discount factor is 1
        t = LevyTriplet(lambda2=LevyMeasure.atomic((1, 1)))
        for seed in range(5):
            path = sample_path(t, 1.0, seed=seed, steps_per_unit=4)
            pair = embedding_pair(path)
            self.assertEqual(pair.m_star, 1.0)
            self.assertEqual(pair.q_star, float(len(path.jumps)))

        pair = sample_MQ(LevyTriplet(v2=1, b=1), seed=2)
        self.assertEqual(pair.q_star, 0.0)
        self.assertGreater(pair.m_star, 0.0)

    def test_conditioned(self):
        times = np.array([0.0, 0.5, 1.0])
        path = PathSkeleton(
            1.0, times, times.copy(), times.copy(), np.array([0.0, 1.0, 1.0]),
            (Jump(0.5, 0.0, 1.0),), 0.0, None)
        pair = embedding_pair(path)
        self.assertAlmostEqual(pair.m_star, math.exp(-1), places=15)
        self.assertAlmostEqual(pair.q_star, math.exp(-0.5), places=15)

    def test_batch(self):
        t = LevyTriplet(v2=1, b=1)
        m, q = sample_MQ_batch(t, 20000, stream(1, 'batch'))
        self.assertEqual(m.shape, (20000,))
        np.testing.assert_array_equal(q, 0.0)
        moments = RunningMoments.from_values(m)
        expected = math.exp(laplace_exponent_X(t, 1))
        self.assertLess(abs(moments.mean - expected), 4 * moments.std_error)

        t = LevyTriplet(lambda2=LevyMeasure.atomic((1, 1)))
        m, q = sample_MQ_batch(t, 20000, stream(2, 'batch'))
        np.testing.assert_array_equal(m, 1.0)
        np.testing.assert_array_equal(q, np.round(q))
        moments = RunningMoments.from_values(q)
        self.assertLess(abs(moments.mean - 1.0), 4 * moments.std_error)

        # payments discounted by the jumps of X before them
        t = LevyTriplet(b=1, joint=[(1, 1, 1)])
        m, q = sample_MQ_batch(t, 1000, stream(3, 'batch'))
        counts = -np.log(m)
        np.testing.assert_allclose(counts, np.round(counts), atol=1e-9)
        expected = np.array([sum(math.exp(-k) for k in range(int(round(n)))) for n in counts])
        np.testing.assert_allclose(q, expected, rtol=1e-12)


class JumpSourceTest(TestCase):
    def test_errors(self):
        with self.assertRaises(ValidationError):
            JumpSource(LevyTriplet(), eps=2)
        infinite = LevyTriplet(lambda1=LevyMeasure.density(PowerDensity(1, 1.5), 0, 1))
        with self.assertRaises(ValidationError):
            JumpSource(infinite, eps=0)
        self.assertGreater(JumpSource(infinite, eps=0.01).total_rate, 0)

    def test_compensation(self):
        t = LevyTriplet(b=1, lambda1=LevyMeasure.atomic((0.5, 2), (2, 1)))
        source = JumpSource(t)
        self.assertEqual(source.drift, 0.0)
        self.assertEqual(source.total_rate, 3.0)

        t = LevyTriplet(lambda1=LevyMeasure.density(ExponentialDensity(1, 1), 0, math.inf))
        source = JumpSource(t, eps=0)
        self.assertAlmostEqual(source.total_rate, 1.0, places=8)
        self.assertAlmostEqual(source.drift, -(1 - 2 * math.exp(-1)), places=8)

        marks = source.draw(np.random.default_rng(0), 100)
        self.assertEqual(marks.shape, (100, 2))
        self.assertTrue(np.all(marks[:, 0] > 0))
        np.testing.assert_array_equal(marks[:, 1], 0.0)

    def test_small_jump_bias(self):
        t = LevyTriplet(
            lambda1=LevyMeasure.atomic((0.001, 1)),
            lambda2=LevyMeasure.density(PowerDensity(1, 0.5), 0, 1))
        bias = small_jump_bias(t, 0.01)
        self.assertEqual(bias.eps, 0.01)
        self.assertAlmostEqual(bias.z_variation, 2 / 3 * 0.01 ** 1.5, places=9)
        # atoms are never truncated
        self.assertEqual(bias.x_variance, 0.0)
        self.assertEqual(small_jump_bias(t, 0), (0.0, 0.0, 0.0))
