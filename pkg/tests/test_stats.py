import math
from unittest import TestCase

import numpy as np

from perpetua.stats import RunningMoments, merge_all, z_score, batch_spread


class RunningMomentsTest(TestCase):
    def test_from_values(self):
        moments = RunningMoments.from_values([1.0, 2.0, 3.0, 4.0])
        self.assertEqual(moments.count, 4)
        self.assertAlmostEqual(moments.mean, 2.5)
        self.assertAlmostEqual(moments.variance, 5 / 3)
        self.assertAlmostEqual(moments.std_error, math.sqrt(5 / 12))

        empty = RunningMoments.from_values([])
        self.assertEqual(empty.count, 0)
        self.assertTrue(math.isnan(empty.std_error))

        single = RunningMoments.from_values(np.array([2.0]))
        self.assertEqual(single.variance, 0.0)
        self.assertEqual(single.std_error, 0.0)

    def test_merge(self):
        rng = np.random.default_rng(1)
        values = rng.standard_normal(1001)
        parts = [RunningMoments.from_values(chunk) for chunk in np.array_split(values, 7)]
        merged = merge_all(parts)
        whole = RunningMoments.from_values(values)
        self.assertEqual(merged.count, whole.count)
        self.assertAlmostEqual(merged.mean, whole.mean, places=12)
        self.assertAlmostEqual(merged.m2, whole.m2, places=9)

        self.assertEqual(merge_all([]).count, 0)
        one = RunningMoments.from_values([1.0, 2.0])
        self.assertEqual(one.merge(RunningMoments()).mean, 1.5)
        self.assertEqual(RunningMoments().merge(one).mean, 1.5)


class ComparisonTest(TestCase):
    def test_z_score(self):
        self.assertAlmostEqual(z_score(1.2, 0.1, 1.0), 2.0)
        self.assertEqual(z_score(1.0, 0.0, 1.0), 0.0)
        self.assertEqual(z_score(math.e ** 2, 0.0, math.exp(2)), 0.0)
        self.assertEqual(z_score(1.5, 0.0, 1.0), math.inf)
        self.assertEqual(z_score(0.5, math.nan, 1.0), -math.inf)

    def test_batch_spread(self):
        spread = batch_spread(np.ones(100))
        self.assertEqual(spread.batch_means, (1.0, 1.0, 1.0, 1.0))
        self.assertEqual(spread.spread, 0.0)
        self.assertTrue(spread.stable)

        rng = np.random.default_rng(2)
        spread = batch_spread(rng.standard_normal(4000))
        self.assertTrue(spread.stable)
        self.assertEqual(len(spread.batch_means), 4)

        # batch means drift apart
        values = np.repeat([0.0, 1.0, 2.0, 3.0], 1000)
        self.assertFalse(batch_spread(values).stable)
