# Copyright (c) 2020 pygti developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
import os
import unittest
import numpy as np
from pygti import dataset, intersection
from pygti.env import EnvConfig

SLOW = bool(os.environ.get("PYGTI_SLOW_TESTS"))


def _brute_force(demos, epsilon, distinct_pairings):
    result = []
    items = demos.trajectories
    for i, first in enumerate(items):
        for j in range(i + 1, len(items)):
            second = items[j]
            if distinct_pairings and first.start_region is second.start_region:
                continue
            distance = np.linalg.norm(
                first.states.astype(np.float64)[:, None, :] -
                second.states.astype(np.float64)[None, :, :],
                axis=-1)
            for t_i, t_j in zip(*np.nonzero(distance <= epsilon)):
                result.append((i, t_i, j, t_j))
    return np.array(sorted(result), dtype=np.int64).reshape(-1, 4)


def _segment(start, stop, region):
    states = np.linspace(start, stop, 11).astype(np.float32)
    return dataset.Trajectory(states, np.diff(states, axis=0), region)


class TestDetectIntersections(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.demos = dataset.collect_demos(EnvConfig(), 12,
                                          np.random.default_rng(0))

    def test_crossing(self):
        demos = dataset.DemoDataset([
            _segment([-0.5, 0.5], [0.5, -0.5], "UL"),
            _segment([0.5, 0.5], [-0.5, -0.5], "UR"),
        ], EnvConfig())
        pairs = intersection.detect_intersections(demos, 0.01)
        np.testing.assert_array_equal(pairs, [[0, 5, 1, 5]])
        first, second = intersection.intersection_states(demos, pairs)
        np.testing.assert_allclose(first, [[0, 0]], atol=1e-7)
        np.testing.assert_allclose(second, [[0, 0]], atol=1e-7)
        self.assertEqual(
            intersection.fraction_near(demos, pairs, demos.env_config.
                                       gap_center), 1.0)

    def test_same_trajectory(self):
        # A trajectory never intersects itself
        demos = dataset.DemoDataset([
            _segment([-0.5, 0.5], [0.5, -0.5], "UL"),
            _segment([-0.5, 0.5], [0.5, -0.5], "UL"),
        ], EnvConfig())
        pairs = intersection.detect_intersections(demos, 0.01)
        self.assertEqual(len(pairs), 11)
        self.assertTrue(np.all(pairs[:, 0] == 0))
        self.assertTrue(np.all(pairs[:, 2] == 1))
        np.testing.assert_array_equal(pairs[:, 1], pairs[:, 3])
        self.assertEqual(
            len(
                intersection.detect_intersections(demos,
                                                  0.01,
                                                  distinct_pairings=True)),
            0)

    def test_brute_force(self):
        for distinct_pairings in (False, True):
            pairs = intersection.detect_intersections(self.demos, 0.05,
                                                      distinct_pairings)
            expected = _brute_force(self.demos, 0.05, distinct_pairings)
            if not distinct_pairings:
                self.assertGreater(len(expected), 0)
            np.testing.assert_array_equal(pairs, expected)

    def test_errors(self):
        with self.assertRaises(ValueError):
            intersection.detect_intersections(self.demos, 0.0)
        empty = np.empty((0, 4), dtype=np.int64)
        self.assertTrue(
            np.isnan(
                intersection.fraction_near(self.demos, empty,
                                           self.demos.env_config.gap_center)))

    def test_bottleneck(self):
        demos = dataset.collect_demos(EnvConfig(), 40,
                                      np.random.default_rng(1))
        pairs = intersection.detect_intersections(demos,
                                                  0.05,
                                                  distinct_pairings=True)
        self.assertGreater(len(pairs), 0)
        self.assertGreaterEqual(
            intersection.fraction_near(demos, pairs,
                                       demos.env_config.gap_center), 0.95)

    @unittest.skipUnless(SLOW, "set PYGTI_SLOW_TESTS to run")
    def test_standard_dataset(self):
        for variant in ("PointCross", "PointCrossStay"):
            config = EnvConfig(variant=variant)
            demos = dataset.collect_demos(config, 1000,
                                          np.random.default_rng(2))
            pairs = intersection.detect_intersections(demos,
                                                      0.05,
                                                      distinct_pairings=True)
            self.assertGreater(len(pairs), 0)
            self.assertGreaterEqual(
                intersection.fraction_near(demos, pairs, config.gap_center),
                0.95)


class TestStateIndex(unittest.TestCase):
    def test_index(self):
        index = intersection.StateIndex()
        self.assertFalse(index)
        self.assertEqual(len(index.pairs(0.1)), 0)
        trajectories = [
            _segment([-0.5, 0.5], [0.5, -0.5], "UL"),
            _segment([0.5, 0.5], [-0.5, -0.5], "UR"),
        ]
        index.packing(trajectories, [3, 7])
        self.assertTrue(index)
        self.assertEqual(len(index), 22)
        pairs = index.pairs(0.01)
        np.testing.assert_array_equal(index.lookup(pairs[0]), [[3, 5],
                                                               [7, 5]])
        with self.assertRaises(ValueError):
            index.packing(trajectories, [1])
        index.clear()
        self.assertFalse(index)
        self.assertEqual(len(index), 0)


if __name__ == "__main__":
    unittest.main()
