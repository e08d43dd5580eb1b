# Copyright (c) 2020 pygti developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
import math
import unittest
import numpy as np
from pygti import evaluation, goal_proposal, policies, seeding
from pygti.dataset import Trajectory
from pygti.env import DemonstratorState, EnvConfig, scripted_action
from pygti.geometry import GoalRegion, StartRegion
from pygti.interface import Stage1Bundle


def _trajectory(start, end, region="UL"):
    return Trajectory(np.array([start, end]), np.zeros((1, 2)), region)


def _label(reached, pairing, region=None):
    return evaluation.RolloutLabel(reached, evaluation.Pairing(pairing),
                                   region)


class _SeenController:
    """Scripted controller taking every episode to the goal region paired
    with its start"""
    def __init__(self, config):
        self.config = config
        self.rng = np.random.default_rng(0)
        self.episodes = []

    def __call__(self, states, step):
        if step == 0:
            self.episodes = []
            for state in states:
                region = evaluation.seen_region(
                    StartRegion.UL if state[0] < 0 else StartRegion.UR)
                self.episodes.append(
                    (region,
                     DemonstratorState.start(self.config, region, self.rng)))
        return np.stack([
            scripted_action(self.config, state, region, phase, self.rng)
            for state, (region, phase) in zip(states, self.episodes)
        ])


class TestClassify(unittest.TestCase):
    def test_pairings(self):
        config = EnvConfig()
        label = evaluation.classify_rollout(
            _trajectory([-0.6, 0.75], [0.6, -0.75]), config)
        self.assertEqual(label, _label(True, "seen", GoalRegion.LR))
        label = evaluation.classify_rollout(
            _trajectory([-0.6, 0.75], [-0.6, -0.75]), config)
        self.assertEqual(label, _label(True, "unseen", GoalRegion.LL))
        label = evaluation.classify_rollout(
            _trajectory([0.6, 0.75], [-0.6, -0.75], "UR"), config)
        self.assertEqual(label.pairing, evaluation.Pairing.SEEN)
        label = evaluation.classify_rollout(
            _trajectory([-0.6, 0.75], [0.0, 0.0]), config)
        self.assertEqual(label, _label(False, "none"))

    def test_axis(self):
        with self.assertRaises(ValueError):
            evaluation.classify_rollout(_trajectory([0.0, 0.75], [0.6, -0.75]),
                                        EnvConfig())

    def test_seen_region(self):
        self.assertIs(evaluation.seen_region(StartRegion.UL), GoalRegion.LR)
        self.assertIs(evaluation.seen_region("UR"), GoalRegion.LL)


class TestLocationMetrics(unittest.TestCase):
    def test_counts(self):
        metrics = evaluation.LocationMetrics("UL", -0.6, 0.75)
        for _ in range(3):
            metrics.add(_label(True, "seen", GoalRegion.LR))
        metrics.add(_label(True, "unseen", GoalRegion.LL))
        metrics.add(_label(False, "none"))
        self.assertEqual(metrics.n_rollouts, 5)
        self.assertEqual(metrics.goal_reach_rate, 0.8)
        self.assertEqual(metrics.seen_pct, 0.75)
        self.assertEqual(metrics.unseen_pct, 0.25)
        self.assertEqual(metrics.occupancy, 1.0)
        self.assertTrue(math.isnan(metrics.seen_pairing_reach))

    def test_empty(self):
        metrics = evaluation.LocationMetrics(StartRegion.UR, 0.6, 0.75)
        self.assertEqual(metrics.goal_reach_rate, 0.0)
        self.assertEqual(metrics.seen_pct, 0.0)
        self.assertEqual(metrics.occupancy, 0.0)
        metrics.add(_label(True, "unseen", GoalRegion.LR))
        self.assertEqual(metrics.occupancy, 0.5)

    def test_conditioned(self):
        metrics = evaluation.LocationMetrics("UL", -0.6, 0.75)
        metrics.add(_label(True, "seen", GoalRegion.LR), GoalRegion.LR)
        metrics.add(_label(True, "seen", GoalRegion.LR), GoalRegion.LL)
        metrics.add(_label(False, "none"), GoalRegion.LL)
        self.assertEqual(metrics.n_seen_cond, 1)
        self.assertEqual(metrics.n_unseen_cond, 2)
        self.assertEqual(metrics.seen_pairing_reach, 1.0)
        self.assertEqual(metrics.unseen_pairing_reach, 0.0)


class TestMetricsReport(unittest.TestCase):
    def test_aggregate(self):
        first = evaluation.LocationMetrics("UL", -0.6, 0.75)
        second = evaluation.LocationMetrics("UR", 0.6, 0.75)
        for _ in range(4):
            first.add(_label(True, "seen", GoalRegion.LR))
        second.add(_label(True, "seen", GoalRegion.LL))
        second.add(_label(True, "unseen", GoalRegion.LR))
        second.add(_label(False, "none"))
        second.add(_label(False, "none"))
        report = evaluation.MetricsReport("bc", [first, second])
        self.assertEqual(report.n_rollouts, 8)
        self.assertEqual(report.totals()["n_reached"], 6)
        values = report.aggregate()
        self.assertEqual(values["goal_reach_rate"], 0.75)
        self.assertAlmostEqual(values["seen_pct"], 5 / 6)
        self.assertAlmostEqual(values["unseen_pct"], 1 / 6)
        self.assertEqual(values["occupancy"], 0.75)
        self.assertTrue(math.isnan(values["seen_pairing_reach"]))
        self.assertEqual(report.summary(),
                         "bc: reach 75.0%, seen 83.3%, unseen 16.7%, "
                         "occupancy 75.0%")

    def test_start_locations(self):
        locations = evaluation.start_locations(EnvConfig(), 5)
        self.assertEqual(len(locations), 10)
        self.assertTrue(
            all(item["start_region"] is StartRegion.UL
                for item in locations[:5]))
        points = np.array([item["point"] for item in locations])
        np.testing.assert_allclose(points[:5, 0],
                                   [-0.76, -0.68, -0.6, -0.52, -0.44],
                                   rtol=1e-6)
        np.testing.assert_allclose(points[5:, 0],
                                   [0.44, 0.52, 0.6, 0.68, 0.76],
                                   rtol=1e-6)
        np.testing.assert_allclose(points[:, 1], 0.75)


class TestEvaluatePolicy(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        rng = np.random.default_rng(0)
        config = policies.PolicyConfig(hidden_sizes=(8, ))
        cls.env = EnvConfig(max_episode_len=40)
        cls.bc = policies.PolicyModel.create("bc", config, 0.05, rng)
        cls.gcbc = policies.PolicyModel.create("gcbc", config, 0.05, rng)
        cvae = goal_proposal.CvaeModel.create(
            goal_proposal.CvaeConfig(horizon=5, hidden_sizes=(8, )), rng)
        cls.bundle = Stage1Bundle(
            cvae,
            policies.PolicyModel.create("stage1", config, 0.05, rng,
                                        horizon=5))

    def _evaluate(self, model, num_threads=1, **kwargs):
        protocol = evaluation.EvalConfig(starts_per_region=2,
                                         rollouts_per_start=6,
                                         num_threads=num_threads,
                                         plot_rollouts_per_start=2)
        return evaluation.evaluate_policy(model, self.env, protocol,
                                          np.random.default_rng(1), **kwargs)

    def test_kinds(self):
        self.assertIs(evaluation.model_kind(self.bc), evaluation.ModelKind.BC)
        self.assertIs(evaluation.model_kind(self.gcbc),
                      evaluation.ModelKind.GCBC)
        self.assertIs(evaluation.model_kind(self.gcbc, stage2=True),
                      evaluation.ModelKind.GTI_STAGE2)
        self.assertIs(evaluation.model_kind(self.bundle),
                      evaluation.ModelKind.GTI_STAGE1)
        with self.assertRaises(TypeError):
            evaluation.model_kind(self.bundle.controller)
        with self.assertRaises(TypeError):
            evaluation.model_kind(object())
        self.assertIs(evaluation.model_kind(lambda states, step: states),
                      evaluation.ModelKind.BC)

    def test_report(self):
        report = self._evaluate(self.bc)
        self.assertEqual(report.model, "bc")
        self.assertEqual(len(report.locations), 4)
        self.assertEqual(report.n_rollouts, 24)
        self.assertEqual(len(report.rollouts), 8)
        self.assertEqual(
            [item.start_region for item in report.locations],
            [StartRegion.UL, StartRegion.UL, StartRegion.UR, StartRegion.UR])
        for item in report.rollouts:
            self.assertLessEqual(len(item), 40)

    def test_conditioned(self):
        report = self._evaluate(self.gcbc, model_id="gcbc-test")
        self.assertEqual(report.model, "gcbc-test")
        for item in report.locations:
            self.assertEqual(item.n_seen_cond, 3)
            self.assertEqual(item.n_unseen_cond, 3)
        report = self._evaluate(self.bc)
        self.assertEqual(report.totals()["n_seen_cond"], 0)

    def test_threads(self):
        for model in (self.bc, self.gcbc, self.bundle):
            first = self._evaluate(model, 1)
            second = self._evaluate(model, 3)
            self.assertEqual(first, second)
            for a, b in zip(first.rollouts, second.rollouts):
                np.testing.assert_array_equal(a.states, b.states)

    def test_idle(self):
        report = self._evaluate(lambda states, step: np.zeros_like(states))
        self.assertEqual(report.model, "bc")
        values = report.aggregate()
        for name in ("goal_reach_rate", "seen_pct", "unseen_pct",
                     "occupancy"):
            self.assertEqual(values[name], 0.0, msg=name)
        for item in report.rollouts:
            self.assertEqual(len(item), 40)

    def test_seen_only(self):
        config = EnvConfig(max_episode_len=100)
        protocol = evaluation.EvalConfig(starts_per_region=5,
                                         rollouts_per_start=4,
                                         num_threads=1)
        report = evaluation.evaluate_policy(_SeenController(config), config,
                                            protocol,
                                            np.random.default_rng(2))
        values = report.aggregate()
        self.assertEqual(values["goal_reach_rate"], 1.0)
        self.assertEqual(values["seen_pct"], 1.0)
        self.assertEqual(values["unseen_pct"], 0.0)
        self.assertEqual(values["occupancy"], 0.5)
        for item in report.locations:
            self.assertEqual(item.occupancy, 0.5)

    def test_kind_override(self):
        report = self._evaluate(self.gcbc, kind="gti-stage2")
        self.assertEqual(report.model, "gti-stage2")

    def test_protocol(self):
        for kwargs in (dict(starts_per_region=0), dict(rollouts_per_start=0),
                       dict(num_threads=-1),
                       dict(plot_rollouts_per_start=-1)):
            with self.assertRaises(ValueError, msg=str(kwargs)):
                evaluation.EvalConfig(**kwargs)


class TestEvaluationStream(unittest.TestCase):
    def test_keys(self):
        for ix, kind in enumerate(("bc", "gcbc", "gti-stage1",
                                   "gti-stage2")):
            expected = seeding.stream(17, seeding.Stream.EVALUATION,
                                      ix).integers(2**63, size=4)
            np.testing.assert_array_equal(
                evaluation.evaluation_stream(17, kind).integers(2**63,
                                                                size=4),
                expected,
                err_msg=kind)
        first = evaluation.evaluation_stream(17, evaluation.ModelKind.BC)
        second = evaluation.evaluation_stream(18, evaluation.ModelKind.BC)
        self.assertNotEqual(first.integers(2**63), second.integers(2**63))


if __name__ == "__main__":
    unittest.main()
