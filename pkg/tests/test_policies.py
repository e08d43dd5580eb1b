# Copyright (c) 2020 pygti developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
import os
import unittest
import numpy as np
from pygti import goal_proposal, policies, rollout
from pygti.dataset import demonstrate
from pygti.env import EnvConfig
from pygti.geometry import GoalRegion, StartRegion
from pygti.core import AdamState, Mlp, MlpSpec, ParamStore, grad_check
from pygti.errors import TrainingDivergedError

CONFIG = policies.PolicyConfig(hidden_sizes=(16, 16))
SLOW = bool(os.environ.get("PYGTI_SLOW_TESTS"))


def _policy(kind, seed=0, config=CONFIG, **kwargs):
    return policies.PolicyModel.create(kind, config, 0.05,
                                       np.random.default_rng(seed), **kwargs)


def _cvae(horizon=5):
    return goal_proposal.CvaeModel.create(
        goal_proposal.CvaeConfig(horizon=horizon, hidden_sizes=(8, )),
        np.random.default_rng(1))


class TestPolicyConfig(unittest.TestCase):
    def test_config(self):
        config = policies.PolicyConfig()
        self.assertEqual(config.hidden_sizes, (64, 64))
        self.assertEqual(config.goal_mode, "state")
        with self.assertRaises(ValueError):
            policies.PolicyConfig(goal_mode="image")
        with self.assertRaises(ValueError):
            policies.PolicyConfig(batch_size=0)


class TestPolicyModel(unittest.TestCase):
    def test_create(self):
        bc = _policy("bc")
        self.assertIs(bc.kind, policies.PolicyKind.BC)
        self.assertEqual(bc.goal_size, 0)
        self.assertIsNone(bc.horizon)
        self.assertEqual(_policy("gcbc").goal_size, 2)
        stage1 = _policy("stage1", horizon=15)
        self.assertEqual(stage1.goal_size, 2)
        self.assertIs(stage1.goal_mode, policies.GoalMode.STATE)
        self.assertIn("goal_mode=state H=15", repr(stage1))
        latent = _policy("stage1",
                         config=policies.PolicyConfig(hidden_sizes=(8, ),
                                                      goal_mode="latent"),
                         latent_dim=3,
                         horizon=15)
        self.assertEqual(latent.goal_size, 3)

    def test_invalid(self):
        params = ParamStore()
        spec = MlpSpec((4, 8, 2))
        policies.PolicyModel("gcbc", spec, Mlp(spec).init_params(
            params, np.random.default_rng(0)), 0.05)
        with self.assertRaises(ValueError):
            policies.PolicyModel("bc", spec, params, 0.05)
        with self.assertRaises(ValueError):
            policies.PolicyModel("gcbc", spec, params, 0.0)
        with self.assertRaises(ValueError):
            policies.PolicyModel("stage1", spec, params, 0.05)
        with self.assertRaises(ValueError):
            policies.PolicyModel("dagger", spec, params, 0.05)

    def test_act(self):
        bc = _policy("bc")
        action = policies.policy_act(bc, [0.1, 0.2])
        self.assertEqual(action.shape, (2, ))
        self.assertEqual(action.dtype, np.float32)
        actions = policies.policy_act(bc, np.zeros((5, 2)))
        self.assertEqual(actions.shape, (5, 2))
        with self.assertRaises(ValueError):
            policies.policy_act(bc, [0.1, 0.2], [0.0, 0.0])
        gcbc = _policy("gcbc")
        with self.assertRaises(ValueError):
            policies.policy_act(gcbc, [0.1, 0.2])
        with self.assertRaises(ValueError):
            policies.policy_act(gcbc, [0.1, 0.2], [0.0, 0.0, 0.0])
        self.assertEqual(
            policies.policy_act(gcbc, np.zeros((3, 2)), np.ones(
                (3, 2))).shape, (3, 2))

    def test_clamp(self):
        bc = _policy("bc")
        bc.params["b2"] = np.array([10.0, -10.0])
        np.testing.assert_array_equal(policies.policy_act(bc, [0.0, 0.0]),
                                      np.float32([0.05, -0.05]))


class TestLoss(unittest.TestCase):
    def test_gradient(self):
        rng = np.random.default_rng(2)
        for kind in ("bc", "gcbc"):
            p = _policy(kind, 3)
            inputs = rng.uniform(-1, 1, (10, 2 + p.goal_size))
            targets = rng.uniform(-0.05, 0.05, (10, 2))

            def function(params, p=p, inputs=inputs, targets=targets):
                return policies.policy_loss(p.with_params(params), inputs,
                                            targets)

            self.assertLess(grad_check(p.params, function), 1e-5, msg=kind)

    def test_value(self):
        p = _policy("bc")
        inputs = np.array([[0.1, 0.2], [-0.3, 0.4]])
        targets = np.array([[0.01, 0.0], [0.0, -0.02]])
        outputs, _ = p.network.forward(p.params, inputs)
        loss, _ = policies.policy_loss(p, inputs, targets)
        self.assertAlmostEqual(
            loss, float(np.mean(np.sum((targets - outputs)**2, axis=1))))
        with self.assertRaises(ValueError):
            policies.policy_loss(p, inputs, targets[:1])
        with self.assertRaises(ValueError):
            policies.policy_loss(p, np.empty((0, 2)), np.empty((0, 2)))


class TestTraining(unittest.TestCase):
    def test_bc(self):
        p = _policy("bc", 4)
        opt = AdamState.create(p.params, 3e-3)
        rng = np.random.default_rng(5)
        losses = []
        for _ in range(500):
            states = rng.uniform(-1, 1, (64, 2))
            # Head to the origin
            actions = -0.04 * states
            losses.append(policies.bc_train_step(p, states, actions, opt))
        self.assertLess(np.mean(losses[-20:]), 0.1 * np.mean(losses[:20]))
        action = policies.policy_act(p, [0.5, -0.5])
        self.assertLess(action[0], 0)
        self.assertGreater(action[1], 0)

    def test_gcbc(self):
        p = _policy("gcbc", 6)
        opt = AdamState.create(p.params, 1e-3)
        states = np.zeros((4, 2))
        goals = np.ones((4, 2))
        loss = policies.gcbc_train_step(p, states, np.zeros((4, 2)), goals,
                                        opt)
        self.assertGreaterEqual(loss, 0)
        self.assertEqual(opt.step_count, 1)

    def test_wrong_kind(self):
        p = _policy("gcbc")
        opt = AdamState.create(p.params)
        with self.assertRaises(ValueError):
            policies.bc_train_step(p, np.zeros((4, 2)), np.zeros((4, 2)),
                                   opt)
        bc = _policy("bc")
        with self.assertRaises(ValueError):
            policies.gcbc_train_step(bc, np.zeros((4, 2)), np.zeros((4, 2)),
                                     np.zeros((4, 2)), opt)
        with self.assertRaises(ValueError):
            policies.stage1_train_step(bc, _cvae(), np.zeros((2, 6, 2)),
                                       np.zeros((2, 5, 2)), opt,
                                       np.random.default_rng(0))

    def test_diverged(self):
        p = _policy("bc")
        opt = AdamState.create(p.params)
        checksum = p.params.checksum()
        actions = np.zeros((4, 2))
        actions[1, 0] = np.inf
        with self.assertRaises(TrainingDivergedError):
            policies.bc_train_step(p, np.zeros((4, 2)), actions, opt)
        self.assertEqual(p.params.checksum(), checksum)


class TestStage1(unittest.TestCase):
    def _windows(self, count=3, horizon=5):
        rng = np.random.default_rng(7)
        actions = rng.uniform(-0.05, 0.05, (count, horizon, 2))
        states = np.concatenate(
            [np.zeros((count, 1, 2)),
             np.cumsum(actions, axis=1)], axis=1)
        return states, actions

    def test_state_goals(self):
        p = _policy("stage1", horizon=5)
        states, actions = self._windows()
        inputs, targets = policies.stage1_batch(p, _cvae(), states, actions,
                                                np.random.default_rng(0))
        self.assertEqual(inputs.shape, (15, 4))
        self.assertEqual(targets.shape, (15, 2))
        np.testing.assert_array_equal(inputs[:5, :2], states[0, :5])
        np.testing.assert_array_equal(inputs[:5, 2:],
                                      np.tile(states[0, 5], (5, 1)))
        np.testing.assert_array_equal(targets[5:10], actions[1])

    def test_latent_goals(self):
        config = policies.PolicyConfig(hidden_sizes=(8, ),
                                       goal_mode="latent")
        p = _policy("stage1", config=config, latent_dim=2, horizon=5)
        states, actions = self._windows()
        inputs, _ = policies.stage1_batch(p, _cvae(), states, actions,
                                          np.random.default_rng(0))
        self.assertEqual(inputs.shape, (15, 4))
        # One latent goal per window
        for window in range(3):
            rows = inputs[window * 5:(window + 1) * 5, 2:]
            self.assertTrue(np.all(rows == rows[0]))

    def test_short_windows(self):
        p = _policy("stage1", horizon=5)
        states, actions = self._windows(horizon=4)
        with self.assertRaises(ValueError):
            policies.stage1_batch(p, _cvae(), states, actions,
                                  np.random.default_rng(0))

    def test_train_step(self):
        p = _policy("stage1", horizon=5)
        cvae = _cvae()
        checksum = cvae.params.checksum()
        opt = AdamState.create(p.params)
        states, actions = self._windows()
        policies.stage1_train_step(p, cvae, states, actions, opt,
                                   np.random.default_rng(0))
        self.assertEqual(opt.step_count, 1)
        self.assertEqual(cvae.params.checksum(), checksum)



@unittest.skipUnless(SLOW, "set PYGTI_SLOW_TESTS to run")
class TestOverfit(unittest.TestCase):
    CONFIG = policies.PolicyConfig()

    @classmethod
    def setUpClass(cls):
        cls.env = EnvConfig(demo_noise_std=0.0)
        cls.demo, _ = demonstrate(cls.env, StartRegion.UL, GoalRegion.LR,
                                  np.random.default_rng(0))

    def test_constant_action(self):
        p = _policy("bc", 8, self.CONFIG)
        opt = AdamState.create(p.params, 1e-3)
        states = np.random.default_rng(9).uniform(-1, 1, (64, 2))
        actions = np.tile([0.02, -0.03], (64, 1))
        for _ in range(2000):
            policies.bc_train_step(p, states, actions, opt)
        loss, _ = policies.policy_loss(p, states, actions)
        self.assertLess(loss, 1e-6)

    def test_stage1_windows(self):
        horizon = 5
        p = _policy("stage1", 10, self.CONFIG, horizon=horizon)
        states, actions = self.demo.states, self.demo.actions
        count = len(actions) - horizon + 1
        windows = np.stack([states[ix:ix + horizon + 1]
                            for ix in range(count)])
        window_actions = np.stack([actions[ix:ix + horizon]
                                   for ix in range(count)])
        cvae = _cvae(horizon)
        opt = AdamState.create(p.params, 1e-3)
        rng = np.random.default_rng(11)
        for _ in range(2000):
            policies.stage1_train_step(p, cvae, windows, window_actions, opt,
                                       rng)
        inputs, targets = policies.stage1_batch(p, cvae, windows,
                                                window_actions, rng)
        loss, _ = policies.policy_loss(p, inputs, targets)
        self.assertLess(loss, 1e-4)

    def test_goal_conditioned_replay(self):
        self.assertIs(self.demo.end_label, GoalRegion.LR)
        p = _policy("gcbc", 12, self.CONFIG)
        states, actions = self.demo.states[:-1], self.demo.actions
        goals = np.tile(self.demo.states[-1], (len(actions), 1))
        opt = AdamState.create(p.params, 1e-3)
        for _ in range(2000):
            policies.gcbc_train_step(p, states, actions, goals, opt)
        batch = rollout.run_rollouts(
            self.env, self.demo.states[:1],
            rollout.policy_controller(p, self.demo.states[-1:]))
        trajectory = batch.trajectory(0, StartRegion.UL, self.env)
        self.assertIs(trajectory.end_label, GoalRegion.LR)


if __name__ == "__main__":
    unittest.main()
