# Copyright (c) 2020 pygti developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
import unittest
import numpy as np
from pygti import goal_proposal, policies, rollout
from pygti.env import EnvConfig, in_goal
from pygti.geometry import GoalRegion, StartRegion


def _towards(target):
    target = np.asarray(target, dtype=np.float64)

    def act(states, _step):
        delta = target - states
        distance = np.linalg.norm(delta, axis=1, keepdims=True)
        return (delta * np.minimum(1.0, 0.05 / np.maximum(distance, 1e-12))
                ).astype(np.float32)

    return act


class TestRunRollouts(unittest.TestCase):
    def test_lengths(self):
        config = EnvConfig()
        starts = np.array([[0.0, -0.1], [0.6, 0.75], [0.6, -0.75]],
                          dtype=np.float32)
        batch = rollout.run_rollouts(config, starts, _towards([0.6, -0.75]),
                                     max_steps=50)
        self.assertEqual(len(batch), 3)
        self.assertEqual(batch.states.shape, (3, 51, 2))
        self.assertEqual(batch.actions.shape, (3, 50, 2))
        # Reached, blocked by the wall, already in the goal region
        self.assertLess(batch.lengths[0], 50)
        self.assertEqual(batch.lengths[1], 50)
        self.assertEqual(batch.lengths[2], 0)
        np.testing.assert_array_equal(in_goal(config, batch.final_states),
                                      [True, False, True])
        length = batch.lengths[0]
        np.testing.assert_array_equal(
            batch.states[0, length:],
            np.broadcast_to(batch.states[0, length], (51 - length, 2)))
        self.assertTrue(np.all(batch.actions[0, length:] == 0))
        self.assertTrue(np.all(batch.actions[2] == 0))

    def test_trajectories(self):
        config = EnvConfig()
        starts = np.array([[0.0, -0.1], [0.6, 0.75]], dtype=np.float32)
        batch = rollout.run_rollouts(config, starts, _towards([0.6, -0.75]),
                                     max_steps=50)
        first, second = batch.trajectories([StartRegion.UL, StartRegion.UR],
                                           config)
        self.assertEqual(len(first), batch.lengths[0])
        self.assertIs(first.end_label, GoalRegion.LR)
        self.assertIsNone(second.end_label)
        self.assertIs(second.start_region, StartRegion.UR)
        self.assertEqual(first.replay_error(config), 0.0)
        self.assertEqual(second.replay_error(config), 0.0)

    def test_no_stop(self):
        config = EnvConfig()
        batch = rollout.run_rollouts(config, [[0.6, -0.75]],
                                     _towards([0.6, -0.75]),
                                     max_steps=5,
                                     stop_in_goal=False)
        self.assertEqual(batch.lengths[0], 5)

    def test_default_steps(self):
        config = EnvConfig(max_episode_len=7)
        batch = rollout.run_rollouts(config, [[0.6, 0.75]],
                                     _towards([0.6, -0.75]))
        self.assertEqual(batch.states.shape, (1, 8, 2))


class TestControllers(unittest.TestCase):
    def test_policy(self):
        config = policies.PolicyConfig(hidden_sizes=(8, ))
        rng = np.random.default_rng(0)
        bc = policies.PolicyModel.create("bc", config, 0.05, rng)
        states = np.zeros((4, 2), dtype=np.float32)
        np.testing.assert_array_equal(
            rollout.policy_controller(bc)(states, 0),
            policies.policy_act(bc, states))
        gcbc = policies.PolicyModel.create("gcbc", config, 0.05, rng)
        goals = np.ones((4, 2))
        np.testing.assert_array_equal(
            rollout.policy_controller(gcbc, goals)(states, 3),
            policies.policy_act(gcbc, states, goals))

    def test_stage1(self):
        rng = np.random.default_rng(1)
        cvae = goal_proposal.CvaeModel.create(
            goal_proposal.CvaeConfig(horizon=4, hidden_sizes=(8, )), rng)
        for goal_mode in ("state", "latent"):
            controller = policies.PolicyModel.create(
                "stage1",
                policies.PolicyConfig(hidden_sizes=(8, ), goal_mode=goal_mode),
                0.05,
                rng,
                latent_dim=2,
                horizon=4)
            act = rollout.Stage1Controller(cvae, controller,
                                           np.random.default_rng(2))
            batch = rollout.run_rollouts(EnvConfig(), np.zeros((3, 2)), act,
                                         max_steps=9,
                                         stop_in_goal=False)
            self.assertEqual(act.num_goal_draws, 3)
            self.assertEqual(act.goals.shape, (3, 2))
            self.assertTrue(np.all(np.abs(batch.actions) <= np.float32(0.05)))
            if goal_mode == "state":
                self.assertTrue(np.all(np.abs(act.goals) <= 1))

    def test_stage1_errors(self):
        rng = np.random.default_rng(3)
        cvae = goal_proposal.CvaeModel.create(
            goal_proposal.CvaeConfig(horizon=4, hidden_sizes=(8, )), rng)
        config = policies.PolicyConfig(hidden_sizes=(8, ))
        controller = policies.PolicyModel.create("stage1",
                                                 config,
                                                 0.05,
                                                 rng,
                                                 horizon=5)
        with self.assertRaises(ValueError):
            rollout.Stage1Controller(cvae, controller, rng)
        with self.assertRaises(ValueError):
            rollout.Stage1Controller(
                cvae, policies.PolicyModel.create("bc", config, 0.05, rng),
                rng)


if __name__ == "__main__":
    unittest.main()
