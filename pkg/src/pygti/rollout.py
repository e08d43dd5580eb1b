# Copyright (c) 2020 pygti developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Closed-loop rollouts
====================

Runs a batch of episodes in lockstep. An episode ends as soon as its state
lies inside a goal region, or after the number of steps requested; the
state of a finished episode is frozen while the others go on.
"""
from typing import Callable, List, Optional, Sequence
import dataclasses
import numpy as np
from . import env
from . import goal_proposal
from . import policies
from .dataset import Trajectory
from .geometry import StartRegion

#: Computes the actions ``(n, 2)`` of the states ``(n, 2)`` at a step
Controller = Callable[[np.ndarray, int], np.ndarray]


@dataclasses.dataclass
class RolloutBatch:
    """States and actions of a batch of episodes"""
    #: States ``(n, max_steps + 1, 2)``, the last state of a finished
    #: episode being repeated
    states: np.ndarray
    #: Actions ``(n, max_steps, 2)``, zero after the end of an episode
    actions: np.ndarray
    #: Number of actions of every episode
    lengths: np.ndarray

    def __len__(self) -> int:
        return len(self.lengths)

    @property
    def final_states(self) -> np.ndarray:
        """Gets the last state of every episode"""
        return self.states[np.arange(len(self)), self.lengths]

    def trajectory(self, index: int, start_region: StartRegion,
                   config: env.EnvConfig) -> Trajectory:
        """Extracts an episode"""
        length = self.lengths[index]
        states = self.states[index, :length + 1].copy()
        return Trajectory(states, self.actions[index, :length].copy(),
                          start_region, env.goal_region_of(config, states[-1]))

    def trajectories(self, start_regions: Sequence[StartRegion],
                     config: env.EnvConfig) -> List[Trajectory]:
        """Extracts every episode"""
        return [
            self.trajectory(ix, item, config)
            for ix, item in enumerate(start_regions)
        ]


def run_rollouts(config: env.EnvConfig,
                 starts: np.ndarray,
                 controller: Controller,
                 max_steps: Optional[int] = None,
                 stop_in_goal: bool = True) -> RolloutBatch:
    """Runs episodes from the given initial states.

    Args:
        config (pygti.env.EnvConfig): Environment configuration
        starts (numpy.ndarray): Initial states ``(n, 2)``
        controller (callable): Computes the actions of all the episodes,
            finished or not, at every step
        max_steps (int, optional): Number of steps. Defaults to
            ``max_episode_len``.
        stop_in_goal (bool, optional): End the episodes entering a goal
            region. Defaults to ``True``.

    Return:
        pygti.rollout.RolloutBatch: the episodes.
    """
    max_steps = config.max_episode_len if max_steps is None else max_steps
    starts = np.asarray(starts, dtype=np.float32).reshape(-1, 2)
    count = len(starts)
    states = np.empty((count, max_steps + 1, 2), dtype=np.float32)
    actions = np.zeros((count, max_steps, 2), dtype=np.float32)
    states[:, 0] = starts
    done = env.in_goal(config, starts) if stop_in_goal else np.zeros(
        count, dtype=bool)
    lengths = np.where(done, 0, max_steps)

    for step in range(max_steps):
        current = states[:, step]
        action = np.asarray(controller(current, step), dtype=np.float32)
        following = env.step(config, current, action)
        active = ~done
        states[:, step + 1] = np.where(active[:, np.newaxis], following,
                                       current)
        actions[active, step] = action[active]
        if stop_in_goal:
            reached = active & env.in_goal(config, following)
            lengths[reached] = step + 1
            done |= reached
            if np.all(done):
                states[:, step + 2:] = states[:, step + 1:step + 2]
                break
    return RolloutBatch(states, actions, lengths)


def policy_controller(p: policies.PolicyModel,
                      goals: Optional[np.ndarray] = None) -> Controller:
    """Builds the controller of a BC or GCBC policy.

    Args:
        p (pygti.policies.PolicyModel): Policy
        goals (numpy.ndarray, optional): Goal of every episode ``(n, 2)``,
            required by GCBC policies
    """
    def act(states: np.ndarray, _step: int) -> np.ndarray:
        return policies.policy_act(p, states, goals)

    return act


class Stage1Controller:
    """Undirected Stage-1 policy: every ``H`` steps a goal is drawn from the
    prior of the goal proposal model for every episode, then followed by the
    low-level controller.

    Args:
        cvae (pygti.goal_proposal.CvaeModel): Goal proposal model
        controller (pygti.policies.PolicyModel): Stage-1 controller
        rng (numpy.random.Generator): Random generator of the goals
    """
    def __init__(self, cvae: goal_proposal.CvaeModel,
                 controller: policies.PolicyModel, rng: np.random.Generator):
        if controller.kind is not policies.PolicyKind.STAGE1:
            raise ValueError(f"a {controller.kind.value} policy is not a "
                             "Stage-1 controller")
        if controller.horizon != cvae.horizon:
            raise ValueError(f"controller horizon {controller.horizon} does "
                             f"not match the goal horizon {cvae.horizon}")
        self.cvae = cvae
        self.controller = controller
        self.rng = rng
        self.goals = None  # type: Optional[np.ndarray]
        #: Number of goals drawn for every episode
        self.num_goal_draws = 0

    def propose(self, states: np.ndarray) -> np.ndarray:
        """Draws a goal for every state"""
        latents = goal_proposal.prior_sample(self.cvae, self.rng, len(states))
        if self.controller.goal_mode is policies.GoalMode.LATENT:
            return latents
        return goal_proposal.decode(self.cvae, latents, states)

    def __call__(self, states: np.ndarray, step: int) -> np.ndarray:
        if step % self.controller.horizon == 0:
            self.goals = self.propose(states)
            self.num_goal_draws += 1
        return policies.policy_act(self.controller, states, self.goals)
