# Copyright (c) 2020 pygti developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Policies
========

Deterministic feedforward policies regressing actions with a squared error
loss:

* ``BC``: ``a = pi(s)``;
* ``GCBC``: ``a = pi(s, s_g)``, the goal being the last state of the
  trajectory (Stage-2 policies are GCBC policies);
* ``Stage1``: the low-level controller ``a = pi(s, g)`` following the goal
  ``g`` proposed ``H`` steps ahead, either a state or a latent goal.
"""
from typing import Optional, Tuple, Union
import dataclasses
import enum
import numpy as np
from .core import (AdamState, Mlp, MlpSpec, ParamStore, adam_step,
                   join_inputs)
from .errors import TrainingDivergedError
from . import goal_proposal


class PolicyKind(enum.Enum):
    """Kinds of policies"""
    BC = "bc"
    GCBC = "gcbc"
    STAGE1 = "stage1"


class GoalMode(enum.Enum):
    """Goals followed by the Stage-1 controller"""
    #: The state reached ``H`` steps ahead
    STATE = "state"
    #: A latent goal of the goal proposal model
    LATENT = "latent"


@dataclasses.dataclass(frozen=True)
class PolicyConfig:
    """Hyperparameters of the policies"""
    #: Sizes of the hidden layers
    hidden_sizes: Tuple[int, ...] = (64, 64)
    #: Activation of the hidden layers
    activation: str = "tanh"
    #: Adam step size
    learning_rate: float = 1e-3
    #: Number of samples per update
    batch_size: int = 128
    #: Goals of the Stage-1 controller: ``state`` or ``latent``
    goal_mode: str = GoalMode.STATE.value

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes",
                           tuple(int(item) for item in self.hidden_sizes))
        GoalMode(self.goal_mode)
        if self.batch_size < 1:
            raise ValueError(f"batch_size {self.batch_size} must be >= 1")


class PolicyModel:
    """Network and action bounds of a policy.

    Args:
        kind (PolicyKind): Kind of policy
        spec (pygti.core.MlpSpec): Network architecture
        params (pygti.core.ParamStore): Network parameters
        a_max (float): Bound of each action component
        goal_mode (GoalMode, optional): Goals of a Stage-1 controller
        horizon (int, optional): Goal horizon of a Stage-1 controller
    """
    def __init__(self,
                 kind: Union[PolicyKind, str],
                 spec: MlpSpec,
                 params: ParamStore,
                 a_max: float,
                 goal_mode: Optional[Union[GoalMode, str]] = None,
                 horizon: Optional[int] = None):
        self.kind = PolicyKind(kind)
        if self.kind is PolicyKind.STAGE1:
            if goal_mode is None or horizon is None:
                raise ValueError(
                    "a Stage-1 controller needs a goal mode and a horizon")
            self.goal_mode = GoalMode(goal_mode)  # type: Optional[GoalMode]
            self.horizon = int(horizon)  # type: Optional[int]
        else:
            self.goal_mode = None
            self.horizon = None
        if spec.output_size != 2:
            raise ValueError(
                f"a policy outputs 2 values, not {spec.output_size}")
        if self.kind is PolicyKind.BC and spec.input_size != 2:
            raise ValueError(
                f"a BC policy reads 2 values, not {spec.input_size}")
        if self.kind is PolicyKind.GCBC and spec.input_size != 4:
            raise ValueError(
                f"a GCBC policy reads 4 values, not {spec.input_size}")
        if a_max <= 0:
            raise ValueError(f"a_max {a_max} must be > 0")
        self.spec = spec
        self.network = Mlp(spec)
        self.network.check_params(params)
        self.params = params
        self.a_max = float(a_max)

    @classmethod
    def create(cls,
               kind: Union[PolicyKind, str],
               config: PolicyConfig,
               a_max: float,
               rng: np.random.Generator,
               latent_dim: int = 2,
               horizon: Optional[int] = None) -> "PolicyModel":
        """Creates a policy with freshly initialized parameters.

        Args:
            kind (PolicyKind): Kind of policy
            config (PolicyConfig): Hyperparameters
            a_max (float): Bound of each action component
            rng (numpy.random.Generator): Random generator
            latent_dim (int, optional): Dimension of the latent goals of a
                Stage-1 controller in latent mode
            horizon (int, optional): Goal horizon of a Stage-1 controller
        """
        kind = PolicyKind(kind)
        goal_mode = GoalMode(config.goal_mode)
        goal_size = 0
        if kind is PolicyKind.GCBC:
            goal_size = 2
        elif kind is PolicyKind.STAGE1:
            goal_size = latent_dim if goal_mode is GoalMode.LATENT else 2
        spec = MlpSpec((2 + goal_size, ) + config.hidden_sizes + (2, ),
                       config.activation)
        params = Mlp(spec).init_params(ParamStore(), rng)
        return cls(kind, spec, params, a_max,
                   goal_mode if kind is PolicyKind.STAGE1 else None,
                   horizon if kind is PolicyKind.STAGE1 else None)

    @property
    def goal_size(self) -> int:
        """Gets the number of goal values read by the policy"""
        return self.spec.input_size - 2

    def with_params(self, params: ParamStore) -> "PolicyModel":
        """Gets the same policy bound to another parameter store"""
        return PolicyModel(self.kind, self.spec, params, self.a_max,
                           self.goal_mode, self.horizon)

    def __repr__(self) -> str:
        result = "<%s.%s kind=%s layers=%s" % (
            self.__class__.__module__, self.__class__.__name__,
            self.kind.value, self.spec.layer_sizes)
        if self.kind is PolicyKind.STAGE1:
            result += " goal_mode=%s H=%d" % (self.goal_mode.value,
                                              self.horizon)
        return result + ">"


def _inputs(p: PolicyModel, states: np.ndarray,
            goals: Optional[np.ndarray]) -> np.ndarray:
    states = np.asarray(states, dtype=np.float64)
    if p.goal_size == 0:
        if goals is not None:
            raise ValueError(f"a {p.kind.value} policy takes no goal")
        return states
    if goals is None:
        raise ValueError(f"a {p.kind.value} policy needs a goal")
    goals = np.asarray(goals, dtype=np.float64)
    if goals.shape[-1] != p.goal_size:
        raise ValueError(f"goal of shape {goals.shape} does not match the "
                         f"goal size {p.goal_size}")
    return join_inputs(states, goals)


def policy_act(p: PolicyModel,
               s: np.ndarray,
               goal: Optional[np.ndarray] = None) -> np.ndarray:
    """Computes the action of a policy.

    Args:
        p (pygti.policies.PolicyModel): Policy
        s (numpy.ndarray): State(s) ``(2,)`` or ``(n, 2)``
        goal (numpy.ndarray, optional): Goal(s), required by the GCBC and
            Stage-1 policies only

    Return:
        numpy.ndarray: the float32 action(s), clamped to ``[-a_max, a_max]``.

    Raises:
        ValueError: if a goal is missing, unexpected or has the wrong size.
    """
    outputs, _ = p.network.forward(p.params, _inputs(p, s, goal))
    return np.clip(outputs, -p.a_max, p.a_max).astype(np.float32)


def policy_loss(p: PolicyModel, inputs: np.ndarray,
                targets: np.ndarray) -> Tuple[float, ParamStore]:
    """Evaluates the mean squared action error and its gradient.

    The error of a sample is the squared Euclidean norm of the difference
    between the target and the (unclamped) network output.

    Return:
        tuple: the mean loss and its float64 gradient.
    """
    inputs = np.atleast_2d(inputs)
    targets = np.atleast_2d(np.asarray(targets, dtype=np.float64))
    if len(inputs) == 0:
        raise ValueError("empty batch")
    if len(inputs) != len(targets):
        raise ValueError(f"{len(inputs)} inputs do not match "
                         f"{len(targets)} targets")
    outputs, cache = p.network.forward(p.params, inputs)
    residual = targets - outputs
    loss = float(np.mean(np.sum(residual * residual, axis=1)))
    grads = p.params.zeros_like(np.float64)
    p.network.backward(p.params, cache, -2.0 * residual / len(inputs), grads)
    return loss, grads


def _update(p: PolicyModel, inputs: np.ndarray, targets: np.ndarray,
            opt: AdamState) -> float:
    loss, grads = policy_loss(p, inputs, targets)
    if not np.isfinite(loss):
        raise TrainingDivergedError(opt.step_count, dict(loss=loss))
    adam_step(p.params, grads, opt)
    return loss


def _check_kind(p: PolicyModel, kind: PolicyKind) -> None:
    if p.kind is not kind:
        raise ValueError(
            f"a {kind.value} update is not defined for a {p.kind.value} "
            "policy")


def bc_train_step(p: PolicyModel, states: np.ndarray, actions: np.ndarray,
                  opt: AdamState) -> float:
    """Applies one Adam update minimizing ``||a_t - pi(s_t)||^2``.

    Return:
        float: the mean loss of the batch before the update.
    """
    _check_kind(p, PolicyKind.BC)
    return _update(p, _inputs(p, np.atleast_2d(states), None), actions, opt)


def gcbc_train_step(p: PolicyModel, states: np.ndarray, actions: np.ndarray,
                    goals: np.ndarray, opt: AdamState) -> float:
    """Applies one Adam update minimizing ``||a_t - pi(s_t, s_T)||^2``.

    Return:
        float: the mean loss of the batch before the update.
    """
    _check_kind(p, PolicyKind.GCBC)
    return _update(p, _inputs(p, np.atleast_2d(states), np.atleast_2d(goals)),
                   actions, opt)


def stage1_batch(p: PolicyModel, cvae: goal_proposal.CvaeModel,
                 states: np.ndarray, actions: np.ndarray,
                 rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Builds the regression samples of a batch of windows.

    Every step ``t'`` of a window starting at ``t`` is paired with the goal
    derived from ``s_{t+H}``: the state itself, or a sample of the posterior
    ``encode(s_{t+H}, s_t)`` shared by the whole window.

    Args:
        p (pygti.policies.PolicyModel): Stage-1 controller
        cvae (pygti.goal_proposal.CvaeModel): Goal proposal model
        states (numpy.ndarray): Window states ``(n, H + 1, 2)``
        actions (numpy.ndarray): Window actions ``(n, H, 2)``
        rng (numpy.random.Generator): Random generator

    Return:
        tuple: the inputs ``(n * H, 2 + goal_size)`` and the targets
        ``(n * H, 2)``.
    """
    _check_kind(p, PolicyKind.STAGE1)
    horizon = p.horizon
    states = np.asarray(states, dtype=np.float64)
    actions = np.asarray(actions, dtype=np.float64)
    if states.ndim != 3 or states.shape[1] < horizon + 1:
        raise ValueError(f"windows of shape {states.shape} hold fewer than "
                         f"{horizon + 1} states")
    if actions.ndim != 3 or len(actions) != len(states) or actions.shape[
            1] < horizon:
        raise ValueError(f"windows of shape {actions.shape} hold fewer than "
                         f"{horizon} actions")
    states = states[:, :horizon + 1]
    actions = actions[:, :horizon]
    count = len(states)
    if p.goal_mode is GoalMode.STATE:
        goals = states[:, horizon]
    else:
        mu, sigma = goal_proposal.encode(cvae, states[:, horizon],
                                         states[:, 0])
        goals = goal_proposal.reparam_sample(mu, sigma, rng)
    goals = np.repeat(goals[:, np.newaxis, :], horizon, axis=1)
    inputs = np.concatenate([states[:, :horizon], goals], axis=2)
    return inputs.reshape(count * horizon, -1), actions.reshape(-1, 2)


def stage1_train_step(p: PolicyModel, cvae: goal_proposal.CvaeModel,
                      states: np.ndarray, actions: np.ndarray,
                      opt: AdamState, rng: np.random.Generator) -> float:
    """Applies one Adam update to the Stage-1 controller; the goal proposal
    model is left untouched.

    Args:
        p (pygti.policies.PolicyModel): Stage-1 controller
        cvae (pygti.goal_proposal.CvaeModel): Goal proposal model
        states (numpy.ndarray): Window states ``(n, H + 1, 2)``
        actions (numpy.ndarray): Window actions ``(n, H, 2)``
        opt (pygti.core.AdamState): Optimizer state
        rng (numpy.random.Generator): Random generator

    Return:
        float: the mean loss of the batch before the update.

    Raises:
        ValueError: if the windows hold fewer than ``H + 1`` states.
    """
    inputs, targets = stage1_batch(p, cvae, states, actions, rng)
    return _update(p, inputs, targets, opt)
