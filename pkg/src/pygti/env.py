# Copyright (c) 2020 pygti developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Crossing environments
=====================

Point-mass navigation in ``[-1, 1]^2`` with a horizontal wall at ``wall_y``
pierced by a narrow gap centred on ``x = 0``. Episodes start in the upper
left (UL) or upper right (UR) rectangle and end in the lower left (LL) or
lower right (LR) rectangle.

States and actions are float32 vectors ``(x, y)`` and ``(dx, dy)``; the
transition function is evaluated in float32 so that replaying stored
actions reproduces stored states exactly.
"""
from typing import Optional, Tuple, Union
import dataclasses
import enum
import numpy as np
from .geometry import Box2D, GoalRegion, Point2D, StartRegion

#: Bounds of a rectangle: x_min, x_max, y_min, y_max
Bounds = Tuple[float, float, float, float]


class Variant(enum.Enum):
    """Environment variants"""
    #: The demonstrator crosses the gap without stopping
    POINT_CROSS = "PointCross"
    #: The demonstrator stays near the gap for a random time
    POINT_CROSS_STAY = "PointCrossStay"


@dataclasses.dataclass(frozen=True)
class EnvConfig:
    """Geometry and dynamics of the crossing environments"""
    #: Environment variant: ``PointCross`` or ``PointCrossStay``
    variant: str = Variant.POINT_CROSS.value
    #: Workspace bounds
    workspace: Bounds = (-1.0, 1.0, -1.0, 1.0)
    #: Upper left start region
    start_ul: Bounds = (-0.8, -0.4, 0.6, 0.9)
    #: Upper right start region
    start_ur: Bounds = (0.4, 0.8, 0.6, 0.9)
    #: Lower left goal region
    goal_ll: Bounds = (-0.8, -0.4, -0.9, -0.6)
    #: Lower right goal region
    goal_lr: Bounds = (0.4, 0.8, -0.9, -0.6)
    #: Ordinate of the wall
    wall_y: float = 0.0
    #: Half width of the gap, centred on x = 0
    gap_half_width: float = 0.1
    #: Bound of each action component
    a_max: float = 0.05
    #: Maximum number of steps of an episode
    max_episode_len: int = 300
    #: Standard deviation of the demonstrator action noise
    demo_noise_std: float = 0.01
    #: Range (inclusive) of the dwell duration, PointCrossStay only
    dwell_range: Tuple[int, int] = (20, 80)
    #: Distance to the gap centre at which the demonstrator switches to the
    #: goal, or dwells
    waypoint_radius: float = 0.05
    #: Gain of the pull towards the gap centre while dwelling, PointCrossStay
    #: only
    dwell_gain: float = 0.2
    #: Distance to the goal region centre at which a demonstration ends
    goal_tolerance: float = 0.02
    #: Root seed of the experiment
    seed: int = 0

    def __post_init__(self):
        Variant(self.variant)
        for field in ("workspace", "start_ul", "start_ur", "goal_ll",
                      "goal_lr"):
            object.__setattr__(
                self, field, tuple(float(item)
                                   for item in getattr(self, field)))
        object.__setattr__(self, "dwell_range",
                           tuple(int(item) for item in self.dwell_range))
        self._validate()

    def _validate(self) -> None:
        workspace = self.workspace_box
        starts = [self.start_box(item) for item in StartRegion]
        goals = [self.goal_box(item) for item in GoalRegion]
        regions = starts + goals
        for ix, item in enumerate(regions):
            if not (workspace.contains(item.min_corner)
                    and workspace.contains(item.max_corner)):
                raise ValueError(f"region {item.bounds()} lies outside the "
                                 "workspace")
            for other in regions[ix + 1:]:
                if item.intersects(other):
                    raise ValueError(f"regions {item.bounds()} and "
                                     f"{other.bounds()} overlap")
        if any(item.min_corner.y <= self.wall_y for item in starts):
            raise ValueError("start regions must lie above the wall")
        if any(item.max_corner.y >= self.wall_y for item in goals):
            raise ValueError("goal regions must lie below the wall")
        if self.gap_half_width <= 0:
            raise ValueError(
                f"gap_half_width {self.gap_half_width} must be > 0")
        if self.a_max <= 0:
            raise ValueError(f"a_max {self.a_max} must be > 0")
        if self.max_episode_len < 1:
            raise ValueError(
                f"max_episode_len {self.max_episode_len} must be >= 1")
        if self.demo_noise_std < 0:
            raise ValueError(
                f"demo_noise_std {self.demo_noise_std} must be >= 0")
        if len(self.dwell_range) != 2 or not (0 <= self.dwell_range[0] <=
                                              self.dwell_range[1]):
            raise ValueError(f"invalid dwell range {self.dwell_range}")
        if not 0 <= self.dwell_gain <= 1:
            raise ValueError(
                f"dwell_gain {self.dwell_gain} must lie in [0, 1]")
        if self.goal_tolerance <= 0:
            raise ValueError(
                f"goal_tolerance {self.goal_tolerance} must be > 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError(
                f"seed {self.seed} is not an unsigned 64-bit integer")

    @property
    def stay(self) -> bool:
        """True if the demonstrator dwells near the gap"""
        return Variant(self.variant) is Variant.POINT_CROSS_STAY

    @property
    def workspace_box(self) -> Box2D:
        """Gets the workspace"""
        return Box2D.from_bounds(*self.workspace)

    @property
    def gap_center(self) -> Point2D:
        """Gets the centre of the gap"""
        return Point2D(0.0, self.wall_y)

    def start_box(self, region: Union[StartRegion, str]) -> Box2D:
        """Gets the rectangle of a start region"""
        region = StartRegion(region)
        return Box2D.from_bounds(
            *(self.start_ul if region is StartRegion.UL else self.start_ur))

    def goal_box(self, region: Union[GoalRegion, str]) -> Box2D:
        """Gets the rectangle of a goal region"""
        region = GoalRegion(region)
        return Box2D.from_bounds(
            *(self.goal_ll if region is GoalRegion.LL else self.goal_lr))


def reset(config: EnvConfig,
          region: Union[StartRegion, str],
          rng: np.random.Generator,
          size: Optional[int] = None) -> np.ndarray:
    """Draws initial states uniformly inside a start region.

    Args:
        config (pygti.env.EnvConfig): Environment configuration
        region (pygti.geometry.StartRegion): ``UL`` or ``UR``
        rng (numpy.random.Generator): Random generator
        size (int, optional): Number of states drawn. If not set, a single
            state ``(2,)`` is returned, otherwise ``(size, 2)``.

    Return:
        numpy.ndarray: float32 states.
    """
    return config.start_box(region).sample(rng, size)


def step(config: EnvConfig, state: np.ndarray,
         action: np.ndarray) -> np.ndarray:
    """Applies the transition function.

    The action is clamped componentwise to ``[-a_max, a_max]``, the
    candidate state ``state + action`` is clamped to the workspace, and a
    motion crossing the wall outside the gap stops on the wall: the
    abscissa is left unchanged and the ordinate is set to the last value on
    the side the motion started from (``wall_y`` above the wall, the float32
    value just below it otherwise).

    Args:
        config (pygti.env.EnvConfig): Environment configuration
        state (numpy.ndarray): A state ``(2,)`` or states ``(n, 2)``
        action (numpy.ndarray): Actions, same shape as the states

    Return:
        numpy.ndarray: the float32 next states.

    Raises:
        ValueError: if the states or the actions are not finite, or if
            their shapes differ.
    """
    state = np.asarray(state, dtype=np.float32)
    action = np.asarray(action, dtype=np.float32)
    if state.shape != action.shape or state.shape[-1:] != (2, ):
        raise ValueError(f"state of shape {state.shape} and action of shape "
                         f"{action.shape} are incompatible")
    if not (np.all(np.isfinite(state)) and np.all(np.isfinite(action))):
        raise ValueError("states and actions must be finite")
    a_max = np.float32(config.a_max)
    x_min, x_max, y_min, y_max = (np.float32(item)
                                  for item in config.workspace)
    wall = np.float32(config.wall_y)

    action = np.clip(action, -a_max, a_max)
    candidate = state + action
    candidate[..., 0] = np.clip(candidate[..., 0], x_min, x_max)
    candidate[..., 1] = np.clip(candidate[..., 1], y_min, y_max)

    above = state[..., 1] >= wall
    crossing = above != (candidate[..., 1] >= wall)
    dy = candidate[..., 1] - state[..., 1]
    ratio = np.divide(wall - state[..., 1],
                      dy,
                      out=np.zeros_like(dy),
                      where=crossing)
    x_cross = state[..., 0] + ratio * (candidate[..., 0] - state[..., 0])
    blocked = crossing & (np.abs(x_cross) > np.float32(config.gap_half_width))

    result = candidate
    result[..., 0] = np.where(blocked, state[..., 0], candidate[..., 0])
    result[..., 1] = np.where(
        blocked,
        np.where(above, wall, np.nextafter(wall, np.float32(-np.inf))),
        candidate[..., 1])
    return result


def goal_region_of(config: EnvConfig,
                   state: np.ndarray) -> Optional[GoalRegion]:
    """Gets the goal region containing a state, if any"""
    for region in GoalRegion:
        if config.goal_box(region).contains(state):
            return region
    return None


def in_goal(config: EnvConfig, states: np.ndarray) -> np.ndarray:
    """Tests whether states lie inside LL or LR.

    Args:
        states (numpy.ndarray): A state ``(2,)`` or states ``(n, 2)``

    Return:
        numpy.ndarray: a boolean per state.
    """
    return config.goal_box(GoalRegion.LL).contains(states) | \
        config.goal_box(GoalRegion.LR).contains(states)


class Phase(enum.IntEnum):
    """Phases of the scripted demonstrator"""
    TO_GAP = 0
    DWELL = 1
    TO_GOAL = 2


@dataclasses.dataclass
class DemonstratorState:
    """Internal state of the scripted demonstrator"""
    #: Centre of the goal region the demonstrator heads to
    target: np.ndarray
    #: Current phase
    phase: Phase = Phase.TO_GAP
    #: Remaining dwell steps (PointCrossStay)
    dwell_remaining: int = 0

    @classmethod
    def start(cls, config: EnvConfig, goal_region: Union[GoalRegion, str],
              rng: np.random.Generator) -> "DemonstratorState":
        """Starts a new demonstration, drawing its dwell duration"""
        target = np.asarray(config.goal_box(goal_region).center(),
                            dtype=np.float64)
        dwell = 0
        if config.stay:
            dwell = int(
                rng.integers(config.dwell_range[0],
                             config.dwell_range[1] + 1))
        return cls(target, Phase.TO_GAP, dwell)


def scripted_action(config: EnvConfig, state: np.ndarray,
                    goal_region: Union[GoalRegion, str],
                    phase_state: Optional[DemonstratorState],
                    rng: np.random.Generator) -> np.ndarray:
    """Computes the action of the hardcoded demonstrator.

    The demonstrator heads to the gap centre, then to the centre of the goal
    region, at a speed bounded by ``a_max``. With PointCrossStay, once within
    ``waypoint_radius`` of the gap centre it dwells for the dwell duration:
    the action is the noise plus a pull of ``dwell_gain`` times the offset
    to the centre, below ``dwell_gain * waypoint_radius`` inside the radius.
    Outside the radius the dwell is suspended and the demonstrator heads back
    to the centre.
    Gaussian noise of standard deviation ``demo_noise_std`` is added to
    every component before clamping.

    Args:
        config (pygti.env.EnvConfig): Environment configuration
        state (numpy.ndarray): Current state
        goal_region (pygti.geometry.GoalRegion): Region to reach
        phase_state (pygti.env.DemonstratorState, optional): Demonstrator
            state, updated in place. If not set, a demonstration without
            dwell is started.
        rng (numpy.random.Generator): Random generator

    Return:
        numpy.ndarray: the float32 action.
    """
    state = np.asarray(state, dtype=np.float64)
    if phase_state is None:
        phase_state = DemonstratorState(
            np.asarray(config.goal_box(goal_region).center(), np.float64))
    gap = np.asarray(config.gap_center, dtype=np.float64)
    near_gap = np.linalg.norm(gap - state) <= config.waypoint_radius

    if phase_state.phase is Phase.TO_GAP and near_gap:
        phase_state.phase = Phase.DWELL if phase_state.dwell_remaining > 0 \
            else Phase.TO_GOAL

    velocity = np.zeros(2)
    if phase_state.phase is Phase.DWELL:
        if near_gap:
            velocity = config.dwell_gain * (gap - state)
            phase_state.dwell_remaining -= 1
            if phase_state.dwell_remaining <= 0:
                phase_state.phase = Phase.TO_GOAL
        else:
            velocity = _heading(state, gap, config.a_max)
    elif phase_state.phase is Phase.TO_GAP:
        velocity = _heading(state, gap, config.a_max)
    else:
        velocity = _heading(state, phase_state.target, config.a_max)

    action = velocity + rng.normal(0.0, config.demo_noise_std, size=2)
    return np.clip(action, -config.a_max, config.a_max).astype(np.float32)


def _heading(state: np.ndarray, waypoint: np.ndarray,
             speed: float) -> np.ndarray:
    """Velocity towards a waypoint, without overshooting it"""
    delta = np.asarray(waypoint, dtype=np.float64) - state
    distance = np.linalg.norm(delta)
    if distance == 0:
        return np.zeros(2)
    return delta * min(1.0, speed / distance)
