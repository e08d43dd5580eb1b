# Copyright (c) 2020 pygti developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Trajectory datasets
===================

Storage of demonstrations and rollouts, scripted data collection and the
samplers feeding the training loops.

A dataset is written as a CSV file with the header ``traj_id,t,x,y,dx,dy``
(one row per state, the terminal state of each trajectory with empty
``dx,dy``) and a JSON manifest stored next to it with the ``.json``
extension.
"""
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union
import dataclasses
import json
import logging
import math
import pathlib
import numpy as np
import pandas as pd
from . import env
from .errors import DemonstratorError, EmptyDatasetError
from .geometry import GoalRegion, StartRegion

LOGGER = logging.getLogger(__name__)

#: Version of the dataset file format
FORMAT_VERSION = 1

#: Columns of the dataset files
COLUMNS = ("traj_id", "t", "x", "y", "dx", "dy")

#: Format of the floating point values: exact float32 round trip
FLOAT_FORMAT = "%.9g"

Path = Union[str, pathlib.Path]


@dataclasses.dataclass
class Trajectory:
    """Sequence ``s_0, a_0, s_1, ..., s_T``"""
    #: States, float32 matrix ``(T + 1, 2)``
    states: np.ndarray
    #: Actions, float32 matrix ``(T, 2)``
    actions: np.ndarray
    #: Start region of the first state
    start_region: StartRegion
    #: Goal region containing the last state, if any
    end_label: Optional[GoalRegion] = None

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=np.float32)
        self.actions = np.asarray(self.actions,
                                  dtype=np.float32).reshape(-1, 2)
        self.start_region = StartRegion(self.start_region)
        if self.end_label is not None:
            self.end_label = GoalRegion(self.end_label)
        if self.states.ndim != 2 or self.states.shape[1] != 2:
            raise ValueError(
                f"states of shape {self.states.shape} are not 2D points")
        if len(self.states) != len(self.actions) + 1:
            raise ValueError(f"{len(self.states)} states do not match "
                             f"{len(self.actions)} actions")

    def __len__(self) -> int:
        return len(self.actions)

    @property
    def goal(self) -> np.ndarray:
        """Gets the last state"""
        return self.states[-1]

    def replay(self, config: env.EnvConfig) -> np.ndarray:
        """Applies the actions from the first state.

        Return:
            numpy.ndarray: the states visited.
        """
        result = np.empty_like(self.states)
        result[0] = self.states[0]
        for ix, action in enumerate(self.actions):
            result[ix + 1] = env.step(config, result[ix], action)
        return result

    def replay_error(self, config: env.EnvConfig) -> float:
        """Gets the maximum distance between the stored and replayed
        states"""
        if len(self) == 0:
            return 0.0
        return float(
            np.max(np.abs(self.replay(config).astype(np.float64) -
                          self.states)))


@dataclasses.dataclass
class DemoDataset:
    """Set of demonstrations with the environment that produced them"""
    #: Trajectories
    trajectories: List[Trajectory]
    #: Environment configuration
    env_config: env.EnvConfig
    #: Root seed of the collection
    seed: int = 0
    #: Version of the file format
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        if not self.trajectories:
            raise EmptyDatasetError("a dataset needs at least one trajectory")

    def __len__(self) -> int:
        return len(self.trajectories)

    def __iter__(self):
        return iter(self.trajectories)

    def validate(self, tolerance: float = 1e-6) -> None:
        """Checks that every trajectory is reproduced by the environment.

        Raises:
            ValueError: if a replayed state differs by more than
                ``tolerance`` from the stored one.
        """
        for ix, item in enumerate(self.trajectories):
            error = item.replay_error(self.env_config)
            if error > tolerance:
                raise ValueError(f"trajectory {ix} does not replay: error "
                                 f"{error!r} > {tolerance!r}")

    def all_states(self) -> np.ndarray:
        """Gets the states of every trajectory, stacked"""
        return np.concatenate([item.states for item in self.trajectories])

    def manifest(self) -> Dict[str, Any]:
        """Gets the description written next to the CSV file"""
        return {
            "format_version": self.format_version,
            "seed": self.seed,
            "env_config": dataclasses.asdict(self.env_config),
            "trajectories": trajectory_labels(self.trajectories),
        }

    def save(self, path: Path) -> None:
        """Writes the dataset to ``path`` and its manifest"""
        write_trajectories(path, self.trajectories)
        write_manifest(manifest_path(path), self.manifest())

    @classmethod
    def load(cls, path: Path) -> "DemoDataset":
        """Reads a dataset written by :py:meth:`save`"""
        manifest = read_manifest(manifest_path(path))
        check_format_version(manifest, path)
        return cls(read_trajectories(path, manifest["trajectories"]),
                   env.EnvConfig(**manifest["env_config"]), manifest["seed"],
                   manifest["format_version"])


def manifest_path(path: Path) -> pathlib.Path:
    """Gets the path of the manifest describing a dataset file"""
    return pathlib.Path(path).with_suffix(".json")


def write_manifest(path: Path, manifest: Dict[str, Any]) -> None:
    """Writes a JSON manifest"""
    with open(path, "w", encoding="utf-8") as stream:
        json.dump(manifest, stream, indent=2, sort_keys=True)
        stream.write("\n")


def read_manifest(path: Path) -> Dict[str, Any]:
    """Reads a JSON manifest"""
    with open(path, "r", encoding="utf-8") as stream:
        return json.load(stream)


def check_format_version(manifest: Dict[str, Any], path: Path) -> None:
    """Rejects the manifests written with another file format"""
    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"{path}: format version {version!r} is not "
                         f"handled, expected {FORMAT_VERSION}")


def trajectory_labels(
        trajectories: Iterable[Trajectory]) -> List[Dict[str, Any]]:
    """Gets the start region and the end label of every trajectory"""
    return [
        dict(start_region=item.start_region.value,
             end_label=None
             if item.end_label is None else item.end_label.value)
        for item in trajectories
    ]


def to_frame(trajectories: Iterable[Trajectory]) -> pd.DataFrame:
    """Builds the table written to the dataset files"""
    frames = []
    for ix, item in enumerate(trajectories):
        count = len(item.states)
        actions = np.full((count, 2), np.nan)
        actions[:-1] = item.actions
        frames.append(
            pd.DataFrame({
                "traj_id": np.full(count, ix, dtype=np.int64),
                "t": np.arange(count, dtype=np.int64),
                "x": item.states[:, 0].astype(np.float64),
                "y": item.states[:, 1].astype(np.float64),
                "dx": actions[:, 0],
                "dy": actions[:, 1],
            }))
    if not frames:
        return pd.DataFrame(columns=list(COLUMNS))
    return pd.concat(frames, ignore_index=True)


def write_trajectories(path: Path, trajectories: Iterable[Trajectory]) -> None:
    """Writes trajectories to a CSV file"""
    to_frame(trajectories).to_csv(path,
                                  index=False,
                                  float_format=FLOAT_FORMAT,
                                  na_rep="",
                                  lineterminator="\n",
                                  encoding="utf-8")


def read_trajectories(
        path: Path,
        labels: Optional[List[Dict[str, Any]]] = None) -> List[Trajectory]:
    """Reads trajectories from a CSV file.

    Args:
        path (str): Path to the CSV file
        labels (list, optional): Start region and end label of each
            trajectory, as stored in the manifest. If not set, they are
            inferred from the first and last states.

    Return:
        list: the trajectories, in file order.
    """
    frame = pd.read_csv(path,
                        dtype={
                            "traj_id": np.int64,
                            "t": np.int64
                        },
                        float_precision="round_trip",
                        encoding="utf-8")
    if tuple(frame.columns) != COLUMNS:
        raise ValueError(f"{path}: unexpected header {tuple(frame.columns)}")
    result = []
    for traj_id, group in frame.groupby("traj_id", sort=True):
        if not np.array_equal(group["t"].to_numpy(), np.arange(len(group))):
            raise ValueError(
                f"{path}: trajectory {traj_id} has non-contiguous steps")
        states = group[["x", "y"]].to_numpy(dtype=np.float32)
        actions = group[["dx", "dy"]].to_numpy(dtype=np.float32)
        if not np.all(np.isnan(actions[-1])) or np.any(
                np.isnan(actions[:-1])):
            raise ValueError(f"{path}: trajectory {traj_id} has misplaced "
                             "empty actions")
        if labels is not None:
            label = labels[len(result)]
            start, end = label["start_region"], label["end_label"]
        else:
            start = StartRegion.UL if states[0, 0] < 0 else StartRegion.UR
            end = None
        result.append(Trajectory(states, actions[:-1], start, end))
    if labels is not None and len(labels) != len(result):
        raise ValueError(f"{path}: {len(result)} trajectories found, "
                         f"{len(labels)} described by the manifest")
    return result


def demonstrate(config: env.EnvConfig, start_region: StartRegion,
                goal_region: GoalRegion,
                rng: np.random.Generator) -> Tuple[Trajectory, bool]:
    """Runs the scripted demonstrator for one episode.

    The episode ends when the demonstrator, heading to the goal, comes
    within ``goal_tolerance`` of the centre of the goal region, or after
    ``max_episode_len`` steps.

    Return:
        tuple: the trajectory and whether the goal was reached.
    """
    start_region = StartRegion(start_region)
    goal_region = GoalRegion(goal_region)
    box = config.goal_box(goal_region)
    state = env.reset(config, start_region, rng)
    phase_state = env.DemonstratorState.start(config, goal_region, rng)
    states, actions = [state], []
    reached = False
    for _ in range(config.max_episode_len):
        action = env.scripted_action(config, state, goal_region, phase_state,
                                     rng)
        state = env.step(config, state, action)
        states.append(state)
        actions.append(action)
        if phase_state.phase is env.Phase.TO_GOAL and bool(
                box.contains(state)) and np.linalg.norm(
                    state.astype(np.float64) -
                    phase_state.target) <= config.goal_tolerance:
            reached = True
            break
    trajectory = Trajectory(np.stack(states), np.stack(actions),
                            start_region, goal_region if reached else None)
    return trajectory, reached


def collect_demos(config: env.EnvConfig,
                  n: int,
                  rng: np.random.Generator,
                  max_failure_rate: float = 0.1) -> DemoDataset:
    """Collects scripted demonstrations, alternating UL to LR and UR to LL.

    Demonstrations missing their goal are drawn again.

    Args:
        config (pygti.env.EnvConfig): Environment configuration
        n (int): Number of demonstrations
        rng (numpy.random.Generator): Random generator
        max_failure_rate (float, optional): Largest share of failed attempts
            tolerated, relative to ``n``. Defaults to ``0.1``.

    Return:
        pygti.dataset.DemoDataset: the demonstrations.

    Raises:
        DemonstratorError: if the failures exceed the tolerated share.
    """
    if n < 2:
        raise ValueError(f"n {n} must be >= 2")
    pairings = ((StartRegion.UL, GoalRegion.LR), (StartRegion.UR,
                                                  GoalRegion.LL))
    budget = math.floor(max_failure_rate * n)
    trajectories = []
    failures = 0
    while len(trajectories) < n:
        start, goal = pairings[len(trajectories) % 2]
        trajectory, reached = demonstrate(config, start, goal, rng)
        if reached:
            trajectories.append(trajectory)
            continue
        failures += 1
        LOGGER.warning("demonstration %s -> %s missed its goal, drawn again",
                       start.value, goal.value)
        if failures > budget:
            raise DemonstratorError(
                f"{failures} of {failures + len(trajectories)} scripted "
                "demonstrations missed their goal: the demonstrator is "
                "misconfigured")
    LOGGER.info("%d demonstrations collected, %d drawn again", n, failures)
    return DemoDataset(trajectories, config, config.seed)


class WindowSampler:
    """Draws windows ``s_t..s_{t+H}, a_t..a_{t+H-1}`` uniformly among all the
    windows of a set of trajectories.

    Args:
        trajectories (list): Source trajectories
        horizon (int): Number of actions ``H`` per window

    Raises:
        EmptyDatasetError: if no trajectory holds ``H`` actions.
    """
    def __init__(self, trajectories: List[Trajectory], horizon: int):
        if horizon < 1:
            raise ValueError(f"horizon {horizon} must be >= 1")
        self.horizon = horizon
        self._trajectories = [
            item for item in trajectories if len(item) >= horizon
        ]
        if not self._trajectories:
            raise EmptyDatasetError(
                f"no trajectory holds at least {horizon + 1} states")
        counts = np.array(
            [len(item) - horizon + 1 for item in self._trajectories])
        self._offsets = np.cumsum(counts)

    @property
    def num_windows(self) -> int:
        """Gets the number of distinct windows"""
        return int(self._offsets[-1])

    def window(self, index: int) -> Tuple[np.ndarray, np.ndarray]:
        """Gets a window by its index in ``[0, num_windows)``"""
        traj = int(np.searchsorted(self._offsets, index, side="right"))
        first = index - (self._offsets[traj - 1] if traj else 0)
        item = self._trajectories[traj]
        return (item.states[first:first + self.horizon + 1],
                item.actions[first:first + self.horizon])

    def sample(self, batch_size: int,
               rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
        """Draws a batch of windows.

        Return:
            tuple: states ``(batch_size, H + 1, 2)`` and actions
            ``(batch_size, H, 2)``.
        """
        indices = rng.integers(0, self.num_windows, size=batch_size)
        states, actions = zip(*(self.window(int(ix)) for ix in indices))
        return np.stack(states), np.stack(actions)


class TransitionSampler:
    """Draws transitions ``(s_t, a_t, s_T)`` uniformly, ``s_T`` being the
    last state of the source trajectory.

    Raises:
        EmptyDatasetError: if the trajectories hold no action.
    """
    def __init__(self, trajectories: List[Trajectory]):
        items = [item for item in trajectories if len(item)]
        if not items:
            raise EmptyDatasetError("no transition to sample")
        self.states = np.concatenate([item.states[:-1] for item in items])
        self.actions = np.concatenate([item.actions for item in items])
        self.goals = np.concatenate([
            np.broadcast_to(item.goal, (len(item), 2)) for item in items
        ])

    def __len__(self) -> int:
        return len(self.actions)

    def sample(
            self, batch_size: int, rng: np.random.Generator
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Draws a batch of ``(states, actions, goals)``"""
        indices = rng.integers(0, len(self), size=batch_size)
        return self.states[indices], self.actions[indices], self.goals[
            indices]
