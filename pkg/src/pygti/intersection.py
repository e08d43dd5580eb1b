# Copyright (c) 2020 pygti developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Trajectory intersections
------------------------
"""
from typing import List, Optional, Tuple
import numpy as np
import scipy.spatial
from .dataset import DemoDataset, Trajectory
from .geometry import Point2D


class StateIndex:
    """KD-tree spatial index of the states of a set of trajectories"""
    def __init__(self, trajectories: Optional[List[Trajectory]] = None,
                 traj_ids: Optional[List[int]] = None):
        """
        Initialize a new index

        Args:
            trajectories (list, optional): Trajectories to index
            traj_ids (list, optional): Identifier of each trajectory. Defaults
                to the position of the trajectory in the list.
        """
        self._tree = None  # type: Optional[scipy.spatial.cKDTree]
        self.traj_ids = np.empty((0, ), dtype=np.int64)
        self.steps = np.empty((0, ), dtype=np.int64)
        if trajectories:
            self.packing(trajectories, traj_ids)

    def packing(self,
                trajectories: List[Trajectory],
                traj_ids: Optional[List[int]] = None) -> None:
        """Builds the index (the old data is erased before construction).

        Args:
            trajectories (list): Trajectories to index
            traj_ids (list, optional): Identifier of each trajectory
        """
        if traj_ids is None:
            traj_ids = list(range(len(trajectories)))
        if len(traj_ids) != len(trajectories):
            raise ValueError(f"{len(traj_ids)} identifiers given for "
                             f"{len(trajectories)} trajectories")
        if not trajectories:
            self.clear()
            return
        states = np.concatenate([item.states for item in trajectories])
        self.traj_ids = np.concatenate([
            np.full(len(item.states), ix, dtype=np.int64)
            for ix, item in zip(traj_ids, trajectories)
        ])
        self.steps = np.concatenate([
            np.arange(len(item.states), dtype=np.int64)
            for item in trajectories
        ])
        self._tree = scipy.spatial.cKDTree(states.astype(np.float64))

    def clear(self) -> None:
        """Removes all the states stored in the index"""
        self._tree = None
        self.traj_ids = np.empty((0, ), dtype=np.int64)
        self.steps = np.empty((0, ), dtype=np.int64)

    def __len__(self):
        return len(self.steps)

    def __bool__(self):
        return self._tree is not None

    def pairs(self, epsilon: float) -> np.ndarray:
        """Searches the pairs of states of distinct trajectories lying within
        ``epsilon`` of each other.

        Return:
            numpy.ndarray: the indices ``(n, 2)`` of the states paired.
        """
        if self._tree is None:
            return np.empty((0, 2), dtype=np.int64)
        pairs = self._tree.query_pairs(epsilon, output_type="ndarray")
        pairs = pairs.reshape(-1, 2).astype(np.int64)
        return pairs[self.traj_ids[pairs[:, 0]] != self.traj_ids[pairs[:,
                                                                       1]]]

    def cross_pairs(self, other: "StateIndex", epsilon: float) -> np.ndarray:
        """Searches the pairs made of a state of this index and a state of
        ``other`` lying within ``epsilon`` of each other.

        Return:
            numpy.ndarray: the indices ``(n, 2)`` of the states paired, in
            this index and in ``other``.
        """
        if self._tree is None or other._tree is None:
            return np.empty((0, 2), dtype=np.int64)
        neighbors = self._tree.query_ball_tree(other._tree, epsilon)
        rows = [
            np.stack([np.full(len(item), ix), np.asarray(item)], axis=1)
            for ix, item in enumerate(neighbors) if item
        ]
        if not rows:
            return np.empty((0, 2), dtype=np.int64)
        return np.concatenate(rows).astype(np.int64)

    def lookup(self, indices: np.ndarray) -> np.ndarray:
        """Gets the ``(traj_id, t)`` pairs of indexed states"""
        return np.stack([self.traj_ids[indices], self.steps[indices]],
                        axis=-1)


def detect_intersections(dataset: DemoDataset,
                         epsilon: float,
                         distinct_pairings: bool = False) -> np.ndarray:
    """Searches the states shared by two trajectories of a dataset.

    Args:
        dataset (pygti.dataset.DemoDataset): Trajectories analysed
        epsilon (float): Largest Euclidean distance between two states
            considered as identical
        distinct_pairings (bool, optional): Only report the intersections of
            trajectories starting in different regions. Defaults to
            ``False``.

    Return:
        numpy.ndarray: a matrix ``(n, 4)`` whose rows ``(traj_i, t_i, traj_j,
        t_j)`` satisfy ``traj_i < traj_j``, in lexicographic order.
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon {epsilon!r} must be > 0")
    trajectories = dataset.trajectories
    if distinct_pairings:
        groups = []
        for region in sorted({item.start_region for item in trajectories},
                             key=lambda item: item.value):
            ids = [
                ix for ix, item in enumerate(trajectories)
                if item.start_region is region
            ]
            groups.append(
                StateIndex([trajectories[ix] for ix in ids], ids))
        if len(groups) < 2:
            return np.empty((0, 4), dtype=np.int64)
        first, second = groups
        pairs = first.cross_pairs(second, epsilon)
        result = np.concatenate(
            [first.lookup(pairs[:, 0]),
             second.lookup(pairs[:, 1])], axis=1)
    else:
        index = StateIndex(trajectories)
        pairs = index.pairs(epsilon)
        result = np.concatenate(
            [index.lookup(pairs[:, 0]),
             index.lookup(pairs[:, 1])], axis=1)
    result = result.reshape(-1, 4)
    swap = result[:, 0] > result[:, 2]
    result[swap] = result[swap][:, [2, 3, 0, 1]]
    order = np.lexsort(result.T[::-1])
    return result[order]


def intersection_states(dataset: DemoDataset,
                        pairs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Gets the two states of every intersection"""
    first = np.array([dataset.trajectories[i].states[t]
                      for i, t in pairs[:, :2]]).reshape(-1, 2)
    second = np.array([dataset.trajectories[j].states[t]
                       for j, t in pairs[:, 2:]]).reshape(-1, 2)
    return first, second


def fraction_near(dataset: DemoDataset,
                  pairs: np.ndarray,
                  center: Point2D,
                  radius: float = 0.2) -> float:
    """Gets the share of intersection states lying within ``radius`` of
    ``center``. An empty set of intersections gives ``nan``."""
    if len(pairs) == 0:
        return float("nan")
    states = np.concatenate(intersection_states(dataset, pairs))
    distance = np.linalg.norm(
        states.astype(np.float64) - np.asarray(center, dtype=np.float64),
        axis=1)
    return float(np.mean(distance <= radius))
