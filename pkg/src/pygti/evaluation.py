# Copyright (c) 2020 pygti developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Evaluation protocol
===================

Policies are rolled out from a grid of start locations, evenly spaced along
the horizontal midline of both start regions. Four metrics are reported
per start location and aggregated over the grid:

* the goal reach rate: share of rollouts ending in LL or LR;
* the seen and unseen behaviors: shares of the goal-reaching rollouts that
  end on the opposite side of the y-axis (the pairings demonstrated) or on
  the same side;
* the occupancy: 100% if the rollouts reach both goal regions, 50% if one,
  0% otherwise.
"""
from typing import Any, Dict, List, Optional, Tuple, Union
import concurrent.futures
import dataclasses
import enum
import logging
import os
import numpy as np
from . import env
from . import goal_proposal
from . import policies
from . import rollout
from . import seeding
from .dataset import Trajectory
from .geometry import GoalRegion, StartRegion

LOGGER = logging.getLogger(__name__)


class Pairing(enum.Enum):
    """Relation between the start and the end of a rollout"""
    #: Start and end on opposite sides of the y-axis
    SEEN = "seen"
    #: Start and end on the same side of the y-axis
    UNSEEN = "unseen"
    #: The rollout did not reach a goal region
    NONE = "none"


class ModelKind(enum.Enum):
    """Models evaluated"""
    BC = "bc"
    GCBC = "gcbc"
    GTI_STAGE1 = "gti-stage1"
    GTI_STAGE2 = "gti-stage2"


def evaluation_stream(seed: int,
                      kind: Union[ModelKind, str]) -> np.random.Generator:
    """Gets the random stream evaluating a kind of model under a root seed.
    The key of a kind is its rank in :py:class:`ModelKind`."""
    return seeding.stream(seed, seeding.Stream.EVALUATION,
                          list(ModelKind).index(ModelKind(kind)))


@dataclasses.dataclass(frozen=True)
class RolloutLabel:
    """Outcome of a rollout"""
    reached: bool
    pairing: Pairing
    goal_region: Optional[GoalRegion] = None


@dataclasses.dataclass(frozen=True)
class EvalConfig:
    """Evaluation protocol"""
    #: Number of start locations in each start region
    starts_per_region: int = 5
    #: Number of rollouts per start location
    rollouts_per_start: int = 100
    #: Number of threads used. If 0 all CPUs are used, if 1 the rollouts are
    #: run sequentially.
    num_threads: int = 0
    #: Number of rollouts kept per start location for the trajectory plot
    plot_rollouts_per_start: int = 10

    def __post_init__(self):
        if self.plot_rollouts_per_start < 0:
            raise ValueError("plot_rollouts_per_start "
                             f"{self.plot_rollouts_per_start} must be >= 0")
        if self.starts_per_region < 1:
            raise ValueError(
                f"starts_per_region {self.starts_per_region} must be >= 1")
        if self.rollouts_per_start < 1:
            raise ValueError(
                f"rollouts_per_start {self.rollouts_per_start} must be >= 1")
        if self.num_threads < 0:
            raise ValueError(
                f"num_threads {self.num_threads} must be >= 0")


def classify_rollout(traj: Trajectory, config: env.EnvConfig) -> RolloutLabel:
    """Labels a rollout.

    Args:
        traj (pygti.dataset.Trajectory): Rollout
        config (pygti.env.EnvConfig): Environment configuration

    Return:
        RolloutLabel: whether the rollout reached a goal region, and with
        which pairing.

    Raises:
        ValueError: if the rollout starts on the y-axis.
    """
    if len(traj.states) == 0:
        raise ValueError("empty trajectory")
    start, end = traj.states[0], traj.states[-1]
    if start[0] == 0:
        raise ValueError(f"start state {tuple(start)} lies on the y-axis")
    region = env.goal_region_of(config, end)
    if region is None:
        return RolloutLabel(False, Pairing.NONE)
    seen = np.sign(start[0]) != np.sign(end[0])
    return RolloutLabel(True, Pairing.SEEN if seen else Pairing.UNSEEN,
                        region)


def seen_region(start_region: StartRegion) -> GoalRegion:
    """Gets the goal region demonstrated from a start region"""
    return GoalRegion.LR if StartRegion(
        start_region) is StartRegion.UL else GoalRegion.LL


@dataclasses.dataclass
class LocationMetrics:
    """Counts observed from a start location"""
    #: Start region holding the location
    start_region: StartRegion
    #: Abscissa of the start location
    x: float
    #: Ordinate of the start location
    y: float
    #: Number of rollouts
    n_rollouts: int = 0
    #: Number of rollouts reaching a goal region
    n_reached: int = 0
    #: Number of goal-reaching rollouts with a seen pairing
    n_seen: int = 0
    #: Number of goal-reaching rollouts with an unseen pairing
    n_unseen: int = 0
    #: Number of rollouts reaching LL
    n_ll: int = 0
    #: Number of rollouts reaching LR
    n_lr: int = 0
    #: Number of rollouts conditioned on the goal region of the seen pairing
    n_seen_cond: int = 0
    #: Number of these rollouts reaching the region they were conditioned on
    n_seen_cond_reached: int = 0
    #: Number of rollouts conditioned on the goal region of the unseen
    #: pairing
    n_unseen_cond: int = 0
    #: Number of these rollouts reaching the region they were conditioned on
    n_unseen_cond_reached: int = 0

    #: Names of the counters
    COUNTS = ("n_rollouts", "n_reached", "n_seen", "n_unseen", "n_ll", "n_lr",
              "n_seen_cond", "n_seen_cond_reached", "n_unseen_cond",
              "n_unseen_cond_reached")

    def __post_init__(self):
        self.start_region = StartRegion(self.start_region)

    @property
    def goal_reach_rate(self) -> float:
        """Gets the share of rollouts reaching a goal region"""
        return _ratio(self.n_reached, self.n_rollouts)

    @property
    def seen_pct(self) -> float:
        """Gets the share of goal-reaching rollouts with a seen pairing"""
        return _ratio(self.n_seen, self.n_reached)

    @property
    def unseen_pct(self) -> float:
        """Gets the share of goal-reaching rollouts with an unseen pairing"""
        return _ratio(self.n_unseen, self.n_reached)

    @property
    def occupancy(self) -> float:
        """Gets the share of the goal regions reached: 0, 0.5 or 1"""
        return 0.5 * ((self.n_ll > 0) + (self.n_lr > 0))

    @property
    def seen_pairing_reach(self) -> float:
        """Gets the reach rate of the rollouts conditioned on the seen
        pairing, ``nan`` if there are none"""
        return _ratio(self.n_seen_cond_reached, self.n_seen_cond, np.nan)

    @property
    def unseen_pairing_reach(self) -> float:
        """Gets the reach rate of the rollouts conditioned on the unseen
        pairing, ``nan`` if there are none"""
        return _ratio(self.n_unseen_cond_reached, self.n_unseen_cond,
                      np.nan)

    def add(self,
            label: RolloutLabel,
            conditioned_on: Optional[GoalRegion] = None) -> None:
        """Counts a rollout.

        Args:
            label (RolloutLabel): Outcome of the rollout
            conditioned_on (GoalRegion, optional): Goal region the rollout
                was conditioned on
        """
        self.n_rollouts += 1
        if label.reached:
            self.n_reached += 1
            if label.pairing is Pairing.SEEN:
                self.n_seen += 1
            else:
                self.n_unseen += 1
            if label.goal_region is GoalRegion.LL:
                self.n_ll += 1
            else:
                self.n_lr += 1
        if conditioned_on is not None:
            hit = label.goal_region is conditioned_on
            if conditioned_on is seen_region(self.start_region):
                self.n_seen_cond += 1
                self.n_seen_cond_reached += hit
            else:
                self.n_unseen_cond += 1
                self.n_unseen_cond_reached += hit


def _ratio(numerator: float, denominator: float,
           default: float = 0.0) -> float:
    return numerator / denominator if denominator else default


@dataclasses.dataclass
class MetricsReport:
    """Metrics of a model over the grid of start locations"""
    #: Identifier of the model evaluated
    model: str
    #: Metrics of every start location
    locations: List[LocationMetrics]
    #: Rollouts kept for the trajectory plot
    rollouts: List[Trajectory] = dataclasses.field(default_factory=list,
                                                   compare=False,
                                                   repr=False)

    @property
    def n_rollouts(self) -> int:
        """Gets the total number of rollouts"""
        return sum(item.n_rollouts for item in self.locations)

    def totals(self) -> Dict[str, int]:
        """Gets the sum of every counter over the start locations"""
        return {
            name: sum(getattr(item, name) for item in self.locations)
            for name in LocationMetrics.COUNTS
        }

    def aggregate(self) -> Dict[str, float]:
        """Aggregates the metrics over the start locations.

        The reach rate and the pairing shares are pooled over the rollouts,
        the occupancy is the mean of the occupancies of the start locations.
        """
        totals = self.totals()
        occupancy = float(np.mean([item.occupancy for item in self.locations
                                   ])) if self.locations else 0.0
        return dict(
            goal_reach_rate=_ratio(totals["n_reached"], totals["n_rollouts"]),
            seen_pct=_ratio(totals["n_seen"], totals["n_reached"]),
            unseen_pct=_ratio(totals["n_unseen"], totals["n_reached"]),
            occupancy=occupancy,
            seen_pairing_reach=_ratio(totals["n_seen_cond_reached"],
                                      totals["n_seen_cond"], np.nan),
            unseen_pairing_reach=_ratio(totals["n_unseen_cond_reached"],
                                        totals["n_unseen_cond"], np.nan))

    def summary(self) -> str:
        """Gets a one line description of the aggregated metrics"""
        values = self.aggregate()
        return (f"{self.model}: reach {values['goal_reach_rate']:.1%}, "
                f"seen {values['seen_pct']:.1%}, "
                f"unseen {values['unseen_pct']:.1%}, "
                f"occupancy {values['occupancy']:.1%}")


def start_locations(config: env.EnvConfig,
                    starts_per_region: int) -> List[Dict[str, Any]]:
    """Gets the grid of start locations: ``starts_per_region`` points evenly
    spaced along the horizontal midline of each start region, UL first"""
    result = []
    for region in StartRegion:
        for point in config.start_box(region).midline(starts_per_region):
            result.append(dict(start_region=region, point=point))
    return result


def _evaluate_location(model: Any, kind: ModelKind, config: env.EnvConfig,
                       location: Dict[str, Any], count: int,
                       rng: np.random.Generator,
                       keep: int = 0
                       ) -> Tuple[LocationMetrics, List[Trajectory]]:
    region = location["start_region"]
    point = location["point"]
    starts = np.repeat(point[np.newaxis, :], count, axis=0)
    conditioned = None
    if kind is ModelKind.GTI_STAGE1:
        controller = rollout.Stage1Controller(
            model.cvae, model.controller,
            rng)  # type: rollout.Controller
    elif kind is ModelKind.BC:
        controller = model if callable(model) else \
            rollout.policy_controller(model)
    else:
        half = count // 2
        conditioned = [GoalRegion.LL] * half + [GoalRegion.LR] * (count -
                                                                  half)
        goals = np.stack([
            np.asarray(config.goal_box(item).center(), dtype=np.float32)
            for item in conditioned
        ])
        controller = rollout.policy_controller(model, goals)
    batch = rollout.run_rollouts(config, starts, controller)
    result = LocationMetrics(region, float(point[0]), float(point[1]))
    kept = []
    for ix in range(count):
        traj = batch.trajectory(ix, region, config)
        result.add(classify_rollout(traj, config),
                   None if conditioned is None else conditioned[ix])
        if ix < keep:
            kept.append(traj)
    return result, kept


def model_kind(model: Any, stage2: bool = False) -> ModelKind:
    """Gets the evaluation kind of a model: a policy or a Stage-1 bundle
    (an object holding a ``cvae`` and a ``controller``), or a
    controller acting on the states alone, evaluated as a BC policy"""
    if isinstance(model, policies.PolicyModel):
        if model.kind is policies.PolicyKind.BC:
            return ModelKind.BC
        if model.kind is policies.PolicyKind.GCBC:
            return ModelKind.GTI_STAGE2 if stage2 else ModelKind.GCBC
        raise TypeError("a Stage-1 controller is evaluated with its goal "
                        "proposal model")
    if isinstance(getattr(model, "cvae", None), goal_proposal.CvaeModel):
        return ModelKind.GTI_STAGE1
    if callable(model):
        return ModelKind.BC
    raise TypeError(f"{type(model).__name__} is not an evaluable model")


def evaluate_policy(model: Any,
                    config: env.EnvConfig,
                    protocol: EvalConfig,
                    rng: np.random.Generator,
                    model_id: Optional[str] = None,
                    kind: Optional[Union[ModelKind, str]] = None
                    ) -> MetricsReport:
    """Evaluates a model over the grid of start locations.

    BC policies act on the state alone; GCBC and Stage-2 policies are
    conditioned on the centre of LL for the first half of the rollouts of a
    start location and on the centre of LR for the other half; Stage-1
    bundles draw their goals from the prior every ``H`` steps.

    Args:
        model: A :py:class:`pygti.policies.PolicyModel`, a Stage-1 bundle
            or a :py:data:`pygti.rollout.Controller`
        config (pygti.env.EnvConfig): Environment configuration
        protocol (EvalConfig): Evaluation protocol
        rng (numpy.random.Generator): Random generator. Every start location
            derives its own stream from it, so the result does not depend on
            the number of threads.
        model_id (str, optional): Identifier of the model in the report.
            Defaults to the evaluation kind.
        kind (ModelKind, optional): Evaluation kind. Defaults to the kind
            deduced from the model.

    Return:
        MetricsReport: the metrics of every start location.
    """
    kind = model_kind(model) if kind is None else ModelKind(kind)
    locations = start_locations(config, protocol.starts_per_region)
    seeds = np.random.SeedSequence(int(rng.integers(2**63))).spawn(
        len(locations))
    generators = [np.random.default_rng(item) for item in seeds]

    num_threads = protocol.num_threads or os.cpu_count() or 1
    if num_threads == 1:
        results = [
            _evaluate_location(model, kind, config, location,
                               protocol.rollouts_per_start, generator,
                               protocol.plot_rollouts_per_start)
            for location, generator in zip(locations, generators)
        ]
    else:
        with concurrent.futures.ThreadPoolExecutor(
                max_workers=num_threads) as executor:
            futures = [
                executor.submit(_evaluate_location, model, kind, config,
                                location, protocol.rollouts_per_start,
                                generator, protocol.plot_rollouts_per_start)
                for location, generator in zip(locations, generators)
            ]
            results = [future.result() for future in futures]
    report = MetricsReport(model_id or kind.value,
                           [item[0] for item in results],
                           [traj for item in results for traj in item[1]])
    LOGGER.info("%s", report.summary())
    return report
