# Copyright (c) 2020 pygti developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Training pipeline
=================

Stage 1 trains the goal proposal model and the goal-conditioned controller
on windows of the demonstrations. The undirected Stage-1 policy then
collects rollouts annotated with their final state, on which the Stage-2
goal-conditioned policy is trained. :py:func:`run_experiment` chains the
stages with the baselines and the evaluation into a run directory.
"""
from typing import Any, Dict, Iterator, List, Optional, Tuple, Union
import concurrent.futures
import contextlib
import dataclasses
import enum
import logging
import os
import pathlib
import time
import typing
import numpy as np
from . import config as config_file
from . import env
from . import evaluation
from . import goal_proposal
from . import policies
from . import report
from . import rollout
from . import seeding
from .checkpoint import save_checkpoint
from .core import AdamState
from .dataset import (FORMAT_VERSION, DemoDataset, TransitionSampler,
                      Trajectory, WindowSampler, check_format_version,
                      collect_demos, manifest_path, read_manifest,
                      read_trajectories, trajectory_labels, write_manifest,
                      write_trajectories)
from .env import EnvConfig
from .errors import RolloutBudgetError, TrainingDivergedError
from .evaluation import EvalConfig
from .geometry import StartRegion
from .goal_proposal import CvaeConfig
from .interface import Stage1Bundle
from .policies import PolicyConfig

LOGGER = logging.getLogger(__name__)

Path = Union[str, pathlib.Path]

#: Names of the stages of an experiment, in execution order
STAGES = ("demos", "stage1", "rollouts", "stage2", "bc", "gcbc",
          "evaluation", "report")


class Schedule(enum.Enum):
    """Order of the Stage-1 updates"""
    #: Both models updated at every iteration on the same windows
    JOINT = "joint"
    #: Goal proposal model first, then the controller
    TWO_PHASE = "two_phase"


@dataclasses.dataclass(frozen=True)
class PipelineConfig:
    """Sizes and budgets of the training stages"""
    #: Number of demonstrations collected
    n_demos: int = 1000
    #: Number of Stage-1 iterations
    n_iter_stage1: int = 20000
    #: Order of the Stage-1 updates: ``joint`` or ``two_phase``
    schedule: str = Schedule.JOINT.value
    #: Minimum number of Stage-2 rollouts attempted
    n_rollouts: int = 1000
    #: Length of the Stage-2 rollouts
    rollout_horizon: int = 300
    #: Keep only the rollouts ending inside a goal region
    success_filter: bool = True
    #: Number of successful rollouts required per start region when the
    #: success filter is on
    min_successes_per_start: int = 50
    #: Attempts allowed per start region, as a multiple of
    #: ``min_successes_per_start``
    max_attempt_factor: int = 20
    #: Number of rollouts run in lockstep by a worker
    rollout_chunk: int = 100
    #: Number of Stage-2 iterations
    n_iter_stage2: int = 20000
    #: Number of iterations of the BC and GCBC baselines
    n_iter_baseline: int = 20000
    #: Number of iterations between two logged losses
    log_every: int = 1000
    #: Number of threads collecting rollouts. If 0 all CPUs are used, if 1
    #: the rollouts are collected sequentially.
    num_threads: int = 0

    def __post_init__(self):
        Schedule(self.schedule)
        for name in ("n_demos", "n_rollouts", "rollout_horizon",
                     "max_attempt_factor", "rollout_chunk", "log_every"):
            if getattr(self, name) < 1:
                raise ValueError(
                    f"{name} {getattr(self, name)} must be >= 1")
        for name in ("n_iter_stage1", "n_iter_stage2", "n_iter_baseline",
                     "min_successes_per_start", "num_threads"):
            if getattr(self, name) < 0:
                raise ValueError(
                    f"{name} {getattr(self, name)} must be >= 0")

    def segments(self, horizon: int) -> int:
        """Gets the number of goals drawn per Stage-2 rollout"""
        return self.rollout_horizon // horizon


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    """Configuration of every stage of an experiment. The root seed is the
    seed of the environment configuration."""
    env: EnvConfig = dataclasses.field(default_factory=EnvConfig)
    cvae: CvaeConfig = dataclasses.field(default_factory=CvaeConfig)
    policy: PolicyConfig = dataclasses.field(default_factory=PolicyConfig)
    pipeline: PipelineConfig = dataclasses.field(
        default_factory=PipelineConfig)
    eval: EvalConfig = dataclasses.field(default_factory=EvalConfig)

    def __post_init__(self):
        if self.pipeline.rollout_horizon < self.cvae.horizon:
            raise ValueError(
                f"rollout_horizon {self.pipeline.rollout_horizon} must be "
                f">= the goal horizon {self.cvae.horizon}")

    @property
    def seed(self) -> int:
        """Gets the root seed"""
        return self.env.seed

    @staticmethod
    def schema() -> Dict[str, type]:
        """Gets the dataclass of every section of the configuration files"""
        return typing.get_type_hints(ExperimentConfig)

    def sections(self) -> Dict[str, Any]:
        """Gets the configuration of every section"""
        return {
            item.name: getattr(self, item.name)
            for item in dataclasses.fields(self)
        }

    def with_seed(self, seed: int) -> "ExperimentConfig":
        """Gets a copy using another root seed"""
        return dataclasses.replace(self,
                                   env=dataclasses.replace(self.env,
                                                           seed=seed))

    @classmethod
    def from_pairs(cls,
                   pairs: Dict[str, str],
                   require_all: bool = True) -> "ExperimentConfig":
        """Builds a configuration from ``section.field`` pairs.

        Raises:
            ConfigError: if a key is unknown or missing, or a value is
                invalid.
        """
        sections = config_file.build(cls.schema(), pairs, require_all)
        try:
            return cls(**sections)
        except ValueError as error:
            raise config_file.ConfigError(str(error)) from error

    @classmethod
    def load(cls, path: Path, require_all: bool = True) -> "ExperimentConfig":
        """Reads a configuration file"""
        return cls.from_pairs(config_file.read_pairs(path), require_all)

    def save(self, path: Path) -> None:
        """Writes a complete configuration file"""
        config_file.write(path, self.sections())


@dataclasses.dataclass
class RolloutDataset:
    """Stage-2 dataset: rollouts of the Stage-1 policy, the goal of every
    rollout being its last state"""
    #: Rollouts kept
    trajectories: List[Trajectory]
    #: Environment configuration
    env_config: env.EnvConfig
    #: True for the rollouts ending inside a goal region
    success: List[bool]
    #: Checksum of the Stage-1 bundle that produced the rollouts
    source: str = ""
    #: Root seed of the collection
    seed: int = 0
    #: Number of goals drawn per rollout
    segments: int = 0
    #: Number of rollouts attempted
    n_attempts: int = 0
    #: Version of the file format
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        self.success = [bool(item) for item in self.success]
        if len(self.success) != len(self.trajectories):
            raise ValueError(f"{len(self.success)} success flags do not "
                             f"match {len(self.trajectories)} trajectories")

    def __len__(self) -> int:
        return len(self.trajectories)

    @property
    def goals(self) -> np.ndarray:
        """Gets the goal of every rollout"""
        return np.array([item.goal for item in self.trajectories],
                        dtype=np.float32).reshape(-1, 2)

    def manifest(self) -> Dict[str, Any]:
        """Gets the description written next to the CSV file"""
        return {
            "format_version": self.format_version,
            "seed": self.seed,
            "env_config": dataclasses.asdict(self.env_config),
            "trajectories": trajectory_labels(self.trajectories),
            "success": self.success,
            "source": self.source,
            "segments": self.segments,
            "n_attempts": self.n_attempts,
        }

    def save(self, path: Path) -> None:
        """Writes the dataset to ``path`` and its manifest"""
        write_trajectories(path, self.trajectories)
        write_manifest(manifest_path(path), self.manifest())

    @classmethod
    def load(cls, path: Path) -> "RolloutDataset":
        """Reads a dataset written by :py:meth:`save`"""
        manifest = read_manifest(manifest_path(path))
        check_format_version(manifest, path)
        labels = manifest["trajectories"]
        trajectories = read_trajectories(path, labels) if labels else []
        return cls(trajectories, env.EnvConfig(**manifest["env_config"]),
                   manifest["success"], manifest["source"], manifest["seed"],
                   manifest["segments"], manifest["n_attempts"],
                   manifest["format_version"])


def _log_loss(name: str, iteration: int, n_iter: int, loss: float,
              log_every: int) -> None:
    if (iteration + 1) % log_every == 0 or iteration + 1 == n_iter:
        LOGGER.debug("%s iteration %d/%d: loss %.6g", name, iteration + 1,
                     n_iter, loss)


def train_stage1(dataset: DemoDataset, config: ExperimentConfig,
                 rng: np.random.Generator) -> Stage1Bundle:
    """Trains the goal proposal model and the Stage-1 controller.

    Every iteration draws a batch of windows ``s_t..s_{t+H}``: the goal
    proposal model learns ``s_{t+H}`` from ``s_t`` and the controller
    imitates the actions of the same windows towards their goal.

    Args:
        dataset (pygti.dataset.DemoDataset): Demonstrations
        config (ExperimentConfig): Experiment configuration
        rng (numpy.random.Generator): Random generator of the
            initialization and the batches

    Return:
        pygti.interface.Stage1Bundle: the trained models, and their losses.

    Raises:
        EmptyDatasetError: if no demonstration holds ``H`` actions.
        TrainingDivergedError: if a loss becomes non-finite. The exception
            carries the models as they were before the failing update.
    """
    pipeline = config.pipeline
    cvae = goal_proposal.CvaeModel.create(config.cvae, rng)
    controller = policies.PolicyModel.create(policies.PolicyKind.STAGE1,
                                             config.policy,
                                             dataset.env_config.a_max,
                                             rng,
                                             latent_dim=cvae.latent_dim,
                                             horizon=cvae.horizon)
    bundle = Stage1Bundle(cvae, controller, dict(cvae=[], controller=[]))
    n_iter = pipeline.n_iter_stage1
    if n_iter == 0:
        return bundle

    sampler = WindowSampler(dataset.trajectories, cvae.horizon)
    horizon = cvae.horizon
    cvae_opt = AdamState.create(cvae.params, config.cvae.learning_rate)
    controller_opt = AdamState.create(controller.params,
                                      config.policy.learning_rate)
    LOGGER.info("Stage 1: %d iterations over %d windows (%s schedule)",
                n_iter, sampler.num_windows, pipeline.schedule)

    def update_cvae(iteration: int, states: np.ndarray) -> None:
        loss = goal_proposal.cvae_train_step(
            cvae, states[:, 0], states[:, horizon], cvae_opt, rng,
            config.cvae.kl_weight(iteration, n_iter))
        bundle.losses["cvae"].append(loss)
        _log_loss("cvae", iteration, n_iter, loss, pipeline.log_every)

    def update_controller(iteration: int, states: np.ndarray,
                          actions: np.ndarray) -> None:
        loss = policies.stage1_train_step(controller, cvae, states, actions,
                                          controller_opt, rng)
        bundle.losses["controller"].append(loss)
        _log_loss("controller", iteration, n_iter, loss, pipeline.log_every)

    iteration = 0
    try:
        if Schedule(pipeline.schedule) is Schedule.JOINT:
            for iteration in range(n_iter):
                states, actions = sampler.sample(config.cvae.batch_size, rng)
                update_cvae(iteration, states)
                update_controller(iteration, states, actions)
        else:
            for iteration in range(n_iter):
                states, _ = sampler.sample(config.cvae.batch_size, rng)
                update_cvae(iteration, states)
            for iteration in range(n_iter):
                states, actions = sampler.sample(config.policy.batch_size,
                                                 rng)
                update_controller(iteration, states, actions)
    except TrainingDivergedError as error:
        LOGGER.warning("Stage 1 diverged at iteration %d", iteration)
        raise TrainingDivergedError(iteration, error.components,
                                    bundle) from error
    return bundle


def _rollout_chunk(bundle: Stage1Bundle, config: env.EnvConfig, first: int,
                   count: int, max_steps: int,
                   seed: np.random.SeedSequence) -> List[Trajectory]:
    rng = np.random.default_rng(seed)
    regions = [
        StartRegion.UL if (first + ix) % 2 == 0 else StartRegion.UR
        for ix in range(count)
    ]
    starts = np.stack([env.reset(config, item, rng) for item in regions])
    controller = rollout.Stage1Controller(bundle.cvae, bundle.controller, rng)
    batch = rollout.run_rollouts(config, starts, controller, max_steps)
    return batch.trajectories(regions, config)


class _Collection:
    """Running counts of a Stage-2 collection, merged chunk by chunk"""
    def __init__(self, config: PipelineConfig, keep_failures: bool):
        self.config = config
        self.keep_failures = keep_failures
        self.trajectories = []  # type: List[Trajectory]
        self.success = []  # type: List[bool]
        self.attempts = {item: 0 for item in StartRegion}
        self.successes = {item: 0 for item in StartRegion}

    @property
    def n_attempts(self) -> int:
        return sum(self.attempts.values())

    def reach_rate(self) -> Dict[str, float]:
        return {
            item.value: self.successes[item] / self.attempts[item]
            if self.attempts[item] else 0.0
            for item in StartRegion
        }

    def merge(self, trajectories: List[Trajectory]) -> None:
        for item in trajectories:
            reached = item.end_label is not None
            self.attempts[item.start_region] += 1
            self.successes[item.start_region] += reached
            if reached or self.keep_failures:
                self.trajectories.append(item)
                self.success.append(reached)

    def done(self) -> bool:
        if self.n_attempts < self.config.n_rollouts:
            return False
        if not self.config.success_filter:
            return True
        return all(value >= self.config.min_successes_per_start
                   for value in self.successes.values())

    def check_budget(self) -> None:
        if not self.config.success_filter:
            return
        budget = self.config.max_attempt_factor * \
            self.config.min_successes_per_start
        for item in StartRegion:
            if self.attempts[item] >= max(budget, 1) and \
                    self.successes[item] < \
                    self.config.min_successes_per_start:
                raise RolloutBudgetError(
                    f"{self.successes[item]} successful rollouts from "
                    f"{item.value} after {self.attempts[item]} attempts, "
                    f"{self.config.min_successes_per_start} required",
                    self.reach_rate())


def collect_stage2_rollouts(bundle: Stage1Bundle,
                            config: env.EnvConfig,
                            pipeline: PipelineConfig,
                            rng: np.random.Generator,
                            seed: int = 0) -> RolloutDataset:
    """Collects the Stage-2 dataset with the undirected Stage-1 policy.

    A rollout starts in UL or UR, alternately, draws a goal from the prior
    every ``H`` steps for ``rollout_horizon // H`` segments and stops early
    when it enters a goal region. Rollouts are run by chunks, each chunk
    drawing from its own stream; the chunks are merged by index, so the
    result does not depend on the number of threads.

    Args:
        bundle (pygti.interface.Stage1Bundle): Trained Stage-1 models
        config (pygti.env.EnvConfig): Environment configuration
        pipeline (PipelineConfig): Collection budget
        rng (numpy.random.Generator): Random generator
        seed (int, optional): Root seed recorded in the dataset

    Return:
        RolloutDataset: the rollouts kept.

    Raises:
        RolloutBudgetError: if the success filter is on and a start region
            exhausts its attempts before collecting
            ``min_successes_per_start`` successful rollouts.
    """
    segments = pipeline.segments(bundle.cvae.horizon)
    if segments < 1:
        raise ValueError(
            f"rollout_horizon {pipeline.rollout_horizon} must be >= the goal "
            f"horizon {bundle.cvae.horizon}")
    max_steps = segments * bundle.cvae.horizon
    root = np.random.SeedSequence(int(rng.integers(2**63)))
    collection = _Collection(pipeline, not pipeline.success_filter)
    num_threads = pipeline.num_threads or os.cpu_count() or 1
    chunk = pipeline.rollout_chunk

    def chunk_size(index: int) -> int:
        if pipeline.success_filter:
            return chunk
        return min(chunk, pipeline.n_rollouts - index * chunk)

    index = 0
    with concurrent.futures.ThreadPoolExecutor(
            max_workers=num_threads) as executor:
        while not collection.done():
            wave = []
            for _ in range(num_threads):
                if not pipeline.success_filter and chunk_size(index) <= 0:
                    break
                wave.append((index, root.spawn(1)[0]))
                index += 1
            if num_threads == 1:
                results = [
                    _rollout_chunk(bundle, config, ix * chunk,
                                   chunk_size(ix), max_steps, item)
                    for ix, item in wave
                ]
            else:
                futures = [
                    executor.submit(_rollout_chunk, bundle, config,
                                    ix * chunk, chunk_size(ix), max_steps,
                                    item) for ix, item in wave
                ]
                results = [future.result() for future in futures]
            for trajectories in results:
                if collection.done():
                    break
                collection.merge(trajectories)
                collection.check_budget()
            LOGGER.debug("%d rollouts attempted, successes %s",
                         collection.n_attempts,
                         {key.value: value
                          for key, value in collection.successes.items()})
    LOGGER.info(
        "%d rollouts attempted, %d kept, reach rate %s",
        collection.n_attempts, len(collection.trajectories), ", ".join(
            f"{key}: {value:.1%}"
            for key, value in collection.reach_rate().items()))
    return RolloutDataset(collection.trajectories, config, collection.success,
                          bundle.checksum(), seed, segments,
                          collection.n_attempts)


def _train_policy(kind: policies.PolicyKind, trajectories: List[Trajectory],
                  config: ExperimentConfig, a_max: float, n_iter: int,
                  rng: np.random.Generator, name: str) -> policies.PolicyModel:
    sampler = TransitionSampler(trajectories)
    model = policies.PolicyModel.create(kind, config.policy, a_max, rng)
    opt = AdamState.create(model.params, config.policy.learning_rate)
    LOGGER.info("%s: %d iterations over %d transitions", name, n_iter,
                len(sampler))
    for iteration in range(n_iter):
        states, actions, goals = sampler.sample(config.policy.batch_size, rng)
        try:
            if kind is policies.PolicyKind.BC:
                loss = policies.bc_train_step(model, states, actions, opt)
            else:
                loss = policies.gcbc_train_step(model, states, actions, goals,
                                                opt)
        except TrainingDivergedError as error:
            LOGGER.warning("%s diverged at iteration %d", name, iteration)
            raise TrainingDivergedError(iteration, error.components,
                                        model) from error
        _log_loss(name, iteration, n_iter, loss, config.pipeline.log_every)
    return model


def train_stage2(rollouts: RolloutDataset, config: ExperimentConfig,
                 rng: np.random.Generator) -> policies.PolicyModel:
    """Trains the Stage-2 goal-conditioned policy on the rollouts of the
    Stage-1 policy, the goal of every transition being the last state of
    its rollout.

    Raises:
        EmptyDatasetError: if the rollouts hold no transition.
    """
    return _train_policy(policies.PolicyKind.GCBC, rollouts.trajectories,
                         config, rollouts.env_config.a_max,
                         config.pipeline.n_iter_stage2, rng, "Stage 2")


def train_baseline(dataset: DemoDataset, config: ExperimentConfig,
                   kind: Union[policies.PolicyKind, str],
                   rng: np.random.Generator) -> policies.PolicyModel:
    """Trains a BC or GCBC baseline on the demonstrations.

    Raises:
        ValueError: if the kind is not ``bc`` or ``gcbc``.
    """
    kind = policies.PolicyKind(kind)
    if kind is policies.PolicyKind.STAGE1:
        raise ValueError("the baselines are bc or gcbc policies")
    return _train_policy(kind, dataset.trajectories, config,
                         dataset.env_config.a_max,
                         config.pipeline.n_iter_baseline, rng,
                         kind.value.upper())


@dataclasses.dataclass
class RunResult:
    """Outcome of an experiment"""
    #: Run directory
    run_dir: pathlib.Path
    #: Content of ``manifest.json``
    manifest: Dict[str, Any]
    #: Metrics of every model evaluated
    reports: List[evaluation.MetricsReport]


class _Run:
    """Records the status of the stages into the run manifest"""
    def __init__(self, run_dir: pathlib.Path, seed: int):
        self.run_dir = run_dir
        self.start = time.perf_counter()
        self.manifest = dict(
            seed=seed,
            stages={item: dict(status="skipped")
                    for item in STAGES},
            artifacts={},
            wall_clock=0.0)  # type: Dict[str, Any]

    def path(self, name: str, filename: str) -> pathlib.Path:
        self.manifest["artifacts"][name] = filename
        return self.run_dir / filename

    def write(self) -> None:
        self.manifest["wall_clock"] = time.perf_counter() - self.start
        write_manifest(self.run_dir / "manifest.json", self.manifest)

    @contextlib.contextmanager
    def stage(self, name: str) -> Iterator[None]:
        LOGGER.info("stage %s started", name)
        start = time.perf_counter()
        entry = self.manifest["stages"][name]
        try:
            yield
        except Exception as error:
            entry.update(status="failed",
                         error=f"{type(error).__name__}: {error}")
            LOGGER.warning("stage %s failed: %s", name, error)
            raise
        else:
            entry["status"] = "ok"
        finally:
            entry["seconds"] = time.perf_counter() - start
            self.write()


def run_experiment(config: Union[ExperimentConfig, Path],
                   run_dir: Path,
                   seed: Optional[int] = None) -> RunResult:
    """Runs every stage of an experiment.

    The run directory receives ``config.snapshot``, ``demos.csv``,
    ``stage1.ckpt``, ``d2.csv``, ``stage2.ckpt``, ``bc.ckpt``,
    ``gcbc.ckpt``, ``metrics.csv``, ``trajectories.svg`` and
    ``manifest.json``, recording the status and the duration of every
    stage. Every stage draws from its own stream of the root seed, so two
    runs of the same configuration write identical metrics.

    Args:
        config (ExperimentConfig): Configuration, or path to a complete
            configuration file
        run_dir (str): Run directory, created if needed
        seed (int, optional): Root seed replacing the configured one

    Return:
        RunResult: the run directory, its manifest and the metrics.

    Raises:
        Exception: the error of the failing stage, after the manifest has
            been written. The artifacts of the previous stages are kept.
    """
    if not isinstance(config, ExperimentConfig):
        config = ExperimentConfig.load(config)
    if seed is not None:
        config = config.with_seed(seed)
    run_dir = pathlib.Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    root = config.seed
    run = _Run(run_dir, root)
    config.save(run.path("config", "config.snapshot"))
    run.write()

    with run.stage("demos"):
        demos = collect_demos(config.env, config.pipeline.n_demos,
                              seeding.stream(root, seeding.Stream.DEMOS))
        demos.save(run.path("demos", "demos.csv"))
    with run.stage("stage1"):
        bundle = train_stage1(demos, config,
                              seeding.stream(root, seeding.Stream.STAGE1))
        save_checkpoint(bundle, run.path("stage1", "stage1.ckpt"))
    with run.stage("rollouts"):
        rollouts = collect_stage2_rollouts(
            bundle, config.env, config.pipeline,
            seeding.stream(root, seeding.Stream.ROLLOUTS), root)
        rollouts.save(run.path("rollouts", "d2.csv"))
    with run.stage("stage2"):
        stage2 = train_stage2(rollouts, config,
                              seeding.stream(root, seeding.Stream.STAGE2))
        save_checkpoint(stage2, run.path("stage2", "stage2.ckpt"))
    baselines = {}
    for kind, key in ((policies.PolicyKind.BC, seeding.Stream.BC),
                      (policies.PolicyKind.GCBC, seeding.Stream.GCBC)):
        with run.stage(kind.value):
            baselines[kind] = train_baseline(demos, config, kind,
                                             seeding.stream(root, key))
            save_checkpoint(baselines[kind],
                            run.path(kind.value, f"{kind.value}.ckpt"))

    models = (
        (baselines[policies.PolicyKind.BC], evaluation.ModelKind.BC),
        (baselines[policies.PolicyKind.GCBC], evaluation.ModelKind.GCBC),
        (bundle, evaluation.ModelKind.GTI_STAGE1),
        (stage2, evaluation.ModelKind.GTI_STAGE2),
    )  # type: Tuple[Tuple[Any, evaluation.ModelKind], ...]
    with run.stage("evaluation"):
        reports = [
            evaluation.evaluate_policy(model,
                                       config.env,
                                       config.eval,
                                       evaluation.evaluation_stream(
                                           root, kind),
                                       kind=kind) for model, kind in models
        ]
    with run.stage("report"):
        goals = goal_proposal.sample_goals(
            bundle.cvae, np.asarray(config.env.gap_center), 100,
            seeding.stream(root, seeding.Stream.REPORT), per_mode=True)
        paths = report.emit_report(
            reports, run_dir, config.env, demos.trajectories,
            {item.model: item.rollouts
             for item in reports}, goals)
        for name, path in paths.items():
            run.path(name, path.name)
    LOGGER.info("run written to %s", run_dir)
    return RunResult(run_dir, run.manifest, reports)
