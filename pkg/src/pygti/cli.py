# Copyright (c) 2020 pygti developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Command line interface
======================

Every subcommand reads the experiment configuration (``--config``, the
defaults otherwise), draws from the same random streams as
:py:func:`pygti.pipeline.run_experiment` and writes its artifacts into the
output directory (``--out``), so that running the stages one by one
reproduces ``run-all``.
"""
from typing import Callable, Dict, List, Optional
import argparse
import logging
import pathlib
import sys
import numpy as np
import pandas as pd
from . import evaluation
from . import goal_proposal
from . import intersection
from . import pipeline
from . import policies
from . import report
from . import seeding
from . import version
from .checkpoint import load_checkpoint, save_checkpoint
from .core import grad_check
from .dataset import DemoDataset, collect_demos
from .interface import Stage1Bundle

LOGGER = logging.getLogger(__name__)

#: Largest relative error accepted by ``grad-check``
GRAD_CHECK_TOLERANCE = 1e-5

#: Errors reported by a message and the exit code 1
FAILURES = (OSError, ValueError, TypeError, RuntimeError, FloatingPointError)


def _experiment(args: argparse.Namespace,
                require_all: bool = False) -> pipeline.ExperimentConfig:
    if args.config is None:
        config = pipeline.ExperimentConfig()
    else:
        config = pipeline.ExperimentConfig.load(args.config, require_all)
    if args.seed is not None:
        config = config.with_seed(args.seed)
    return config


def _out(args: argparse.Namespace, filename: str) -> pathlib.Path:
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out / filename


def _input(args: argparse.Namespace, name: str,
           filename: str) -> pathlib.Path:
    value = getattr(args, name)
    return pathlib.Path(args.out) / filename if value is None else \
        pathlib.Path(value)


def collect_demos_command(args: argparse.Namespace) -> int:
    config = _experiment(args)
    count = config.pipeline.n_demos if args.n is None else args.n
    demos = collect_demos(config.env, count,
                          seeding.stream(config.seed, seeding.Stream.DEMOS))
    path = _out(args, "demos.csv")
    demos.save(path)
    LOGGER.info("%d demonstrations written to %s", len(demos), path)
    return 0


def train_stage1_command(args: argparse.Namespace) -> int:
    config = _experiment(args)
    demos = DemoDataset.load(_input(args, "demos", "demos.csv"))
    bundle = pipeline.train_stage1(
        demos, config, seeding.stream(config.seed, seeding.Stream.STAGE1))
    path = _out(args, "stage1.ckpt")
    save_checkpoint(bundle, path)
    LOGGER.info("Stage-1 models written to %s", path)
    return 0


def _load(path: pathlib.Path, cls: type, what: str):
    model = load_checkpoint(path)
    if not isinstance(model, cls):
        raise TypeError(f"{path} does not hold {what}")
    return model


def rollout_command(args: argparse.Namespace) -> int:
    config = _experiment(args)
    bundle = _load(_input(args, "stage1", "stage1.ckpt"), Stage1Bundle,
                   "Stage-1 models")
    rollouts = pipeline.collect_stage2_rollouts(
        bundle, config.env, config.pipeline,
        seeding.stream(config.seed, seeding.Stream.ROLLOUTS), config.seed)
    path = _out(args, "d2.csv")
    rollouts.save(path)
    LOGGER.info("%d rollouts written to %s", len(rollouts), path)
    return 0


def train_stage2_command(args: argparse.Namespace) -> int:
    config = _experiment(args)
    rollouts = pipeline.RolloutDataset.load(_input(args, "rollouts",
                                                   "d2.csv"))
    model = pipeline.train_stage2(
        rollouts, config, seeding.stream(config.seed, seeding.Stream.STAGE2))
    path = _out(args, "stage2.ckpt")
    save_checkpoint(model, path)
    LOGGER.info("Stage-2 policy written to %s", path)
    return 0


def train_baseline_command(args: argparse.Namespace) -> int:
    config = _experiment(args)
    kind = policies.PolicyKind(args.kind)
    demos = DemoDataset.load(_input(args, "demos", "demos.csv"))
    key = seeding.Stream.BC if kind is policies.PolicyKind.BC else \
        seeding.Stream.GCBC
    model = pipeline.train_baseline(demos, config, kind,
                                    seeding.stream(config.seed, key))
    path = _out(args, f"{kind.value}.ckpt")
    save_checkpoint(model, path)
    LOGGER.info("%s policy written to %s", kind.value.upper(), path)
    return 0


def evaluate_command(args: argparse.Namespace) -> int:
    config = _experiment(args)
    path = pathlib.Path(args.model)
    model = load_checkpoint(path)
    if isinstance(model, goal_proposal.CvaeModel):
        raise TypeError(f"{path}: a goal proposal model is not a policy")
    kind = evaluation.model_kind(model, stage2=args.stage2)
    result = evaluation.evaluate_policy(
        model, config.env, config.eval,
        evaluation.evaluation_stream(config.seed, kind),
        model_id=args.model_id or path.stem,
        kind=kind)
    report.emit_report([result], args.out, config.env,
                       rollouts={result.model: result.rollouts})
    print(result.summary())
    return 0


def run_all_command(args: argparse.Namespace) -> int:
    config = _experiment(args, require_all=True)
    result = pipeline.run_experiment(config, args.out)
    for item in result.reports:
        print(item.summary())
    return 0


def _check_cvae(config: pipeline.ExperimentConfig,
                rng: np.random.Generator) -> float:
    model = goal_proposal.CvaeModel.create(config.cvae, rng)
    s_t = rng.uniform(-1, 1, size=(8, 2))
    s_g = rng.uniform(-1, 1, size=(8, 2))
    noise = rng.standard_normal((8, model.latent_dim))

    def function(params):
        loss, grads, _ = goal_proposal.cvae_loss(model.with_params(params),
                                                 s_t, s_g, noise,
                                                 config.cvae.beta)
        return loss, grads

    return grad_check(model.params, function, max_entries=10, rng=rng)


def _check_policy(kind: policies.PolicyKind,
                  config: pipeline.ExperimentConfig,
                  rng: np.random.Generator) -> float:
    model = policies.PolicyModel.create(kind,
                                        config.policy,
                                        config.env.a_max,
                                        rng,
                                        latent_dim=config.cvae.latent_dim,
                                        horizon=config.cvae.horizon)
    inputs = rng.uniform(-1, 1, size=(8, model.spec.input_size))
    targets = rng.uniform(-config.env.a_max, config.env.a_max, size=(8, 2))

    def function(params):
        return policies.policy_loss(model.with_params(params), inputs,
                                    targets)

    return grad_check(model.params, function, max_entries=10, rng=rng)


def grad_check_command(args: argparse.Namespace) -> int:
    config = _experiment(args)
    rng = np.random.default_rng(config.seed)
    checks = {
        "cvae": lambda: _check_cvae(config, rng)
    }  # type: Dict[str, Callable[[], float]]
    for kind in policies.PolicyKind:
        checks[kind.value] = lambda kind=kind: _check_policy(
            kind, config, rng)
    failed = False
    for name, check in checks.items():
        error = check()
        status = "ok" if error <= args.tolerance else "FAILED"
        failed |= error > args.tolerance
        print(f"{name:10s} max relative error {error:.3e} {status}")
    return 1 if failed else 0


def intersections_command(args: argparse.Namespace) -> int:
    config = _experiment(args)
    demos = DemoDataset.load(_input(args, "demos", "demos.csv"))
    pairs = intersection.detect_intersections(
        demos, args.epsilon, distinct_pairings=not args.all_pairings)
    fraction = intersection.fraction_near(demos, pairs,
                                          config.env.gap_center,
                                          args.radius)
    print(f"{len(pairs)} intersections, {fraction:.1%} within "
          f"{args.radius} of the gap centre")
    if args.pairs is not None:
        pd.DataFrame(pairs, columns=["traj_i", "t_i", "traj_j",
                                     "t_j"]).to_csv(args.pairs,
                                                    index=False,
                                                    lineterminator="\n")
        LOGGER.info("intersections written to %s", args.pairs)
    return 0


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed",
                        type=int,
                        help="root seed, replacing env.seed")
    common.add_argument("--out",
                        default="out",
                        help="output directory (default: %(default)s)")
    common.add_argument("--config", help="experiment configuration file")
    common.add_argument("--verbose",
                        "-v",
                        action="store_true",
                        help="log the training losses")

    parser = argparse.ArgumentParser(
        prog="pygti",
        description="Generalization through imitation on the crossing "
        "environments")
    parser.add_argument("--version",
                        action="version",
                        version=f"%(prog)s {version.release()}")
    commands = parser.add_subparsers(dest="command", metavar="command")
    commands.required = True

    item = commands.add_parser("collect-demos",
                               parents=[common],
                               help="collect the scripted demonstrations")
    item.add_argument("--n",
                      type=int,
                      help="number of demonstrations (default: "
                      "pipeline.n_demos)")
    item.set_defaults(function=collect_demos_command)

    item = commands.add_parser("train-stage1",
                               parents=[common],
                               help="train the goal proposal model and the "
                               "Stage-1 controller")
    item.add_argument("--demos", help="demonstrations (default: "
                      "<out>/demos.csv)")
    item.set_defaults(function=train_stage1_command)

    item = commands.add_parser("rollout",
                               parents=[common],
                               help="collect the Stage-2 rollouts")
    item.add_argument("--stage1",
                      help="Stage-1 checkpoint (default: <out>/stage1.ckpt)")
    item.set_defaults(function=rollout_command)

    item = commands.add_parser("train-stage2",
                               parents=[common],
                               help="train the Stage-2 policy")
    item.add_argument("--rollouts",
                      help="Stage-2 rollouts (default: <out>/d2.csv)")
    item.set_defaults(function=train_stage2_command)

    item = commands.add_parser("train-baseline",
                               parents=[common],
                               help="train a BC or GCBC baseline")
    item.add_argument("--kind",
                      required=True,
                      choices=[
                          policies.PolicyKind.BC.value,
                          policies.PolicyKind.GCBC.value
                      ])
    item.add_argument("--demos", help="demonstrations (default: "
                      "<out>/demos.csv)")
    item.set_defaults(function=train_baseline_command)

    item = commands.add_parser("evaluate",
                               parents=[common],
                               help="evaluate a checkpoint")
    item.add_argument("--model", required=True, help="checkpoint evaluated")
    item.add_argument("--model-id",
                      help="identifier in the report (default: checkpoint "
                      "name)")
    item.add_argument("--stage2",
                      action="store_true",
                      help="report a GCBC checkpoint as a Stage-2 policy")
    item.set_defaults(function=evaluate_command)

    item = commands.add_parser("run-all",
                               parents=[common],
                               help="run every stage of an experiment")
    item.set_defaults(function=run_all_command)

    item = commands.add_parser("grad-check",
                               parents=[common],
                               help="check the analytic gradients")
    item.add_argument("--tolerance",
                      type=float,
                      default=GRAD_CHECK_TOLERANCE,
                      help="largest relative error (default: %(default)s)")
    item.set_defaults(function=grad_check_command)

    item = commands.add_parser("intersections",
                               parents=[common],
                               help="find the states shared by "
                               "demonstrations")
    item.add_argument("--demos", help="demonstrations (default: "
                      "<out>/demos.csv)")
    item.add_argument("--epsilon",
                      type=float,
                      default=0.05,
                      help="largest distance between shared states "
                      "(default: %(default)s)")
    item.add_argument("--radius",
                      type=float,
                      default=0.2,
                      help="radius around the gap centre (default: "
                      "%(default)s)")
    item.add_argument("--all-pairings",
                      action="store_true",
                      help="also report trajectories starting in the same "
                      "region")
    item.add_argument("--pairs", help="CSV file receiving the intersections")
    item.set_defaults(function=intersections_command)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Runs the command line interface.

    Return:
        int: the exit code, 0 on success, 1 if the command failed. Usage
        errors exit with the code 2.
    """
    parser = _parser()
    args = parser.parse_args(argv)
    if args.command == "run-all" and args.config is None:
        parser.error("run-all requires --config")
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s: %(name)s: %(message)s")
    try:
        return args.function(args)
    except FAILURES as error:
        LOGGER.debug("command failed", exc_info=True)
        print(f"pygti: error: {error}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
