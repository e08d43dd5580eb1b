# Copyright (c) 2020 pygti developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Reports
=======

``metrics.csv`` holds one row per model and start location, followed by the
aggregate row (``location = all``) of the model. ``trajectories.svg`` draws
the demonstrations, the rollouts of every model colored by start region and
the goals proposed at the gap centre.
"""
from typing import Dict, List, Optional, Sequence, Union
import logging
import pathlib
import matplotlib
import matplotlib.figure
import matplotlib.patches
import numpy as np
import pandas as pd
from . import env
from . import evaluation
from .backends import xarray as xr_backend
from .dataset import FLOAT_FORMAT, Trajectory
from .geometry import GoalRegion, StartRegion

LOGGER = logging.getLogger(__name__)

#: Columns of the metrics file
COLUMNS = ("model", "location", "start_region", "x",
           "y") + evaluation.LocationMetrics.COUNTS + xr_backend.RATES

#: Location of the aggregate rows
AGGREGATE = "all"

#: Colors of the rollouts, by start region
COLORS = {StartRegion.UL: "tab:blue", StartRegion.UR: "tab:orange"}

Path = Union[str, pathlib.Path]


def to_frame(reports: Sequence[evaluation.MetricsReport]) -> pd.DataFrame:
    """Builds the table written to ``metrics.csv``"""
    frames = []
    for report in reports:
        frame = xr_backend.to_dataset(report).to_dataframe().reset_index()
        frame["location"] = frame["location"].astype(str)
        aggregate = dict(report.totals())
        aggregate.update(report.aggregate())
        aggregate.update(location=AGGREGATE,
                         start_region="",
                         x=np.nan,
                         y=np.nan)
        frame = pd.concat([frame, pd.DataFrame([aggregate])],
                          ignore_index=True)
        frame.insert(0, "model", report.model)
        frames.append(frame[list(COLUMNS)])
    if not frames:
        return pd.DataFrame(columns=list(COLUMNS))
    return pd.concat(frames, ignore_index=True)


def write_metrics(path: Path,
                  reports: Sequence[evaluation.MetricsReport]) -> None:
    """Writes reports to a CSV file"""
    to_frame(reports).to_csv(path,
                             index=False,
                             float_format=FLOAT_FORMAT,
                             na_rep="",
                             lineterminator="\n",
                             encoding="utf-8")


def read_metrics(path: Path) -> List[evaluation.MetricsReport]:
    """Reads the reports written by :py:func:`write_metrics`.

    The rates and the aggregate rows are derived from the counters and are
    not read back.
    """
    frame = pd.read_csv(path,
                        dtype=dict(model=str, location=str, start_region=str),
                        keep_default_na=False,
                        na_values={
                            "x": [""],
                            "y": [""]
                        },
                        encoding="utf-8")
    if tuple(frame.columns) != COLUMNS:
        raise ValueError(f"{path}: unexpected header {tuple(frame.columns)}")
    result = []
    for model in pd.unique(frame["model"]):
        rows = frame[(frame["model"] == model)
                     & (frame["location"] != AGGREGATE)]
        locations = [
            evaluation.LocationMetrics(
                row.start_region,
                # Start locations are float32 values
                float(np.float32(row.x)),
                float(np.float32(row.y)),
                **{
                    name: int(getattr(row, name))
                    for name in evaluation.LocationMetrics.COUNTS
                }) for row in rows.itertuples(index=False)
        ]
        result.append(evaluation.MetricsReport(str(model), locations))
    return result


def _draw_geometry(axes, config: env.EnvConfig) -> None:
    x_min, x_max, y_min, y_max = config.workspace
    axes.plot([x_min, -config.gap_half_width], [config.wall_y] * 2,
              color="black",
              linewidth=2)
    axes.plot([config.gap_half_width, x_max], [config.wall_y] * 2,
              color="black",
              linewidth=2)
    boxes = [(config.start_box(item), "0.85") for item in StartRegion]
    boxes += [(config.goal_box(item), "palegreen") for item in GoalRegion]
    for box, color in boxes:
        x0, x1, y0, y1 = box.bounds()
        axes.add_patch(
            matplotlib.patches.Rectangle((x0, y0),
                                         x1 - x0,
                                         y1 - y0,
                                         facecolor=color,
                                         edgecolor="none",
                                         zorder=0))
    axes.set_xlim(x_min, x_max)
    axes.set_ylim(y_min, y_max)
    axes.set_aspect("equal")
    axes.set_xticks([])
    axes.set_yticks([])


def plot_trajectories(
        path: Path,
        config: env.EnvConfig,
        demos: Optional[Sequence[Trajectory]] = None,
        rollouts: Optional[Dict[str, Sequence[Trajectory]]] = None,
        goal_samples: Optional[np.ndarray] = None) -> None:
    """Draws the trajectories into an SVG file.

    Every rollout is drawn as one line whose SVG group is identified by
    ``rollout-<model>-<index>``.

    Args:
        path (str): Path to the SVG file
        config (pygti.env.EnvConfig): Environment configuration
        demos (list, optional): Demonstrations
        rollouts (dict, optional): Rollouts of every model
        goal_samples (numpy.ndarray, optional): Goals proposed at the gap
            centre ``(n, 2)``, or per prior component ``(K, n, 2)``
    """
    rollouts = rollouts or {}
    panels = ["demonstrations"] + list(rollouts)
    if goal_samples is not None:
        panels.append("goals")
    figure = matplotlib.figure.Figure(figsize=(4 * len(panels), 4))
    axes = figure.subplots(1, len(panels), squeeze=False)[0]
    for item, title in zip(axes, panels):
        _draw_geometry(item, config)
        item.set_title(title)

    for trajectory in demos or []:
        axes[0].plot(trajectory.states[:, 0],
                     trajectory.states[:, 1],
                     color="0.4",
                     linewidth=0.3)

    for panel, (model, trajectories) in enumerate(rollouts.items(), 1):
        for ix, trajectory in enumerate(trajectories):
            (line, ) = axes[panel].plot(
                trajectory.states[:, 0],
                trajectory.states[:, 1],
                color=COLORS[trajectory.start_region],
                linewidth=0.3)
            line.set_gid(f"rollout-{model}-{ix}")

    if goal_samples is not None:
        samples = np.asarray(goal_samples)
        if samples.ndim == 2:
            samples = samples[np.newaxis]
        for ix, item in enumerate(samples):
            axes[-1].scatter(item[:, 0],
                             item[:, 1],
                             s=4,
                             label=f"mode {ix}" if len(samples) > 1 else None)
        axes[-1].scatter([0.0], [config.wall_y], marker="x", color="black")
        if len(samples) > 1:
            axes[-1].legend(loc="upper center", fontsize="x-small")

    with matplotlib.rc_context({"svg.hashsalt": "pygti"}):
        figure.savefig(path, format="svg", metadata={"Date": None})


def emit_report(reports: Sequence[evaluation.MetricsReport],
                run_dir: Path,
                config: env.EnvConfig,
                demos: Optional[Sequence[Trajectory]] = None,
                rollouts: Optional[Dict[str, Sequence[Trajectory]]] = None,
                goal_samples: Optional[np.ndarray] = None
                ) -> Dict[str, pathlib.Path]:
    """Writes ``metrics.csv`` and ``trajectories.svg`` into a directory.

    Args:
        reports (list): Metrics of the models evaluated
        run_dir (str): Output directory, created if needed
        config (pygti.env.EnvConfig): Environment configuration
        demos (list, optional): Demonstrations drawn
        rollouts (dict, optional): Rollouts drawn, by model
        goal_samples (numpy.ndarray, optional): Goals proposed at the gap
            centre

    Return:
        dict: the paths of the files written.
    """
    run_dir = pathlib.Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    paths = dict(metrics=run_dir / "metrics.csv",
                 trajectories=run_dir / "trajectories.svg")
    write_metrics(paths["metrics"], reports)
    plot_trajectories(paths["trajectories"], config, demos, rollouts,
                      goal_samples)
    LOGGER.info("report written to %s", run_dir)
    return paths
