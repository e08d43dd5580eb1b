# Copyright (c) 2020 pygti developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
from . import version
from .checkpoint import load_checkpoint, save_checkpoint
from .dataset import DemoDataset, Trajectory, collect_demos
from .env import EnvConfig, Variant
from .evaluation import EvalConfig, MetricsReport, evaluate_policy
from .goal_proposal import CvaeConfig, CvaeModel
from .interface import Stage1Bundle
from .pipeline import (ExperimentConfig, PipelineConfig, RolloutDataset,
                       run_experiment)
from .policies import PolicyConfig, PolicyModel
__version__ = version.release()
__date__ = version.date()
del version
