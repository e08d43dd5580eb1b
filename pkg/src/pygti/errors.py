# Copyright (c) 2020 pygti developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Exceptions
----------
"""
from typing import Any, Dict, Optional


class TrainingDivergedError(FloatingPointError):
    """Raised when a training loss becomes non-finite.

    Args:
        iteration (int): Index of the failing iteration
        components (dict): Values of the loss terms at this iteration
        last_good (object, optional): Models as they were before the failing
            update
    """
    def __init__(self,
                 iteration: int,
                 components: Dict[str, float],
                 last_good: Optional[Any] = None):
        terms = ", ".join(f"{key}={value!r}"
                          for key, value in components.items())
        super().__init__(
            f"non-finite loss at iteration {iteration}: {terms}")
        self.iteration = iteration
        self.components = components
        self.last_good = last_good


class DemonstratorError(RuntimeError):
    """Raised when too many scripted demonstrations miss their goal"""


class RolloutBudgetError(RuntimeError):
    """Raised when the Stage-1 policy cannot collect the requested number of
    successful rollouts within the attempt budget.

    Args:
        message (str): Description of the failure
        reach_rate (dict): Observed reach rate per start region
    """
    def __init__(self, message: str, reach_rate: Dict[str, float]):
        rates = ", ".join(f"{key}: {value:.1%}"
                          for key, value in reach_rate.items())
        super().__init__(f"{message} (Stage-1 reach rate {rates})")
        self.reach_rate = reach_rate


class EmptyDatasetError(ValueError):
    """Raised when a training dataset holds no usable sample"""
