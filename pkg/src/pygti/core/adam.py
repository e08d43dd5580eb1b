# Copyright (c) 2020 pygti developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Adam optimizer
==============
"""
from typing import Tuple
import dataclasses
import numpy as np
from .params import ParamStore


@dataclasses.dataclass
class AdamState:
    """Moments and hyperparameters of the Adam optimizer"""
    #: First moment estimates, float64, same layout as the parameters
    first_moment: ParamStore
    #: Second moment estimates, float64, same layout as the parameters
    second_moment: ParamStore
    #: Step size
    learning_rate: float = 1e-3
    #: Decay rate of the first moment estimates
    beta1: float = 0.9
    #: Decay rate of the second moment estimates
    beta2: float = 0.999
    #: Constant avoiding divisions by zero
    epsilon: float = 1e-8
    #: Number of updates performed
    step_count: int = 0

    @classmethod
    def create(cls,
               params: ParamStore,
               learning_rate: float = 1e-3,
               beta1: float = 0.9,
               beta2: float = 0.999,
               epsilon: float = 1e-8) -> "AdamState":
        """Creates the optimizer state of a parameter store.

        Args:
            params (pygti.core.ParamStore): Parameters to optimize
            learning_rate (float, optional): Step size. Defaults to ``1e-3``.
            beta1 (float, optional): Decay rate of the first moment
                estimates. Defaults to ``0.9``.
            beta2 (float, optional): Decay rate of the second moment
                estimates. Defaults to ``0.999``.
            epsilon (float, optional): Defaults to ``1e-8``.
        """
        if learning_rate <= 0:
            raise ValueError(f"learning rate {learning_rate} must be > 0")
        if not (0 <= beta1 < 1 and 0 <= beta2 < 1):
            raise ValueError(f"decay rates {(beta1, beta2)} must lie in "
                             "[0, 1)")
        return cls(params.zeros_like(np.float64),
                   params.zeros_like(np.float64), learning_rate, beta1,
                   beta2, epsilon)


def adam_step(params: ParamStore, grads: ParamStore,
              state: AdamState) -> Tuple[ParamStore, AdamState]:
    """Applies one bias-corrected Adam update in place.

    Args:
        params (pygti.core.ParamStore): Parameters to update
        grads (pygti.core.ParamStore): Gradients of the loss, same layout
        state (pygti.core.AdamState): Optimizer state, updated in place

    Return:
        tuple: the updated parameters and optimizer state.

    Raises:
        ValueError: if the layouts of the parameters, gradients and moments
            differ.
    """
    params.check_layout(grads)
    params.check_layout(state.first_moment)
    params.check_layout(state.second_moment)

    state.step_count += 1
    correction1 = 1.0 - state.beta1**state.step_count
    correction2 = 1.0 - state.beta2**state.step_count

    for name, value in params.items():
        grad = np.asarray(grads[name], dtype=np.float64)
        m = state.first_moment[name]
        v = state.second_moment[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * grad
        v *= state.beta2
        v += (1.0 - state.beta2) * grad * grad
        update = state.learning_rate * (m / correction1) / (
            np.sqrt(v / correction2) + state.epsilon)
        value[...] = value.astype(np.float64) - update
    return params, state
