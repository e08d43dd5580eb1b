# Copyright (c) 2020 pygti developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Gradient verification
=====================
"""
from typing import Callable, Optional, Tuple
import numpy as np
from .params import ParamStore

#: Signature of the functions checked: parameters -> (loss, gradients)
LossFunction = Callable[[ParamStore], Tuple[float, ParamStore]]


def grad_check(params: ParamStore,
               function: LossFunction,
               step: float = 1e-4,
               max_entries: Optional[int] = None,
               rng: Optional[np.random.Generator] = None) -> float:
    """Compares analytic gradients with central finite differences.

    The check is performed on a float64 copy of ``params``; the store
    provided is left untouched.

    Args:
        params (pygti.core.ParamStore): Point where the gradient is checked
        function (callable): Function returning the loss and its gradient
            with respect to every parameter of the store it receives. All
            the randomness of the loss (e.g. the noise of a
            reparameterized sample) must be fixed inside the function.
        step (float, optional): Finite difference step. Defaults to
            ``1e-4``.
        max_entries (int, optional): Maximum number of scalar entries
            checked per parameter, drawn at random with ``rng``. By default,
            every entry is checked.
        rng (numpy.random.Generator, optional): Generator selecting the
            entries checked when ``max_entries`` is set.

    Return:
        float: the maximum over the checked entries of
        ``|analytic - numeric| / max(|analytic|, |numeric|, 1e-8)``.

    Raises:
        FloatingPointError: if the loss is not finite.
    """
    point = params.astype(np.float64)
    loss, analytic = function(point)
    if not np.isfinite(loss):
        raise FloatingPointError(f"loss is not finite: {loss}")
    point.check_layout(analytic)
    rng = rng or np.random.default_rng(0)

    worst = 0.0
    for name, value in point.items():
        flat = value.reshape(-1)
        indices = np.arange(flat.size)
        if max_entries is not None and flat.size > max_entries:
            indices = np.sort(rng.choice(flat.size, max_entries,
                                         replace=False))
        expected = np.asarray(analytic[name], dtype=np.float64).reshape(-1)
        for index in indices:
            saved = flat[index]
            flat[index] = saved + step
            upper, _ = function(point)
            flat[index] = saved - step
            lower, _ = function(point)
            flat[index] = saved
            if not (np.isfinite(upper) and np.isfinite(lower)):
                raise FloatingPointError(
                    f"loss is not finite around {name}[{index}]")
            numeric = (upper - lower) / (2 * step)
            error = abs(expected[index] - numeric) / max(
                abs(expected[index]), abs(numeric), 1e-8)
            worst = max(worst, error)
    return worst
