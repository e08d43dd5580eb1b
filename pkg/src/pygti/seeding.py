# Copyright (c) 2020 pygti developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Random streams
==============

Every consumer of randomness draws from its own generator, derived from the
root seed and a key path, so that results do not depend on the order in
which independent tasks are executed.
"""
import enum
import numpy as np


class Stream(enum.IntEnum):
    """Top-level keys of the random streams"""
    DEMOS = 0
    STAGE1 = 1
    ROLLOUTS = 2
    STAGE2 = 3
    BC = 4
    GCBC = 5
    EVALUATION = 6
    REPORT = 7


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Builds the generator identified by ``keys`` under ``seed``.

    Args:
        seed (int): Root seed (unsigned 64-bit integer)
        *keys (int): Path of non-negative integers naming the stream

    Return:
        numpy.random.Generator: an independent PCG64 generator.
    """
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed {seed} is not an unsigned 64-bit integer")
    return np.random.Generator(
        np.random.PCG64(
            np.random.SeedSequence(int(seed),
                                   spawn_key=tuple(int(item)
                                                   for item in keys))))
