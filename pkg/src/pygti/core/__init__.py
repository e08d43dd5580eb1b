# Copyright (c) 2020 pygti developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Dense network engine
====================
"""
from .params import ParamStore
from .mlp import (Mlp, MlpSpec, init_mlp, join_inputs, mlp_backward,
                  mlp_forward)
from .adam import AdamState, adam_step
from .gradcheck import grad_check
