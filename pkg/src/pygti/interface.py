# Copyright (c) 2020 pygti developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Model interface
===============

Conversion of the trained models from and to the triplet ``(kind tag,
hyperparameters, parameter store)`` stored by the checkpoints.
"""
from typing import Any, Dict, List, Tuple, Union
import dataclasses
from .core import MlpSpec, ParamStore
from . import goal_proposal
from . import policies

#: Tag of the goal proposal models
CVAE = "cvae"
#: Tag of the policies
POLICY = "policy"
#: Tag of the Stage-1 bundles
STAGE1 = "stage1"

#: Prefixes of the parameters of a Stage-1 bundle
CVAE_PREFIX = "cvae/"
CONTROLLER_PREFIX = "controller/"


@dataclasses.dataclass
class Stage1Bundle:
    """Goal proposal model and low-level controller trained together"""
    #: Goal proposal model
    cvae: goal_proposal.CvaeModel
    #: Stage-1 controller
    controller: policies.PolicyModel
    #: Losses recorded at every iteration, by loss term
    losses: Dict[str, List[float]] = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        if self.controller.kind is not policies.PolicyKind.STAGE1:
            raise ValueError(f"a {self.controller.kind.value} policy is not "
                             "a Stage-1 controller")
        if self.controller.horizon != self.cvae.horizon:
            raise ValueError(
                f"controller horizon {self.controller.horizon} does not "
                f"match the goal horizon {self.cvae.horizon}")

    def copy(self) -> "Stage1Bundle":
        """Gets a deep copy of the models"""
        return Stage1Bundle(
            self.cvae.with_params(self.cvae.params.copy()),
            self.controller.with_params(self.controller.params.copy()),
            {key: list(value)
             for key, value in self.losses.items()})

    def checksum(self) -> str:
        """Digest of the parameters of both models"""
        return self.cvae.params.checksum() + self.controller.params.checksum()


Model = Union[goal_proposal.CvaeModel, policies.PolicyModel, Stage1Bundle]


def _cvae_hyper(model: goal_proposal.CvaeModel) -> Dict[str, Any]:
    return dataclasses.asdict(model.config)


def _policy_hyper(model: policies.PolicyModel) -> Dict[str, Any]:
    return dict(kind=model.kind.value,
                layer_sizes=list(model.spec.layer_sizes),
                activation=model.spec.activation,
                a_max=model.a_max,
                goal_mode=None
                if model.goal_mode is None else model.goal_mode.value,
                horizon=model.horizon)


def _cvae(hyper: Dict[str, Any],
          params: ParamStore) -> goal_proposal.CvaeModel:
    return goal_proposal.CvaeModel(goal_proposal.CvaeConfig(**hyper), params)


def _policy(hyper: Dict[str, Any],
            params: ParamStore) -> policies.PolicyModel:
    return policies.PolicyModel(
        hyper["kind"], MlpSpec(hyper["layer_sizes"], hyper["activation"]),
        params, hyper["a_max"], hyper["goal_mode"], hyper["horizon"])


def to_arrays(model: Model) -> Tuple[str, Dict[str, Any], ParamStore]:
    """Splits a model into its kind tag, hyperparameters and parameters.

    Raises:
        TypeError: if the object is not a model.
    """
    if isinstance(model, goal_proposal.CvaeModel):
        return CVAE, _cvae_hyper(model), model.params
    if isinstance(model, policies.PolicyModel):
        return POLICY, _policy_hyper(model), model.params
    if isinstance(model, Stage1Bundle):
        params = ParamStore()
        params.update(model.cvae.params, CVAE_PREFIX)
        params.update(model.controller.params, CONTROLLER_PREFIX)
        return STAGE1, dict(cvae=_cvae_hyper(model.cvae),
                            controller=_policy_hyper(
                                model.controller)), params
    raise TypeError(f"{type(model).__name__} is not a model")


def from_arrays(kind: str, hyper: Dict[str, Any],
                params: ParamStore) -> Model:
    """Rebuilds a model split by :py:func:`to_arrays`.

    Raises:
        ValueError: if the kind tag is not defined or if the parameters do
            not match the hyperparameters.
    """
    if kind == CVAE:
        return _cvae(hyper, params)
    if kind == POLICY:
        return _policy(hyper, params)
    if kind == STAGE1:
        return Stage1Bundle(
            _cvae(hyper["cvae"], params.subset(CVAE_PREFIX)),
            _policy(hyper["controller"], params.subset(CONTROLLER_PREFIX)))
    raise ValueError(f"model kind {kind!r} is not defined")
