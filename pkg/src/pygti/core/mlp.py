# Copyright (c) 2020 pygti developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Feedforward networks
====================

Dense multilayer perceptrons whose parameters live in a
:py:class:`pygti.core.ParamStore`. Layer ``i`` owns the parameters
``{prefix}w{i}`` of shape ``(fan_in, fan_out)`` and ``{prefix}b{i}`` of shape
``(fan_out,)``. Hidden layers apply the activation, the output layer is
linear.
"""
from typing import List, NamedTuple, Optional, Sequence, Tuple
import dataclasses
import numpy as np
from .params import ParamStore

#: Activations handled by the hidden layers
ACTIVATIONS = ("tanh", "relu")


@dataclasses.dataclass(frozen=True)
class MlpSpec:
    """Architecture of a feedforward network"""
    #: Sizes of the input, hidden and output layers
    layer_sizes: Tuple[int, ...]
    #: Activation of the hidden layers
    activation: str = "tanh"

    def __post_init__(self):
        object.__setattr__(self, "layer_sizes",
                           tuple(int(item) for item in self.layer_sizes))
        if len(self.layer_sizes) < 2:
            raise ValueError("an MLP needs at least 2 layer sizes, found "
                             f"{self.layer_sizes}")
        if any(item < 1 for item in self.layer_sizes):
            raise ValueError(
                f"layer sizes must be positive: {self.layer_sizes}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(
                f"activation {self.activation!r} is not defined")

    @property
    def input_size(self) -> int:
        """Gets the number of inputs"""
        return self.layer_sizes[0]

    @property
    def output_size(self) -> int:
        """Gets the number of outputs"""
        return self.layer_sizes[-1]

    @property
    def num_layers(self) -> int:
        """Gets the number of affine layers"""
        return len(self.layer_sizes) - 1


class _Cache(NamedTuple):
    #: Input of every affine layer, then the network output
    activations: List[np.ndarray]
    #: True if the network was called on a single vector
    vector: bool


class Mlp:
    """Feedforward network bound to a name prefix inside a parameter
    store"""
    def __init__(self, spec: MlpSpec, prefix: str = ""):
        self.spec = spec
        self.prefix = prefix

    def weight(self, layer: int) -> str:
        """Gets the name of the weight matrix of a layer"""
        return f"{self.prefix}w{layer}"

    def bias(self, layer: int) -> str:
        """Gets the name of the bias vector of a layer"""
        return f"{self.prefix}b{layer}"

    def init_params(self, params: ParamStore,
                    rng: np.random.Generator) -> ParamStore:
        """Adds the parameters of this network to ``params``.

        Weights are drawn from ``U(-a, a)`` with
        :math:`a=\\sqrt{6/(fan_{in}+fan_{out})}`, biases are set to zero.
        """
        sizes = self.spec.layer_sizes
        for layer in range(self.spec.num_layers):
            fan_in, fan_out = sizes[layer], sizes[layer + 1]
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            params.add(self.weight(layer),
                       rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            params.add(self.bias(layer), np.zeros(fan_out))
        return params

    def check_params(self, params: ParamStore) -> None:
        """Checks that ``params`` holds the parameters of this network.

        Raises:
            KeyError: if a parameter is missing.
            ValueError: if a shape does not match the layer sizes.
        """
        sizes = self.spec.layer_sizes
        for layer in range(self.spec.num_layers):
            shape = params[self.weight(layer)].shape
            if shape != (sizes[layer], sizes[layer + 1]):
                raise ValueError(f"{self.weight(layer)}: shape {shape} does "
                                 "not match the layer sizes "
                                 f"{sizes[layer:layer + 2]}")
            shape = params[self.bias(layer)].shape
            if shape != (sizes[layer + 1], ):
                raise ValueError(f"{self.bias(layer)}: shape {shape} does "
                                 "not match the layer size "
                                 f"{sizes[layer + 1]}")

    def forward(self, params: ParamStore,
                inputs: np.ndarray) -> Tuple[np.ndarray, _Cache]:
        """Evaluates the network.

        Args:
            params (pygti.core.ParamStore): Parameters of the network
            inputs (numpy.ndarray): A vector of ``input_size`` values or a
                matrix ``(n, input_size)``

        Return:
            tuple: the outputs, in float64, and the values needed by
            :py:meth:`backward`.
        """
        x = np.asarray(inputs, dtype=np.float64)
        vector = x.ndim == 1
        if vector:
            x = x[np.newaxis, :]
        if x.ndim != 2 or x.shape[1] != self.spec.input_size:
            raise ValueError(f"input of shape {np.shape(inputs)} does not "
                             f"match the input size {self.spec.input_size}")
        self.check_params(params)
        activations = [x]
        last = self.spec.num_layers - 1
        for layer in range(self.spec.num_layers):
            x = x @ params[self.weight(layer)].astype(np.float64) + \
                params[self.bias(layer)].astype(np.float64)
            if layer != last:
                x = np.tanh(x) if self.spec.activation == "tanh" else \
                    np.maximum(x, 0.0)
            activations.append(x)
        outputs = x[0] if vector else x
        return outputs, _Cache(activations, vector)

    def backward(self,
                 params: ParamStore,
                 cache: _Cache,
                 output_grad: np.ndarray,
                 grads: Optional[ParamStore] = None) -> np.ndarray:
        """Back-propagates the gradient of a scalar with respect to the
        outputs.

        Args:
            params (pygti.core.ParamStore): Parameters used by
                :py:meth:`forward`
            cache: Values returned by :py:meth:`forward`
            output_grad (numpy.ndarray): Gradient of the scalar with respect
                to the outputs, same shape as the outputs
            grads (pygti.core.ParamStore, optional): Store receiving the
                parameter gradients. Gradients are accumulated into the
                entries named like the network parameters. If not set, the
                parameter gradients are discarded.

        Return:
            numpy.ndarray: the gradient with respect to the inputs.
        """
        delta = np.asarray(output_grad, dtype=np.float64)
        if cache.vector:
            delta = delta[np.newaxis, :]
        if delta.shape != cache.activations[-1].shape:
            raise ValueError(
                f"output gradient of shape {np.shape(output_grad)} does not "
                "match the output shape "
                f"{cache.activations[-1].shape[cache.vector:]}")
        for layer in reversed(range(self.spec.num_layers)):
            if layer != self.spec.num_layers - 1:
                output = cache.activations[layer + 1]
                if self.spec.activation == "tanh":
                    delta = delta * (1.0 - output * output)
                else:
                    delta = delta * (output > 0.0)
            if grads is not None:
                grads[self.weight(layer)] = grads[self.weight(layer)] + \
                    cache.activations[layer].T @ delta
                grads[self.bias(layer)] = grads[self.bias(layer)] + \
                    delta.sum(axis=0)
            delta = delta @ params[self.weight(layer)].astype(np.float64).T
        return delta[0] if cache.vector else delta


def init_mlp(spec: MlpSpec,
             rng: np.random.Generator,
             prefix: str = "",
             params: Optional[ParamStore] = None) -> ParamStore:
    """Creates (or extends) a store with freshly initialized network
    parameters.

    Args:
        spec (pygti.core.MlpSpec): Network architecture
        rng (numpy.random.Generator): Random generator
        prefix (str, optional): Prefix of the parameter names
        params (pygti.core.ParamStore, optional): Store to extend

    Return:
        pygti.core.ParamStore: the store holding the new parameters.
    """
    return Mlp(spec, prefix).init_params(
        ParamStore() if params is None else params, rng)


def mlp_forward(spec: MlpSpec,
                params: ParamStore,
                inputs: Sequence[float],
                prefix: str = "") -> np.ndarray:
    """Evaluates a network on a vector (or a batch of vectors).

    Args:
        spec (pygti.core.MlpSpec): Network architecture
        params (pygti.core.ParamStore): Network parameters
        inputs (numpy.ndarray): ``input_size`` values or a matrix
            ``(n, input_size)``
        prefix (str, optional): Prefix of the parameter names

    Return:
        numpy.ndarray: the network outputs.

    Raises:
        ValueError: if the input size does not match the network.
    """
    return Mlp(spec, prefix).forward(params, inputs)[0]


def mlp_backward(spec: MlpSpec,
                 params: ParamStore,
                 inputs: Sequence[float],
                 output_grad: Sequence[float],
                 prefix: str = "") -> ParamStore:
    """Computes the gradient of ``sum(output * output_grad)`` with respect
    to every network parameter.

    Args:
        spec (pygti.core.MlpSpec): Network architecture
        params (pygti.core.ParamStore): Network parameters
        inputs (numpy.ndarray): Network inputs
        output_grad (numpy.ndarray): Weights applied to the outputs
        prefix (str, optional): Prefix of the parameter names

    Return:
        pygti.core.ParamStore: float64 gradients, same layout as the network
        parameters.
    """
    network = Mlp(spec, prefix)
    _, cache = network.forward(params, inputs)
    grads = params.subset(prefix, strip=False).zeros_like(np.float64)
    network.backward(params, cache, output_grad, grads)
    return grads


def join_inputs(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """Concatenates two blocks of network inputs along the last axis, a
    vector being repeated to match a batch.

    Args:
        first (numpy.ndarray): A vector or a matrix ``(n, d1)``
        second (numpy.ndarray): A vector or a matrix ``(n, d2)``

    Return:
        numpy.ndarray: the float64 inputs.
    """
    first = np.asarray(first, dtype=np.float64)
    second = np.asarray(second, dtype=np.float64)
    if first.ndim == second.ndim:
        return np.concatenate([first, second], axis=-1)
    count = len(first) if first.ndim == 2 else len(second)
    return np.concatenate([
        np.broadcast_to(first, (count, first.shape[-1])),
        np.broadcast_to(second, (count, second.shape[-1]))
    ],
                          axis=1)
