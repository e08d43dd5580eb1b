# Copyright (c) 2020 pygti developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Goal proposal
=============

Conditional variational autoencoder over the state reached ``H`` steps
ahead, with a learned Gaussian mixture prior over the latent goals.

* the encoder maps ``(s_g, s_t)`` to the mean and the log standard deviation
  of the posterior ``N(mu, sigma^2)``;
* the decoder maps ``(z, s_t)`` to the predicted state ``s_g``;
* the prior is :math:`\\sum_k w_k N(\\mu_k, \\sigma_k^2)` with
  :math:`w = softmax(logits)`.

The training loss of a pair ``(s_t, s_g)`` is
:math:`\\|s_g - D(z, s_t)\\|^2 + \\beta (\\log q(z) - \\log p(z))`, the
Kullback-Leibler divergence being estimated with the single reparameterized
sample ``z`` used for the reconstruction.
"""
from typing import Dict, Optional, Tuple, Union
import dataclasses
import numpy as np
import scipy.special
from .core import (AdamState, Mlp, MlpSpec, ParamStore, adam_step,
                   join_inputs)
from .errors import TrainingDivergedError

#: Bounds of the posterior log standard deviation
LOG_STD_RANGE = (-5.0, 2.0)

#: Workspace used to clamp the decoded goals
WORKSPACE = (-1.0, 1.0)

_LOG_2PI = np.log(2.0 * np.pi)


@dataclasses.dataclass(frozen=True)
class CvaeConfig:
    """Hyperparameters of the goal proposal model"""
    #: Dimension ``L`` of the latent goals
    latent_dim: int = 2
    #: Number ``K`` of components of the prior
    num_components: int = 4
    #: Weight ``beta_g`` of the KL term
    beta: float = 0.01
    #: Number ``H`` of steps between the current state and the goal
    horizon: int = 5
    #: Sizes of the hidden layers of the encoder and the decoder
    hidden_sizes: Tuple[int, ...] = (64, 64)
    #: Activation of the hidden layers
    activation: str = "tanh"
    #: Adam step size
    learning_rate: float = 1e-3
    #: Number of pairs per update
    batch_size: int = 128
    #: Share of the updates during which the KL weight grows linearly to
    #: ``beta``
    warmup_fraction: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes",
                           tuple(int(item) for item in self.hidden_sizes))
        if self.latent_dim < 1:
            raise ValueError(f"latent_dim {self.latent_dim} must be >= 1")
        if self.num_components < 1:
            raise ValueError(
                f"num_components {self.num_components} must be >= 1")
        if self.beta < 0:
            raise ValueError(f"beta {self.beta} must be >= 0")
        if self.horizon < 1:
            raise ValueError(f"horizon {self.horizon} must be >= 1")
        if self.batch_size < 1:
            raise ValueError(f"batch_size {self.batch_size} must be >= 1")
        if not 0 <= self.warmup_fraction <= 1:
            raise ValueError(
                f"warmup_fraction {self.warmup_fraction} must lie in [0, 1]")

    def kl_weight(self, iteration: int, n_iter: int) -> float:
        """Gets the KL weight used by an iteration of the warm-up schedule
        of a training run of ``n_iter`` updates"""
        ramp = self.warmup_fraction * n_iter
        if ramp <= 0:
            return self.beta
        return self.beta * min(1.0, (iteration + 1) / ramp)


class CvaeModel:
    """Encoder, decoder and prior of the goal proposal model.

    The parameters are held by a single store: ``encoder.*``, ``decoder.*``,
    ``prior.logits`` ``(K,)``, ``prior.means`` ``(K, L)`` and
    ``prior.log_stds`` ``(K, L)``.
    """
    def __init__(self, config: CvaeConfig, params: ParamStore):
        self.config = config
        self.encoder, self.decoder = _networks(config)
        self.params = params
        self.encoder.check_params(params)
        self.decoder.check_params(params)
        shape = (config.num_components, config.latent_dim)
        for name, expected in (("prior.logits", shape[:1]),
                               ("prior.means", shape), ("prior.log_stds",
                                                        shape)):
            if params[name].shape != expected:
                raise ValueError(f"{name}: shape {params[name].shape} does "
                                 f"not match {expected}")

    @classmethod
    def create(cls, config: CvaeConfig,
               rng: np.random.Generator) -> "CvaeModel":
        """Creates a model with freshly initialized parameters. The prior
        starts with equal weights, unit deviations and means drawn from
        ``N(0, 0.1^2)``, overlapping each other."""
        params = ParamStore()
        latent, count = config.latent_dim, config.num_components
        for network in _networks(config):
            network.init_params(params, rng)
        params.add("prior.logits", np.zeros(count))
        params.add("prior.means", 0.1 * rng.standard_normal((count, latent)))
        params.add("prior.log_stds", np.zeros((count, latent)))
        return cls(config, params)

    def with_params(self, params: ParamStore) -> "CvaeModel":
        """Gets the same model bound to another parameter store"""
        return CvaeModel(self.config, params)

    @property
    def latent_dim(self) -> int:
        """Gets the dimension of the latent goals"""
        return self.config.latent_dim

    @property
    def num_components(self) -> int:
        """Gets the number of components of the prior"""
        return self.config.num_components

    @property
    def horizon(self) -> int:
        """Gets the goal horizon ``H``"""
        return self.config.horizon

    @property
    def weights(self) -> np.ndarray:
        """Gets the weights of the prior components"""
        return scipy.special.softmax(
            self.params["prior.logits"].astype(np.float64))

    @property
    def means(self) -> np.ndarray:
        """Gets the means of the prior components ``(K, L)``"""
        return self.params["prior.means"].astype(np.float64)

    @property
    def stds(self) -> np.ndarray:
        """Gets the standard deviations of the prior components ``(K, L)``"""
        return np.exp(self.params["prior.log_stds"].astype(np.float64))

    def __repr__(self) -> str:
        return "<%s.%s L=%d K=%d H=%d beta=%g>" % (
            self.__class__.__module__, self.__class__.__name__,
            self.latent_dim, self.num_components, self.horizon,
            self.config.beta)


def _networks(config: CvaeConfig) -> Tuple[Mlp, Mlp]:
    latent = config.latent_dim
    return (Mlp(
        MlpSpec((4, ) + config.hidden_sizes + (2 * latent, ),
                config.activation), "encoder."),
            Mlp(
                MlpSpec((latent + 2, ) + config.hidden_sizes + (2, ),
                        config.activation), "decoder."))


def _split_encoding(outputs: np.ndarray,
                    latent: int) -> Tuple[np.ndarray, np.ndarray]:
    return outputs[..., :latent], outputs[..., latent:]


def encode(m: CvaeModel, s_g: np.ndarray,
           s_t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Computes the posterior of the latent goal.

    Args:
        m (pygti.goal_proposal.CvaeModel): Model
        s_g (numpy.ndarray): Goal state(s) ``(2,)`` or ``(n, 2)``
        s_t (numpy.ndarray): Current state(s), same shape

    Return:
        tuple: the mean and the standard deviation of the posterior.
    """
    outputs, _ = m.encoder.forward(m.params, join_inputs(s_g, s_t))
    mu, raw = _split_encoding(outputs, m.latent_dim)
    return mu, np.exp(np.clip(raw, *LOG_STD_RANGE))


def reparam_sample(mu: np.ndarray, sigma: np.ndarray,
                   rng: np.random.Generator) -> np.ndarray:
    """Draws ``z = mu + sigma * eps`` with ``eps ~ N(0, I)``"""
    mu = np.asarray(mu, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    if np.any(sigma < 0):
        raise ValueError("standard deviations must be >= 0")
    return mu + sigma * rng.standard_normal(np.broadcast(mu, sigma).shape)


def decode(m: CvaeModel,
           z: np.ndarray,
           s_t: np.ndarray,
           clamp: bool = True) -> np.ndarray:
    """Predicts the state reached ``H`` steps after ``s_t``.

    Args:
        m (pygti.goal_proposal.CvaeModel): Model
        z (numpy.ndarray): Latent goal(s) ``(L,)`` or ``(n, L)``
        s_t (numpy.ndarray): Current state(s) ``(2,)`` or ``(n, 2)``
        clamp (bool, optional): Clamp the prediction to the workspace.
            Defaults to ``True``.

    Return:
        numpy.ndarray: the predicted state(s).
    """
    z = np.asarray(z, dtype=np.float64)
    if z.shape[-1] != m.latent_dim:
        raise ValueError(f"latent of shape {z.shape} does not match the "
                         f"latent dimension {m.latent_dim}")
    outputs, _ = m.decoder.forward(m.params, join_inputs(z, s_t))
    return np.clip(outputs, *WORKSPACE) if clamp else outputs


def _component_log_densities(m: CvaeModel, z: np.ndarray) -> np.ndarray:
    """Log of ``w_k N(z; mu_k, sigma_k^2)``, matrix ``(n, K)``"""
    log_stds = m.params["prior.log_stds"].astype(np.float64)
    scaled = (z[:, np.newaxis, :] - m.means) / np.exp(log_stds)
    log_normal = -0.5 * np.sum(scaled * scaled, axis=-1) - np.sum(
        log_stds, axis=-1) - 0.5 * m.latent_dim * _LOG_2PI
    return np.log(m.weights) + log_normal


def prior_log_density(m: CvaeModel, z: np.ndarray) -> Union[float, np.ndarray]:
    """Evaluates the log density of the mixture prior.

    Args:
        m (pygti.goal_proposal.CvaeModel): Model
        z (numpy.ndarray): Latent goal(s) ``(L,)`` or ``(n, L)``

    Return:
        float or numpy.ndarray: the log density of each latent goal.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.shape[-1] != m.latent_dim:
        raise ValueError(f"latent of shape {z.shape} does not match the "
                         f"latent dimension {m.latent_dim}")
    result = scipy.special.logsumexp(_component_log_densities(
        m, np.atleast_2d(z)),
                                     axis=-1)
    return float(result[0]) if z.ndim == 1 else result


def prior_sample_component(m: CvaeModel,
                           component: int,
                           rng: np.random.Generator,
                           size: Optional[int] = None) -> np.ndarray:
    """Draws latent goals from one component of the prior"""
    if not 0 <= component < m.num_components:
        raise ValueError(f"component {component} is not defined")
    shape = (m.latent_dim, ) if size is None else (size, m.latent_dim)
    return m.means[component] + m.stds[component] * rng.standard_normal(
        shape)


def prior_sample(m: CvaeModel,
                 rng: np.random.Generator,
                 size: Optional[int] = None) -> np.ndarray:
    """Draws latent goals from the mixture prior: a component is drawn
    according to the weights, then a point from this component.

    Return:
        numpy.ndarray: a latent goal ``(L,)``, or ``(size, L)``.
    """
    count = 1 if size is None else size
    components = rng.choice(m.num_components, size=count, p=m.weights)
    result = m.means[components] + m.stds[components] * rng.standard_normal(
        (count, m.latent_dim))
    return result[0] if size is None else result


def sample_goals(m: CvaeModel,
                 s_t: np.ndarray,
                 n: int,
                 rng: np.random.Generator,
                 per_mode: bool = False) -> np.ndarray:
    """Decodes goals proposed from a state.

    Args:
        m (pygti.goal_proposal.CvaeModel): Model
        s_t (numpy.ndarray): Current state ``(2,)``
        n (int): Number of goals
        rng (numpy.random.Generator): Random generator
        per_mode (bool, optional): Draw ``n`` goals from every component of
            the prior instead of ``n`` goals from the mixture.

    Return:
        numpy.ndarray: goals ``(n, 2)``, or ``(K, n, 2)`` if ``per_mode``.
    """
    s_t = np.broadcast_to(np.asarray(s_t, dtype=np.float64), (n, 2))
    if per_mode:
        return np.stack([
            decode(m, prior_sample_component(m, k, rng, n), s_t)
            for k in range(m.num_components)
        ])
    return decode(m, prior_sample(m, rng, n), s_t)


def kl_estimate(m: CvaeModel, mu: np.ndarray, sigma: np.ndarray,
                z_sampled: np.ndarray) -> Union[float, np.ndarray]:
    """Single sample estimate of ``KL(N(mu, sigma^2) || p)``:
    :math:`\\log N(z; \\mu, \\sigma^2) - \\log p(z)`.

    Return:
        float or numpy.ndarray: an estimate per latent goal.
    """
    mu = np.asarray(mu, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    z = np.asarray(z_sampled, dtype=np.float64)
    scaled = (z - mu) / sigma
    log_q = np.sum(-0.5 * scaled * scaled - np.log(sigma) - 0.5 * _LOG_2PI,
                   axis=-1)
    return log_q - prior_log_density(m, z)


def cvae_loss(
        m: CvaeModel, s_t: np.ndarray, s_g: np.ndarray, noise: np.ndarray,
        beta: float) -> Tuple[float, ParamStore, Dict[str, float]]:
    """Evaluates the training loss of a batch and its gradient.

    Args:
        m (pygti.goal_proposal.CvaeModel): Model
        s_t (numpy.ndarray): Current states ``(n, 2)``
        s_g (numpy.ndarray): States reached ``H`` steps later ``(n, 2)``
        noise (numpy.ndarray): Standard normal draws ``(n, L)`` of the
            reparameterization
        beta (float): Weight of the KL term

    Return:
        tuple: the mean loss, its gradient with respect to every parameter
        (float64) and the mean of each loss term.
    """
    params = m.params
    latent = m.latent_dim
    s_t = np.atleast_2d(np.asarray(s_t, dtype=np.float64))
    s_g = np.atleast_2d(np.asarray(s_g, dtype=np.float64))
    noise = np.atleast_2d(np.asarray(noise, dtype=np.float64))
    if len(s_t) == 0:
        raise ValueError("empty batch")
    if s_t.shape != s_g.shape or noise.shape != (len(s_t), latent):
        raise ValueError(f"batch shapes {s_t.shape}, {s_g.shape} and "
                         f"{noise.shape} are incompatible")
    count = len(s_t)

    # Posterior and reparameterized sample
    encoding, encoder_cache = m.encoder.forward(
        params, np.concatenate([s_g, s_t], axis=1))
    mu, raw = _split_encoding(encoding, latent)
    log_sigma = np.clip(raw, *LOG_STD_RANGE)
    sigma = np.exp(log_sigma)
    z = mu + sigma * noise

    # Reconstruction
    prediction, decoder_cache = m.decoder.forward(
        params, np.concatenate([z, s_t], axis=1))
    residual = s_g - prediction
    reconstruction = np.sum(residual * residual, axis=1)

    # KL estimate: (z - mu) / sigma is the noise itself
    log_q = np.sum(-0.5 * noise * noise - log_sigma - 0.5 * _LOG_2PI,
                   axis=1)
    components = _component_log_densities(m, z)
    log_p = scipy.special.logsumexp(components, axis=1)
    responsibilities = np.exp(components - log_p[:, np.newaxis])
    kl = log_q - log_p

    loss = float(np.mean(reconstruction + beta * kl))

    grads = params.zeros_like(np.float64)
    scale = 1.0 / count

    # Decoder
    grad_inputs = m.decoder.backward(params, decoder_cache,
                                     -2.0 * residual * scale, grads)
    grad_z = grad_inputs[:, :latent]

    # Prior: d log p / d z, d log p / d means, log_stds, logits
    stds = m.stds
    offset = z[:, np.newaxis, :] - m.means
    variance = stds * stds
    weighted = responsibilities[:, :, np.newaxis]
    grad_z = grad_z - beta * scale * np.sum(
        weighted * (-offset / variance), axis=1)
    grads["prior.means"] = -beta * scale * np.sum(
        weighted * offset / variance, axis=0)
    grads["prior.log_stds"] = -beta * scale * np.sum(
        weighted * (-1.0 + offset * offset / variance), axis=0)
    grads["prior.logits"] = -beta * scale * np.sum(
        responsibilities - m.weights, axis=0)

    # Encoder, through z = mu + sigma * noise and log q
    grad_mu = grad_z
    grad_log_sigma = grad_z * sigma * noise - beta * scale
    inside = (raw > LOG_STD_RANGE[0]) & (raw < LOG_STD_RANGE[1])
    m.encoder.backward(
        params, encoder_cache,
        np.concatenate([grad_mu, grad_log_sigma * inside], axis=1), grads)

    terms = dict(loss=loss,
                 reconstruction=float(np.mean(reconstruction)),
                 kl=float(np.mean(kl)))
    return loss, grads, terms


def cvae_train_step(m: CvaeModel,
                    s_t: np.ndarray,
                    s_g: np.ndarray,
                    opt: AdamState,
                    rng: np.random.Generator,
                    beta: Optional[float] = None) -> float:
    """Applies one Adam update to the encoder, the decoder and the prior.

    Args:
        m (pygti.goal_proposal.CvaeModel): Model, updated in place
        s_t (numpy.ndarray): Current states ``(n, 2)``
        s_g (numpy.ndarray): States reached ``H`` steps later ``(n, 2)``
        opt (pygti.core.AdamState): Optimizer state
        rng (numpy.random.Generator): Random generator
        beta (float, optional): Weight of the KL term. Defaults to the
            weight of the model configuration.

    Return:
        float: the mean loss of the batch before the update.

    Raises:
        TrainingDivergedError: if the loss is not finite. The model is left
            unchanged.
    """
    beta = m.config.beta if beta is None else beta
    s_t = np.atleast_2d(s_t)
    noise = rng.standard_normal((len(s_t), m.latent_dim))
    loss, grads, terms = cvae_loss(m, s_t, s_g, noise, beta)
    if not np.isfinite(loss) or not all(
            np.all(np.isfinite(item)) for _, item in grads.items()):
        raise TrainingDivergedError(opt.step_count, terms)
    adam_step(m.params, grads, opt)
    return loss
