"""Three-layer feed-forward network: activations, weights and the forward pass.

Biases are folded into the weight matrices. ``W`` has shape
``(hidden_dim, in_dim + 1)`` with column 0 multiplying a constant unit
input, and ``V`` has shape ``(hidden_dim + 1, out_dim)`` with row 0
multiplying a constant unit hidden output.
"""

from dataclasses import dataclass

import numpy as np

from . import rng
from .exceptions import InvalidArgumentError

NONLINEAR = "nonlinear"
LINEAR = "linear"
OUTPUT_ACTIVATIONS = (NONLINEAR, LINEAR)


@dataclass(frozen=True)
class NetworkConfig:
    in_dim: int
    hidden_dim: int
    out_dim: int
    shape_factor: float = 1.0
    output_activation: str = NONLINEAR

    def __post_init__(self):
        for name in ("in_dim", "hidden_dim", "out_dim"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise InvalidArgumentError(f"{name} must be a positive integer, got {value!r}")
        if not (np.isfinite(self.shape_factor) and self.shape_factor > 0):
            raise InvalidArgumentError(f"shape_factor must be positive, got {self.shape_factor!r}")
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise InvalidArgumentError(
                f"output_activation must be one of {OUTPUT_ACTIVATIONS}, got {self.output_activation!r}"
            )

    @property
    def w_shape(self):
        return (self.hidden_dim, self.in_dim + 1)

    @property
    def v_shape(self):
        return (self.hidden_dim + 1, self.out_dim)


@dataclass(frozen=True)
class NetworkState:
    W: np.ndarray
    V: np.ndarray

    def check(self, config):
        if self.W.shape != config.w_shape or self.V.shape != config.v_shape:
            raise InvalidArgumentError(
                f"weight shapes W{self.W.shape}, V{self.V.shape} do not match "
                f"config W{config.w_shape}, V{config.v_shape}"
            )

    def is_finite(self):
        return bool(np.all(np.isfinite(self.W)) and np.all(np.isfinite(self.V)))

    def copy(self):
        return NetworkState(self.W.copy(), self.V.copy())


@dataclass(frozen=True)
class ForwardTrace:
    """Every intermediate of one forward pass that the gradient recursions need."""

    x_aug: np.ndarray  # (IN+1,), x_aug[0] == 1
    net_hidden: np.ndarray  # (HN,)
    s_vec: np.ndarray  # (HN+1,), s_vec[0] == 1
    s_prime: np.ndarray  # (HN,), diagonal of the hidden Jacobian
    net_out: np.ndarray  # (ON,)
    y_hat: np.ndarray  # (ON,)
    f_prime: np.ndarray  # (ON,), diagonal of the output Jacobian


def _check_u0(u0):
    if not (np.isfinite(u0) and u0 > 0):
        raise InvalidArgumentError(f"shape factor must be positive and finite, got {u0!r}")


def _check_s(s_val):
    s_val = np.asarray(s_val, dtype=float)
    if np.any(~np.isfinite(s_val)) or np.any(np.abs(s_val) > 1.0):
        raise InvalidArgumentError("activation value must satisfy |s| <= 1")
    return s_val


def activation(z, u0=1.0):
    """Symmetric hyperbolic tangent ``tanh(z / u0)``. Works elementwise on arrays."""
    _check_u0(u0)
    z = np.asarray(z, dtype=float)
    if np.any(~np.isfinite(z)):
        raise InvalidArgumentError("activation input must be finite")
    out = np.tanh(z / u0)
    return float(out) if out.ndim == 0 else out


def activation_deriv(s_val, u0=1.0):
    """Slope of the activation expressed through its output ``s``."""
    _check_u0(u0)
    s_val = _check_s(s_val)
    out = (1.0 - s_val * s_val) / u0
    return float(out) if out.ndim == 0 else out


def activation_second_deriv(s_val, u0=1.0):
    _check_u0(u0)
    s_val = _check_s(s_val)
    out = -(2.0 / (u0 * u0)) * s_val * (1.0 - s_val * s_val)
    return float(out) if out.ndim == 0 else out


def forward(config, state, x):
    """Run the network on one input vector and return the full trace."""
    state.check(config)
    x = np.asarray(x, dtype=float)
    if x.shape != (config.in_dim,):
        raise InvalidArgumentError(f"expected input of shape ({config.in_dim},), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError("input must be finite")
    u0 = config.shape_factor

    x_aug = np.empty(config.in_dim + 1)
    x_aug[0] = 1.0
    x_aug[1:] = x
    net_hidden = state.W @ x_aug
    s_hidden = np.tanh(net_hidden / u0)
    s_vec = np.empty(config.hidden_dim + 1)
    s_vec[0] = 1.0
    s_vec[1:] = s_hidden
    s_prime = (1.0 - s_hidden * s_hidden) / u0

    net_out = s_vec @ state.V
    if config.output_activation == NONLINEAR:
        y_hat = np.tanh(net_out / u0)
        f_prime = (1.0 - y_hat * y_hat) / u0
    else:
        y_hat = net_out.copy()
        f_prime = np.ones(config.out_dim)
    return ForwardTrace(x_aug, net_hidden, s_vec, s_prime, net_out, y_hat, f_prime)


def predict(config, state, X):
    """Vectorized forward pass over the rows of ``X``; returns only the outputs."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    X_aug = np.hstack([np.ones((X.shape[0], 1)), X])
    S = np.tanh((X_aug @ state.W.T) / config.shape_factor)
    S_aug = np.hstack([np.ones((X.shape[0], 1)), S])
    net_out = S_aug @ state.V
    if config.output_activation == NONLINEAR:
        return np.tanh(net_out / config.shape_factor)
    return net_out


def init_weights(config, seed, scale=0.1):
    """Draw every weight i.i.d. uniform on ``[-scale, scale]`` from a seeded stream."""
    if not (np.isfinite(scale) and scale > 0):
        raise InvalidArgumentError(f"scale must be positive, got {scale!r}")
    n_w = config.w_shape[0] * config.w_shape[1]
    W = rng.uniform(seed, config.w_shape, -scale, scale)
    V = rng.uniform(seed, config.v_shape, -scale, scale, offset=n_w)
    return NetworkState(W, V)
