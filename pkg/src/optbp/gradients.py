"""Exponentially forgotten gradient recursions and steepest-descent updates.

The forgotten cost is ``E(t) = 1/2 * sum_j lam**(t-j) * e(j)' e(j)``; its
gradients obey ``G(t) = lam * G(t-1) - (current single-sample term)``, so only
the previous gradient matrices need to be carried between samples.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateMomentumError, InvalidArgumentError
from .network import NetworkState

MOMENTUM_EPS = 1e-12


@dataclass(frozen=True)
class GradientState:
    grad_v: np.ndarray
    grad_w: np.ndarray
    prev_delta_v: np.ndarray
    prev_delta_w: np.ndarray
    prev_eta: float = 1.0

    @classmethod
    def zeros(cls, config):
        return cls(
            grad_v=np.zeros(config.v_shape),
            grad_w=np.zeros(config.w_shape),
            prev_delta_v=np.zeros(config.v_shape),
            prev_delta_w=np.zeros(config.w_shape),
            prev_eta=1.0,
        )


def _as_error(e, n):
    e = np.asarray(e, dtype=float)
    if e.shape != (n,):
        raise InvalidArgumentError(f"error vector must have shape ({n},), got {e.shape}")
    return e


def extract_v_bar(V):
    """Hidden-to-output weights without the bias row."""
    return np.asarray(V)[1:]


def output_delta(trace, e):
    """Per-output back-propagated error ``e * f'``."""
    return _as_error(e, trace.y_hat.shape[0]) * trace.f_prime


def v_term(trace, e):
    """Single-sample descent direction for ``V``: ``S (e * f')'``."""
    return np.outer(trace.s_vec, output_delta(trace, e))


def w_term(trace, v_bar, e):
    """Single-sample descent direction for ``W``: ``diag(s') Vbar diag(f') e x'``."""
    v_bar = np.asarray(v_bar, dtype=float)
    hn, on = trace.s_prime.shape[0], trace.y_hat.shape[0]
    if v_bar.shape != (hn, on):
        raise InvalidArgumentError(f"v_bar must have shape ({hn}, {on}), got {v_bar.shape}")
    hidden = trace.s_prime * (v_bar @ output_delta(trace, e))
    return np.outer(hidden, trace.x_aug)


def grad_v_step(grad_v_prev, lam, trace, e):
    grad_v_prev = np.asarray(grad_v_prev, dtype=float)
    term = v_term(trace, e)
    if grad_v_prev.shape != term.shape:
        raise InvalidArgumentError(f"grad_v must have shape {term.shape}, got {grad_v_prev.shape}")
    return lam * grad_v_prev - term


def grad_w_step(grad_w_prev, lam, trace, v_bar, e):
    grad_w_prev = np.asarray(grad_w_prev, dtype=float)
    term = w_term(trace, v_bar, e)
    if grad_w_prev.shape != term.shape:
        raise InvalidArgumentError(f"grad_w must have shape {term.shape}, got {grad_w_prev.shape}")
    return lam * grad_w_prev - term


def apply_update(state, eta, grad_v, grad_w):
    """Steepest-descent step. Returns ``(new_state, delta_v, delta_w)``."""
    if not np.isfinite(eta):
        raise InvalidArgumentError(f"learning rate must be finite, got {eta!r}")
    grad_v = np.asarray(grad_v, dtype=float)
    grad_w = np.asarray(grad_w, dtype=float)
    if grad_v.shape != state.V.shape or grad_w.shape != state.W.shape:
        raise InvalidArgumentError("gradient shapes do not match the weights")
    delta_v = -eta * grad_v
    delta_w = -eta * grad_w
    return NetworkState(state.W + delta_w, state.V + delta_v), delta_v, delta_w


def momentum_form_update(state, grads, eta, lam, trace, e):
    """Equivalent update written as gradient step plus a momentum term.

    The momentum coefficient is ``eta / prev_eta * lam`` and is shared by both
    weight matrices. Raises DegenerateMomentumError if ``prev_eta`` is
    (numerically) zero; callers should then use the direct recursion.
    """
    if abs(grads.prev_eta) < MOMENTUM_EPS:
        raise DegenerateMomentumError(f"previous learning rate {grads.prev_eta!r} is too close to zero")
    if not np.isfinite(eta):
        raise InvalidArgumentError(f"learning rate must be finite, got {eta!r}")
    coeff = eta / grads.prev_eta * lam
    delta_v = eta * v_term(trace, e) + coeff * grads.prev_delta_v
    delta_w = eta * w_term(trace, extract_v_bar(state.V), e) + coeff * grads.prev_delta_w
    return NetworkState(state.W + delta_w, state.V + delta_v), delta_v, delta_w
