"""Closed-form optimal learning rate and the baseline schedules.

Linearizing the network output around the current weights gives the
one-step error prediction

    e(t+1) ~= e(t) + eta * lam * eps(t-1) - eta * zeta(t) e(t)

where ``eps`` couples the gradient history to the current sample and
``zeta`` is a symmetric PSD ``ON x ON`` matrix built from the current
sample alone. The rate minimizing ``1/2 |e(t+1)|^2`` is a 1-D least-squares
solution with direction ``d = zeta e - lam eps``.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidArgumentError

DEFAULT_GUARD = 1e-12


@dataclass(frozen=True)
class RateRecord:
    epsilon: np.ndarray
    zeta: np.ndarray
    eta_star: float
    denom: float
    clamped: bool


def compute_epsilon(trace, grad_v_prev, grad_w_prev, v_bar):
    """``F' (Gv' S + Vbar' S' Gw x)`` using last step's gradient matrices."""
    grad_v_prev = np.asarray(grad_v_prev, dtype=float)
    grad_w_prev = np.asarray(grad_w_prev, dtype=float)
    v_bar = np.asarray(v_bar, dtype=float)
    hn, on, n_in = trace.s_prime.shape[0], trace.y_hat.shape[0], trace.x_aug.shape[0]
    if grad_v_prev.shape != (hn + 1, on) or grad_w_prev.shape != (hn, n_in) or v_bar.shape != (hn, on):
        raise InvalidArgumentError("gradient or v_bar shapes do not match the trace")
    inner = grad_v_prev.T @ trace.s_vec + v_bar.T @ (trace.s_prime * (grad_w_prev @ trace.x_aug))
    return trace.f_prime * inner


def compute_zeta(trace, v_bar):
    v_bar = np.asarray(v_bar, dtype=float)
    hn, on = trace.s_prime.shape[0], trace.y_hat.shape[0]
    if v_bar.shape != (hn, on):
        raise InvalidArgumentError(f"v_bar must have shape ({hn}, {on}), got {v_bar.shape}")
    scaled = trace.s_prime[:, None] * v_bar
    core = (trace.s_vec @ trace.s_vec) * np.eye(on) + (trace.x_aug @ trace.x_aug) * (scaled.T @ scaled)
    zeta = trace.f_prime[:, None] * core * trace.f_prime[None, :]
    # exact symmetry; the two triangles can differ in the last ulp otherwise
    return 0.5 * (zeta + zeta.T)


def _finite_vec(name, a):
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise InvalidArgumentError(f"{name} must be finite")
    return a


def optimal_eta(zeta, e, lam, epsilon, guard=DEFAULT_GUARD):
    zeta = _finite_vec("zeta", zeta)
    e = _finite_vec("e", e)
    epsilon = _finite_vec("epsilon", epsilon)
    if not np.isfinite(lam):
        raise InvalidArgumentError("lambda must be finite")
    if not guard > 0:
        raise InvalidArgumentError(f"guard must be positive, got {guard!r}")
    on = e.shape[0]
    if zeta.shape != (on, on) or epsilon.shape != (on,):
        raise InvalidArgumentError("zeta, e and epsilon dimensions disagree")

    d = zeta @ e - lam * epsilon
    denom = float(d @ d)
    if denom <= guard:
        return RateRecord(epsilon, zeta, 0.0, denom, True)
    return RateRecord(epsilon, zeta, float(d @ e) / denom, denom, False)


def predicted_error(e, eta, zeta, lam, epsilon):
    e = np.asarray(e, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    epsilon = np.asarray(epsilon, dtype=float)
    on = e.shape[0]
    if zeta.shape != (on, on) or epsilon.shape != (on,):
        raise InvalidArgumentError("zeta, e and epsilon dimensions disagree")
    return e + eta * lam * epsilon - eta * (zeta @ e)


def decayed_eta(eta0, beta, t):
    """O(1/t) schedule ``eta0 / (1 + t * beta * eta0)``."""
    if not (eta0 > 0 and beta > 0):
        raise InvalidArgumentError("eta0 and beta must be positive")
    if t < 0:
        raise InvalidArgumentError("t must be nonnegative")
    return eta0 / (1.0 + t * beta * eta0)
