"""Variable forgetting factors.

Two mechanisms, usable alone or multiplied together:

* a startup ramp ``lam1(t) = a * lam1(t-1) + 1 - a`` with ``a = exp(-1/tau)``
  that begins small and rises geometrically towards 1;
* an adaptive factor ``lam2(t) = s_f(t-1) / s_f(t)`` where ``s_f`` is an
  exponentially smoothed error energy, so a growing error shortens memory.

The value handed to the gradient recursion is always clamped into
``[lambda_min, 1]``.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import InvalidArgumentError, InvalidStateError

FIXED = "fixed"
STARTUP = "startup"
ADAPTIVE = "adaptive"
COMBINED = "combined"
MODES = (FIXED, STARTUP, ADAPTIVE, COMBINED)


@dataclass(frozen=True)
class ForgettingState:
    mode: str = FIXED
    lambda_fixed: float = 0.98
    lambda1: float = 0.5
    s_f: float | None = None  # None: seeded from the first sample's energy
    tau_f: float = 100.0
    tau_f2: float | None = None  # time constant of the adaptive factor; None shares tau_f
    lambda_min: float = 0.1

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidArgumentError(f"forgetting mode must be one of {MODES}, got {self.mode!r}")
        if not 0.0 < self.lambda_min < 1.0:
            raise InvalidArgumentError(f"lambda_min must lie in (0, 1), got {self.lambda_min!r}")
        if not 0.0 < self.lambda_fixed <= 1.0:
            raise InvalidArgumentError(f"fixed lambda must lie in (0, 1], got {self.lambda_fixed!r}")
        if not 0.0 < self.lambda1 <= 1.0:
            raise InvalidArgumentError(f"lambda1 must lie in (0, 1], got {self.lambda1!r}")
        if not self.tau_f > 1.0 or (self.tau_f2 is not None and not self.tau_f2 > 1.0):
            raise InvalidArgumentError("time constants must exceed 1")
        if self.s_f is not None and not self.s_f > 0.0:
            raise InvalidArgumentError(f"s_f must be positive, got {self.s_f!r}")

    @property
    def alpha(self):
        return math.exp(-1.0 / self.tau_f)

    @property
    def adaptive_tau(self):
        return self.tau_f if self.tau_f2 is None else self.tau_f2


def startup_lambda_step(state):
    a = state.alpha
    lam1 = a * state.lambda1 + 1.0 - a
    return replace(state, lambda1=lam1), lam1


def adaptive_lambda_step(state, e):
    e = np.asarray(e, dtype=float)
    energy = float(e @ e)
    old = state.s_f
    if old is None:
        old = energy if energy > 0.0 else 1.0
    tau = state.adaptive_tau
    new = (tau - 1.0) / tau * old + energy / tau
    if not new > 0.0:
        raise InvalidStateError("smoothed error energy collapsed to zero")
    return replace(state, s_f=new), old / new


def _clamp(state, lam):
    return min(max(lam, state.lambda_min), 1.0)


def combined_lambda(state, e):
    """Advance the forgetting state by one sample and return ``(state, lambda)``."""
    if state.mode == FIXED:
        return state, _clamp(state, state.lambda_fixed)
    if state.mode == STARTUP:
        state, lam1 = startup_lambda_step(state)
        return state, _clamp(state, lam1)
    if state.mode == ADAPTIVE:
        state, lam2 = adaptive_lambda_step(state, e)
        return state, _clamp(state, lam2)
    state, lam1 = startup_lambda_step(state)
    state, lam2 = adaptive_lambda_step(state, e)
    return state, _clamp(state, lam1 * lam2)
