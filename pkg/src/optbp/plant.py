"""Two-input, two-output nonlinear benchmark plant with measurement noise."""

import math
from dataclasses import dataclass, replace

import numpy as np

from . import rng
from .exceptions import SimulationDivergedError

PERIOD = 250


@dataclass(frozen=True)
class PlantState:
    y1: float = 0.0
    y2: float = 0.0
    t: int = 0
    noise_seed: int = 0
    noise_power: float = 0.0
    draws: int = 0  # noise pairs consumed so far


def excitation(t):
    phase = 2.0 * math.pi * t / PERIOD
    return math.sin(phase), math.cos(phase)


def plant_step(state, u1, u2, noise=(0.0, 0.0)):
    y1, y2 = state.y1, state.y2
    den = 2.0 + y2 * y2
    n1 = (0.8 * y1**3 + u1 * u1 * u2) / den + noise[0]
    n2 = (y1 - y1 * y2 + (u1 - 0.5) * (u2 + 0.8)) / den + noise[1]
    if not (math.isfinite(n1) and math.isfinite(n2)):
        raise SimulationDivergedError(f"plant output became non-finite at t={state.t}")
    return replace(state, y1=n1, y2=n2, t=state.t + 1)


def sample_noise(state):
    """Draw one pair of independent zero-mean Gaussians of variance ``noise_power``."""
    if state.noise_power == 0.0:
        return (0.0, 0.0), replace(state, draws=state.draws + 1)
    pair = rng.gaussian_pairs(state.noise_seed, 1, offset=state.draws)[0]
    sigma = math.sqrt(state.noise_power)
    return (sigma * float(pair[0]), sigma * float(pair[1])), replace(state, draws=state.draws + 1)


def noise_block(state, n):
    """``n`` consecutive noise pairs as an ``(n, 2)`` array; same stream as ``sample_noise``."""
    if state.noise_power == 0.0:
        return np.zeros((n, 2)), replace(state, draws=state.draws + n)
    pairs = math.sqrt(state.noise_power) * rng.gaussian_pairs(state.noise_seed, n, offset=state.draws)
    return pairs, replace(state, draws=state.draws + n)


def build_regressor(u1, u2, state):
    return np.array([u1, u2, state.y1, state.y2])
