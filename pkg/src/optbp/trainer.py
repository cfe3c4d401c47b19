"""Per-sample online training loop and the plant identification driver."""

from dataclasses import dataclass, field

import numpy as np

from . import forgetting, gradients, learning_rate, metrics, network, plant
from .exceptions import InvalidArgumentError, TrainingDivergedError
from .forgetting import ForgettingState
from .gradients import GradientState
from .metrics import RunMetrics
from .network import NetworkConfig, NetworkState


@dataclass(frozen=True)
class FixedRate:
    eta: float

    kind = "fixed"


@dataclass(frozen=True)
class DecayedRate:
    eta0: float
    beta: float

    kind = "decayed"

    def __post_init__(self):
        if not (self.eta0 > 0 and self.beta > 0):
            raise InvalidArgumentError("decayed rate needs positive eta0 and beta")


@dataclass(frozen=True)
class OptimizedRate:
    kind = "optimized"


@dataclass(frozen=True)
class TrainerConfig:
    network: NetworkConfig = field(default_factory=lambda: NetworkConfig(4, 10, 2))
    rate: object = field(default_factory=OptimizedRate)
    forgetting: ForgettingState = field(default_factory=ForgettingState)
    steps: int = 5000
    seed: int = 0
    init_scale: float = 0.1
    noise_power: float = 0.001
    noise_seed: int | None = None  # None: use ``seed``
    clamp_eta_nonnegative: bool = False
    eta_guard: float = learning_rate.DEFAULT_GUARD

    def __post_init__(self):
        if int(self.steps) != self.steps or self.steps < 1:
            raise InvalidArgumentError(f"steps must be a positive integer, got {self.steps!r}")
        if not self.eta_guard > 0:
            raise InvalidArgumentError(f"eta_guard must be positive, got {self.eta_guard!r}")
        if not self.init_scale > 0:
            raise InvalidArgumentError(f"init_scale must be positive, got {self.init_scale!r}")
        if not self.noise_power >= 0:
            raise InvalidArgumentError(f"noise_power must be nonnegative, got {self.noise_power!r}")
        if not isinstance(self.rate, (FixedRate, DecayedRate, OptimizedRate)):
            raise InvalidArgumentError(f"unknown rate strategy {self.rate!r}")

    @property
    def effective_noise_seed(self):
        return self.seed if self.noise_seed is None else self.noise_seed


@dataclass(frozen=True)
class StepRecord:
    t: int
    e: tuple
    eta: float
    lam: float
    e2: float
    rmse: float
    clamped: bool


def _select_eta(config, trace, grads, v_bar, e, lam, t):
    rate = config.rate
    if isinstance(rate, FixedRate):
        return rate.eta, False
    if isinstance(rate, DecayedRate):
        return learning_rate.decayed_eta(rate.eta0, rate.beta, t), False
    eps = learning_rate.compute_epsilon(trace, grads.grad_v, grads.grad_w, v_bar)
    zeta = learning_rate.compute_zeta(trace, v_bar)
    rec = learning_rate.optimal_eta(zeta, e, lam, eps, config.eta_guard)
    eta = rec.eta_star
    if config.clamp_eta_nonnegative and eta < 0.0:
        eta = 0.0
    return eta, rec.clamped


def train_step(net, grads, forget, run_metrics, x, y, config):
    """One online update on the sample ``(x, y)``.

    Order: forward pass, error, forgetting factor, learning rate (the optimized
    rate uses last step's gradients with this sample's trace), gradient
    recursion, weight update, metrics. Returns the advanced
    ``(net, grads, forget, run_metrics, record)``.
    """
    t = run_metrics.step + 1
    trace = network.forward(config.network, net, x)
    e = np.asarray(y, dtype=float) - trace.y_hat
    forget, lam = forgetting.combined_lambda(forget, e)
    v_bar = gradients.extract_v_bar(net.V)

    eta, clamped = _select_eta(config, trace, grads, v_bar, e, lam, t)

    grad_v = gradients.grad_v_step(grads.grad_v, lam, trace, e)
    grad_w = gradients.grad_w_step(grads.grad_w, lam, trace, v_bar, e)
    net, delta_v, delta_w = gradients.apply_update(net, eta, grad_v, grad_w)
    grads = GradientState(grad_v, grad_w, delta_v, delta_w, grads.prev_eta if clamped else eta)

    run_metrics = metrics.update_metrics(run_metrics, e, eta, lam)
    record = StepRecord(t, tuple(float(v) for v in e), float(eta), float(lam),
                        run_metrics.e2, run_metrics.rmse, bool(clamped))
    return net, grads, forget, run_metrics, record


@dataclass(frozen=True)
class TrainerState:
    """Everything a run carries between samples. Plain values; safe to pickle."""

    net: NetworkState
    grads: GradientState
    forget: ForgettingState
    metrics: RunMetrics
    plant: plant.PlantState


def initial_state(config):
    net = network.init_weights(config.network, config.seed, config.init_scale)
    return TrainerState(
        net=net,
        grads=GradientState.zeros(config.network),
        forget=config.forgetting,
        metrics=RunMetrics(),
        plant=plant.PlantState(noise_seed=config.effective_noise_seed, noise_power=config.noise_power),
    )


def _check_plant_dims(config):
    if config.network.in_dim != 4 or config.network.out_dim != 2:
        raise InvalidArgumentError("plant identification needs in_dim=4 and out_dim=2")


def identification_steps(config, state=None, steps=None):
    """Yield ``(state, record)`` after every sample of the plant identification run.

    Starting from ``state`` (default: a fresh run) it continues for ``steps``
    samples (default: up to ``config.steps`` in total).
    """
    _check_plant_dims(config)
    if state is None:
        state = initial_state(config)
    if steps is None:
        steps = config.steps - (state.metrics.step + 1)
    net, grads, forget, run_metrics, pl = state.net, state.grads, state.forget, state.metrics, state.plant
    for _ in range(steps):
        u1, u2 = plant.excitation(pl.t)
        x = plant.build_regressor(u1, u2, pl)
        noise, pl = plant.sample_noise(pl)
        pl = plant.plant_step(pl, u1, u2, noise)
        y = (pl.y1, pl.y2)
        net, grads, forget, run_metrics, record = train_step(net, grads, forget, run_metrics, x, y, config)
        if not net.is_finite():
            raise TrainingDivergedError(record.t)
        yield TrainerState(net, grads, forget, run_metrics, pl), record


def run_identification(config, return_state=False):
    """Run the whole identification experiment and return its step records."""
    records = []
    state = None
    try:
        for state, record in identification_steps(config):
            records.append(record)
    except TrainingDivergedError as exc:
        raise TrainingDivergedError(exc.step, records) from None
    if return_state:
        return records, state
    return records

