"""Online recursive back-propagation with an optimized adaptive learning rate."""

from .estimator import OnlineBPRegressor
from .exceptions import (
    ConfigError,
    DegenerateMomentumError,
    InvalidArgumentError,
    InvalidStateError,
    OptBPError,
    SimulationDivergedError,
    TrainingDivergedError,
)
from .forgetting import ForgettingState
from .network import NetworkConfig, NetworkState, forward, init_weights
from .trainer import DecayedRate, FixedRate, OptimizedRate, TrainerConfig, run_identification

__all__ = [
    "OnlineBPRegressor",
    "ConfigError",
    "DegenerateMomentumError",
    "InvalidArgumentError",
    "InvalidStateError",
    "OptBPError",
    "SimulationDivergedError",
    "TrainingDivergedError",
    "ForgettingState",
    "NetworkConfig",
    "NetworkState",
    "forward",
    "init_weights",
    "DecayedRate",
    "FixedRate",
    "OptimizedRate",
    "TrainerConfig",
    "run_identification",
]

__version__ = "0.1.0"
