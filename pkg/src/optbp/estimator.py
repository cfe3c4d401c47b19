"""scikit-learn compatible wrapper around the online trainer."""

import numbers

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils import check_random_state
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from . import network
from .forgetting import ForgettingState
from .gradients import GradientState
from .metrics import RunMetrics
from .network import NetworkConfig
from .trainer import DecayedRate, FixedRate, OptimizedRate, TrainerConfig, train_step


class OnlineBPRegressor(RegressorMixin, BaseEstimator):
    """One-hidden-layer tanh network trained sample by sample.

    Each sample triggers one recursive back-propagation step on the
    exponentially forgotten squared error. With ``learning_rate="optimized"``
    the step size is chosen in closed form to minimize the linearized
    post-update error; ``"fixed"`` and ``"decayed"`` use ``eta`` and
    ``eta0 / (1 + t * beta * eta0)`` respectively.

    Parameters
    ----------
    hidden_dim : int, default=10
    shape_factor : float, default=1.0
        ``u0`` in ``tanh(z / u0)``.
    output_activation : {"nonlinear", "linear"}, default="nonlinear"
        With ``"nonlinear"`` predictions lie in (-1, 1); scale targets first.
    learning_rate : {"optimized", "fixed", "decayed"}, default="optimized"
    eta, eta0, beta : float
        Rates for the fixed and decayed schedules.
    forgetting : {"fixed", "startup", "adaptive", "combined"}, default="fixed"
    forgetting_factor : float, default=0.001
        Constant factor used when ``forgetting="fixed"``.
    lambda1, tau_f, lambda_min : float
        Startup ramp start, time constant and lower clamp of the factor.
    init_scale : float, default=0.1
        Initial weights are uniform on ``[-init_scale, init_scale]``.
    n_passes : int, default=1
        Sequential passes over the data in ``fit``.
    clamp_eta_nonnegative : bool, default=False
    eta_guard : float, default=1e-12
    random_state : int, RandomState instance or None
        Seed of the weight initialization.

    Attributes
    ----------
    W_, V_ : ndarray
        Input-to-hidden and hidden-to-output weights, bias in column/row 0.
    eta_history_, lambda_history_ : ndarray
        Rate and forgetting factor used at every training step so far.
    rmse_ : float
        Running mean of summed squared errors over all training steps.
    n_features_in_, n_outputs_ : int
    """

    def __init__(self, hidden_dim=10, shape_factor=1.0, output_activation="nonlinear",
                 learning_rate="optimized", eta=0.4, eta0=1.0, beta=0.001,
                 forgetting="fixed", forgetting_factor=0.001, lambda1=0.5, tau_f=100.0,
                 lambda_min=0.001, init_scale=0.1, n_passes=1, clamp_eta_nonnegative=False,
                 eta_guard=1e-12, random_state=None):
        self.hidden_dim = hidden_dim
        self.shape_factor = shape_factor
        self.output_activation = output_activation
        self.learning_rate = learning_rate
        self.eta = eta
        self.eta0 = eta0
        self.beta = beta
        self.forgetting = forgetting
        self.forgetting_factor = forgetting_factor
        self.lambda1 = lambda1
        self.tau_f = tau_f
        self.lambda_min = lambda_min
        self.init_scale = init_scale
        self.n_passes = n_passes
        self.clamp_eta_nonnegative = clamp_eta_nonnegative
        self.eta_guard = eta_guard
        self.random_state = random_state

    def _rate(self):
        if self.learning_rate == "optimized":
            return OptimizedRate()
        if self.learning_rate == "fixed":
            return FixedRate(float(self.eta))
        if self.learning_rate == "decayed":
            return DecayedRate(float(self.eta0), float(self.beta))
        raise ValueError(f"learning_rate must be 'optimized', 'fixed' or 'decayed', got {self.learning_rate!r}")

    def _trainer_config(self, n_features, n_outputs):
        if not isinstance(self.n_passes, numbers.Integral) or self.n_passes < 1:
            raise ValueError(f"n_passes must be a positive integer, got {self.n_passes!r}")
        net = NetworkConfig(n_features, int(self.hidden_dim), n_outputs,
                            float(self.shape_factor), self.output_activation)
        forget = ForgettingState(mode=self.forgetting, lambda_fixed=float(self.forgetting_factor),
                                 lambda1=float(self.lambda1), tau_f=float(self.tau_f),
                                 lambda_min=float(self.lambda_min))
        return TrainerConfig(network=net, rate=self._rate(), forgetting=forget,
                             init_scale=float(self.init_scale),
                             clamp_eta_nonnegative=bool(self.clamp_eta_nonnegative),
                             eta_guard=float(self.eta_guard))

    def _initialize(self, n_features, n_outputs):
        self._config = self._trainer_config(n_features, n_outputs)
        seed = check_random_state(self.random_state).randint(0, 2**31 - 1)
        self._net = network.init_weights(self._config.network, seed, self._config.init_scale)
        self._grads = GradientState.zeros(self._config.network)
        self._forget = self._config.forgetting
        self._metrics = RunMetrics()
        self._eta = []
        self._lam = []
        self.n_features_in_ = n_features
        self.n_outputs_ = n_outputs
        self._y_1d = False

    def _consume(self, X, Y):
        net, grads, forget, run_metrics = self._net, self._grads, self._forget, self._metrics
        for x, y in zip(X, Y):
            net, grads, forget, run_metrics, record = train_step(
                net, grads, forget, run_metrics, x, y, self._config)
            if not net.is_finite():
                raise FloatingPointError(f"training diverged at step {record.t}")
            self._eta.append(record.eta)
            self._lam.append(record.lam)
        self._net, self._grads, self._forget, self._metrics = net, grads, forget, run_metrics
        self._publish()

    def _publish(self):
        self.W_ = self._net.W
        self.V_ = self._net.V
        self.eta_history_ = np.asarray(self._eta)
        self.lambda_history_ = np.asarray(self._lam)
        self.rmse_ = self._metrics.rmse

    def _check_n_features(self, X):
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, but {type(self).__name__} is expecting "
                f"{self.n_features_in_} features as input"
            )

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.target_tags.multi_output = True
        return tags

    def _validate_xy(self, X, y):
        X, y = check_X_y(X, y, multi_output=True, y_numeric=True, dtype=np.float64)
        y_1d = y.ndim == 1
        Y = y.reshape(-1, 1) if y_1d else y
        return X, Y, y_1d

    def fit(self, X, y):
        X, Y, y_1d = self._validate_xy(X, y)
        self._initialize(X.shape[1], Y.shape[1])
        self._y_1d = y_1d
        for _ in range(self.n_passes):
            self._consume(X, Y)
        return self

    def partial_fit(self, X, y):
        """Continue online training on more samples, initializing on the first call."""
        X, Y, y_1d = self._validate_xy(X, y)
        if not hasattr(self, "W_"):
            self._initialize(X.shape[1], Y.shape[1])
            self._y_1d = y_1d
        else:
            self._check_n_features(X)
            if Y.shape[1] != self.n_outputs_:
                raise ValueError(f"y has {Y.shape[1]} outputs, but {type(self).__name__} "
                                 f"is expecting {self.n_outputs_} outputs")
        self._consume(X, Y)
        return self

    def predict(self, X):
        check_is_fitted(self, "W_")
        X = check_array(X, dtype=np.float64)
        self._check_n_features(X)
        out = network.predict(self._config.network, self._net, X)
        return out.ravel() if self._y_1d else out
