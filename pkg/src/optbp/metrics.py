"""Running error metrics and the projection-matrix convergence checks."""

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidArgumentError


@dataclass(frozen=True)
class RunMetrics:
    """Running error statistics.

    ``rmse`` follows the usual identification-literature definition: the
    running mean over samples of the *summed* squared output errors. No
    square root is taken despite the name. ``step`` is the index of the last
    sample folded in, -1 before any sample.
    """

    step: int = -1
    e2: float = 0.0
    rmse_accum: float = 0.0
    rmse: float = 0.0
    eta_used: float = 0.0
    lambda_used: float = 1.0


def update_metrics(prev, e, eta, lam):
    e = np.asarray(e, dtype=float)
    energy = float(e @ e)
    step = prev.step + 1
    accum = prev.rmse_accum + energy
    return RunMetrics(step, 0.5 * energy, accum, accum / (step + 1), float(eta), float(lam))


def projection_matrix(d):
    """``I - d d' / d'd``: orthogonal projector onto the complement of ``d``."""
    d = np.asarray(d, dtype=float).ravel()
    dd = float(d @ d)
    if not dd > 0.0:
        raise InvalidArgumentError("projection direction must be nonzero")
    M = np.eye(d.shape[0]) - np.outer(d, d) / dd
    return 0.5 * (M + M.T)


def spectral_norm_check(M, iterations=50, tol=1e-10):
    """Largest singular value of ``M`` by power iteration on ``M'M``."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidArgumentError("matrix must be square")
    n = M.shape[0]
    A = M.T @ M
    if not np.any(A):
        return 0.0
    # deterministic start with a component along every axis
    v = np.linspace(1.0, 2.0, n)
    v /= np.linalg.norm(v)
    mu = 0.0
    for _ in range(iterations):
        w = A @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v_next = w / norm
        mu_next = float(v_next @ A @ v_next)
        converged = abs(mu_next - mu) <= tol * max(1.0, abs(mu_next))
        v, mu = v_next, mu_next
        if converged:
            break
    return float(np.sqrt(max(mu, 0.0)))


@dataclass(frozen=True)
class MonotonicityReport:
    count: int
    locations: list
    n_transitions: int

    @property
    def fraction(self):
        return self.count / self.n_transitions if self.n_transitions else 0.0


def monotonicity_monitor(history, tolerance=0.0):
    """Find increases ``e2[t+1] > e2[t] + tolerance``; locations are the ``t`` indices."""
    history = np.asarray(history, dtype=float)
    if history.size == 0:
        raise InvalidArgumentError("history must be nonempty")
    rises = np.flatnonzero(history[1:] > history[:-1] + tolerance)
    return MonotonicityReport(int(rises.size), rises.tolist(), int(history.size - 1))
