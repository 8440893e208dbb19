"""Weighted Monte Carlo estimators of minimal-martingale-measure expectations."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import BnsModel, ModelParams
from .paths import simulate_terminal


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n: int

    @classmethod
    def from_samples(cls, summands):
        """Mean and standard error of i.i.d. per-path summands (weight already applied)."""
        x = np.asarray(summands, dtype=float)
        n = x.shape[-1]
        if n < 2:
            raise ValueError("need at least two samples")
        mean = float(np.mean(x))
        se = float(np.std(x, ddof=1) / math.sqrt(n))
        return cls(mean, se, n)

    def __sub__(self, other):
        """Difference of two estimates on independent paths (errors add in quadrature)."""
        return McEstimate(self.mean - other.mean, math.hypot(self.std_error, other.std_error), self.n)


def as_model(model, config):
    if isinstance(model, BnsModel):
        return model
    if isinstance(model, ModelParams):
        return BnsModel.from_params(model, epsilon=config.epsilon)
    raise TypeError(f"expected ModelParams or BnsModel, got {type(model).__name__}")


def put_payoff(s_T, strike):
    return np.maximum(strike - s_T, 0.0)


def call_payoff(s_T, strike):
    return np.maximum(s_T - strike, 0.0)


def digital_payoff(s_T, strike):
    """``-1{S_T < K} S_T``."""
    return np.where(s_T < strike, -s_T, 0.0)


def weighted(sample, payoff, strike, row=0):
    """Per-path summands ``w_i * payoff(S_T,i)`` for one shift row of a sample."""
    return sample.weights[row] * payoff(sample.s_T[row], strike)


def price_put(model, config, strike, z_shift=0.0):
    """Put price under the shifted measure, started from ``(s_bar e^{rho z}, sigma_bar^2 + z)``."""
    if not strike > 0:
        raise ValueError("strike must be positive")
    sample = simulate_terminal(as_model(model, config), config, [z_shift])
    return McEstimate.from_samples(weighted(sample, put_payoff, strike))


def price_call(model, config, strike, z_shift=0.0):
    if not strike > 0:
        raise ValueError("strike must be positive")
    sample = simulate_terminal(as_model(model, config), config, [z_shift])
    return McEstimate.from_samples(weighted(sample, call_payoff, strike))


def digital_term(model, config, strike):
    """``E_Q[-1{S_T < K} S_T]`` given the unshifted state."""
    if not strike > 0:
        raise ValueError("strike must be positive")
    sample = simulate_terminal(as_model(model, config), config, [0.0])
    return McEstimate.from_samples(weighted(sample, digital_payoff, strike))


@dataclass(frozen=True)
class WeightDiagnostics:
    mean: float
    max: float
    min: float
    ess: float
    ess_fraction: float


def weight_diagnostics(weights):
    """Summary of a weight vector; ``ess = (sum w)^2 / sum w^2``."""
    w = np.asarray(weights, dtype=float)
    ess = float(np.sum(w) ** 2 / np.sum(w * w))
    return WeightDiagnostics(float(np.mean(w)), float(np.max(w)), float(np.min(w)), ess, ess / len(w))
