"""Locally risk-minimizing hedge ratios for puts and calls.

For a put with strike K at time t, given ``S_t = s_bar`` and ``sigma_t^2 = v``::

    xi_put = [ v * E_Q[-1{S_T<K} S_T]
               + int_0^inf F_t(s_bar e^{rho z}, v + z) g(z) dz
               - C1 * F_t(s_bar, v) ] / (s_bar (v + C2))

where ``F_t`` is the put price under the minimal martingale measure of the
(shifted) start.  The z-integral uses one shifted ensemble per grid node, all on
the same path noise, and ``xi_call = 1 + xi_put``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import BnsModel
from .paths import map_batches, simulate_terminal_batch
from .pricer import McEstimate, WeightDiagnostics, as_model, weight_diagnostics


@dataclass(frozen=True)
class LrmResult:
    t: float
    K: float
    xi_put: float
    xi_call: float
    se: float
    term_digital: McEstimate
    term_integral: McEstimate
    term_head: McEstimate  # C1 * F_t(s_bar, v)
    head_price: McEstimate  # F_t(s_bar, v)
    c1_error: float


@dataclass
class SweepResult:
    rows: list
    weights: dict = field(default_factory=dict)  # t -> WeightDiagnostics of the unshifted ensemble

    def at(self, t):
        return [r for r in self.rows if r.t == t]

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)


def _lrm_batch(model, config, nodes, coefficients, head_integral, strikes, path_indices):
    """Per-path summands ``(digital, integral, head_price, w0)`` for one path batch."""
    with_nodes = model.kernel.rho != 0.0
    shifts = np.concatenate([[0.0], nodes]) if with_nodes else np.zeros(1)
    log_s, log_w = simulate_terminal_batch(model, config, shifts, path_indices)
    s = np.exp(log_s)
    w = np.exp(log_w)
    nb = len(path_indices)
    digital = np.empty((len(strikes), nb))
    integral = np.zeros((len(strikes), nb))
    head = np.empty((len(strikes), nb))
    for j, strike in enumerate(strikes):
        put = w * np.maximum(strike - s, 0.0)
        head[j] = put[0]
        digital[j] = np.where(s[0] < strike, -w[0] * s[0], 0.0)
        if with_nodes:
            # row-wise accumulation keeps each path's value independent of the batch width
            integral[j] = head_integral * put[0] + (coefficients[:, None] * put[1:]).sum(axis=0)
    return digital, integral, head, w[0]


def _sweep_one_time(model, config, grid, strikes):
    p = model.params
    k = model.kernel
    parts = map_batches(_lrm_batch, config, model, config, grid.nodes, grid.coefficients,
                        grid.head_integral, strikes)
    digital = np.concatenate([q[0] for q in parts], axis=1)
    integral = np.concatenate([q[1] for q in parts], axis=1)
    head = np.concatenate([q[2] for q in parts], axis=1)
    w0 = np.concatenate([q[3] for q in parts])
    v, s_bar = p.sigma_bar_sq, p.s_bar
    denom = s_bar * (v + k.c2)
    rows = []
    for j, strike in enumerate(strikes):
        d = McEstimate.from_samples(digital[j])
        integ = McEstimate.from_samples(integral[j])
        f0 = McEstimate.from_samples(head[j])
        head_term = McEstimate.from_samples(k.c1 * head[j])
        xi_put = (v * d.mean + integ.mean - head_term.mean) / denom
        per_path = (v * digital[j] + integral[j] - k.c1 * head[j]) / denom
        se = float(np.std(per_path, ddof=1) / math.sqrt(len(per_path)))
        rows.append(LrmResult(
            t=p.eval_t, K=float(strike), xi_put=xi_put, xi_call=1.0 + xi_put, se=se,
            term_digital=d, term_integral=integ, term_head=head_term, head_price=f0,
            c1_error=grid.c1_error,
        ))
    return rows, weight_diagnostics(w0)


def strike_sweep(model, config, grid, strikes, times=None):
    """One :class:`LrmResult` per ``(t, K)``; every strike at a given t shares the same paths."""
    model = as_model(model, config)
    strikes = np.asarray(strikes, dtype=float)
    if np.any(~(strikes > 0)) or np.any(np.diff(strikes) < 0):
        raise ValueError("strikes must be positive and sorted")
    if times is None:
        times = [model.params.eval_t]
    result = SweepResult([])
    for t in times:
        model_t = model if t == model.params.eval_t else BnsModel.from_params(
            model.params.at(t), epsilon=model.kernel.epsilon)
        rows, diag = _sweep_one_time(model_t, config, grid, strikes)
        result.rows.extend(rows)
        result.weights[float(t)] = diag
    return result


def lrm_put(model, config, grid, strike):
    return strike_sweep(model, config, grid, [strike]).rows[0]


def lrm_call(model, config, grid, strike):
    """Same result object as :func:`lrm_put`; read ``xi_call``."""
    return lrm_put(model, config, grid, strike)


def term_residual(result, model):
    """``xi_put * s_bar (v + C2) - v * digital - integral + C1 F``; zero up to rounding."""
    p, k = model.params, model.kernel
    denom = p.s_bar * (p.sigma_bar_sq + k.c2)
    return (result.xi_put * denom - p.sigma_bar_sq * result.term_digital.mean
            - result.term_integral.mean + result.term_head.mean)


__all__ = ["LrmResult", "SweepResult", "WeightDiagnostics", "lrm_call", "lrm_put", "strike_sweep",
           "term_residual"]
