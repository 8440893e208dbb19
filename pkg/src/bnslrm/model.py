"""BNS model parameters, the validity check, and minimal-martingale-measure coefficients."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import AssumptionError, InvalidStateError
from .levy_kernel import DEFAULT_EPSILON, LevyKernel, c_rho_2


@dataclass(frozen=True)
class ModelParams:
    """IG-OU BNS parameters plus the hedging state ``(s_bar, sigma_bar_sq)`` at ``eval_t``.

    ``alpha`` is the real-world drift of S (the log-drift ``mu`` is derived).
    """

    alpha: float
    rho: float
    lam: float
    a: float
    b: float
    s_bar: float
    sigma_bar_sq: float
    horizon_T: float = 1.0
    eval_t: float = 0.0

    def __post_init__(self):
        if self.rho > 0:
            raise ValueError(f"rho must be <= 0, got {self.rho}")
        for name in ("lam", "a", "b", "s_bar", "sigma_bar_sq", "horizon_T"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value}")
        if not 0.0 <= self.eval_t < self.horizon_T:
            raise ValueError(f"eval_t must lie in [0, T), got t={self.eval_t}, T={self.horizon_T}")

    def at(self, eval_t=None, **overrides):
        """Copy with a different evaluation time and/or parameter overrides."""
        if eval_t is not None:
            overrides["eval_t"] = eval_t
        return replace(self, **overrides)

    def as_dict(self):
        return asdict(self)


PRESETS = {
    "NV": ModelParams(alpha=0.007, rho=-4.7039, lam=2.4958, a=0.0872, b=11.9800,
                      s_bar=468.40, sigma_bar_sq=0.0041),
    "Scho": ModelParams(alpha=0.100, rho=-0.1926, lam=0.0636, a=6.2410, b=4.7995,
                        s_bar=1124.47, sigma_bar_sq=0.0156),
}


def preset(name):
    for key, params in PRESETS.items():
        if key.lower() == name.lower():
            return params
    raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")


@dataclass(frozen=True)
class AssumptionReport:
    ok: bool
    decay_lhs: float
    decay_rhs: float
    drift_lhs: float
    drift_rhs: float = -1.0
    messages: tuple = field(default_factory=tuple)

    def __str__(self):
        verdict = "PASS" if self.ok else "FAIL"
        lines = [
            f"assumption check: {verdict}",
            f"  b^2/2 = {self.decay_lhs:.6g}  vs  2*max((1-exp(-lam T))/lam, |rho|) = {self.decay_rhs:.6g}",
            f"  alpha/(exp(-lam T) sigma0^2 + C2) = {self.drift_lhs:.6g}  vs  {self.drift_rhs:g}",
        ]
        lines.extend(f"  {m}" for m in self.messages)
        return "\n".join(lines)


def check_assumption(params):
    """Verdict on the two MMM positivity conditions, with both sides of each inequality.

    ``sigma0^2`` is the squared volatility at the start of the simulated interval
    (``sigma_bar_sq``), and the full maturity ``T`` is used in the decay terms, which
    is the stricter of the possible readings.
    """
    lam, T, rho = params.lam, params.horizon_T, params.rho
    decay_lhs = 0.5 * params.b ** 2
    decay_rhs = 2.0 * max((1.0 - math.exp(-lam * T)) / lam, abs(rho))
    c2 = c_rho_2(params.a, params.b, lam, rho)
    drift_lhs = params.alpha / (math.exp(-lam * T) * params.sigma_bar_sq + c2)
    messages = []
    first = decay_lhs > decay_rhs
    second = drift_lhs > -1.0
    if not first:
        messages.append("b^2/2 is too small: the MMM density may lose square integrability")
    if not second:
        messages.append("drift condition fails: 1 - theta can become non-positive")
    if rho == 0.0:
        messages.append("rho = 0: all jump-leverage terms vanish")
    return AssumptionReport(first and second, decay_lhs, decay_rhs, drift_lhs, -1.0, tuple(messages))


@dataclass(frozen=True)
class BnsModel:
    """Validated parameters bundled with the Levy kernel; the object the simulators consume."""

    params: ModelParams
    kernel: LevyKernel

    @classmethod
    def from_params(cls, params, epsilon=DEFAULT_EPSILON):
        report = check_assumption(params)
        if not report.ok:
            raise AssumptionError(str(report), report)
        kernel = LevyKernel.from_params(params.a, params.b, params.lam, params.rho, epsilon)
        return cls(params, kernel)

    @property
    def alpha(self):
        return self.params.alpha

    @property
    def mu(self):
        """Log-price drift ``alpha - C1``."""
        return self.params.alpha - self.kernel.c1

    def mmm_u(self, sigma_sq):
        return mmm_u(sigma_sq, self.params.alpha, self.kernel.c2)

    def mmm_theta(self, sigma_sq, x):
        return mmm_theta(sigma_sq, x, self.params.alpha, self.params.rho, self.kernel.c2)


def mmm_u(sigma_sq, alpha, c2):
    """Girsanov kernel of the Brownian part: ``alpha*sigma / (sigma^2 + C2)``."""
    sigma_sq = np.asarray(sigma_sq, dtype=float)
    if np.any(~(sigma_sq > 0)):
        raise ValueError("sigma_sq must be positive")
    out = alpha * np.sqrt(sigma_sq) / (sigma_sq + c2)
    return float(out) if out.ndim == 0 else out


def mmm_theta(sigma_sq, x, alpha, rho, c2):
    """Jump kernel ``alpha*(exp(rho x) - 1) / (sigma^2 + C2)``; raises if ``1 - theta <= 0``."""
    sigma_sq = np.asarray(sigma_sq, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(~(sigma_sq > 0)) or np.any(~(x > 0)):
        raise ValueError("sigma_sq and x must be positive")
    out = alpha * np.expm1(rho * x) / (sigma_sq + c2)
    if np.any(out >= 1.0):
        raise InvalidStateError("1 - theta <= 0: the minimal martingale measure density is not positive")
    return float(out) if out.ndim == 0 else out


_PARAM_KEYS = {
    "alpha": "alpha", "rho": "rho", "lambda": "lam", "a": "a", "b": "b",
    "s0": "s_bar", "sigma0_sq": "sigma_bar_sq", "t": "horizon_T",
}


def parse_params_text(text):
    """Parse ``key = value`` lines into :class:`ModelParams`.

    Keys: alpha, rho, lambda, a, b, S0, sigma0_sq, T (case-insensitive for S0/T).
    An optional ``preset = NV|Scho`` line supplies defaults that later keys override.
    Blank lines and ``#`` comments are ignored.
    """
    values = {}
    base = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        lowered = key.lower()
        if lowered == "preset":
            base = preset(value)
            continue
        if lowered not in _PARAM_KEYS:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        values[_PARAM_KEYS[lowered]] = float(value)
    if base is not None:
        return replace(base, **values)
    missing = {v for v in _PARAM_KEYS.values() if v != "horizon_T"} - values.keys()
    if missing:
        raise ValueError(f"missing parameter keys: {sorted(missing)}")
    return ModelParams(**values)


def load_params_file(path):
    return parse_params_text(Path(path).read_text(encoding="utf-8"))
