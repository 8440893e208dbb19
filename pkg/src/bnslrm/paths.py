"""Path simulation under the real-world measure with explicit jump enumeration.

Jumps of the subordinator larger than ``epsilon`` are enumerated; the mass below
``epsilon`` is replaced by its mean drift ``mu_eps``.  Between jumps the squared
volatility follows the deterministic OU map, so every time integral the log-price
and the log density of the minimal martingale measure need is evaluated on the
exact piecewise-exponential path: ``int sigma^2`` in closed form, the other
integrands by Gauss-Legendre per inter-jump piece.  The Brownian integrals
``(int sigma dW, int u dW)`` are drawn from their exact conditional joint Gaussian.

Two implementations share the same random numbers:

* :func:`simulate_path` / :func:`advance_step` -- a readable per-path reference;
* :func:`simulate_terminal` -- the vectorized ensemble engine used for pricing,
  which evaluates many initial shifts ``z`` on one set of path noise (common
  random numbers across shifts).
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidStateError
from .levy_kernel import DEFAULT_EPSILON

# purpose tags of the per-path random streams
STREAM_JUMP_SERIES = 1
STREAM_JUMP_GAMMA = 2
STREAM_GAUSS = 3

_MAX_SERIES_CHUNKS = 1_000_000


@dataclass(frozen=True)
class McConfig:
    step_h: float = 0.01
    n_paths: int = 10_000
    master_seed: int = 20240607
    epsilon: float = DEFAULT_EPSILON
    gl_order: int = 3
    batch_size: int = 1000
    workers: int = 1
    use_weights: bool = True

    def __post_init__(self):
        if not self.step_h > 0:
            raise ValueError("step_h must be positive")
        if self.n_paths < 2:
            raise ValueError("n_paths must be at least 2")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.gl_order < 1 or self.batch_size < 1 or self.workers < 1:
            raise ValueError("gl_order, batch_size and workers must be >= 1")

    def n_steps(self, t, T):
        """Number of grid steps on ``[t, T]``; the step must divide the interval."""
        span = T - t
        m = round(span / self.step_h)
        if m < 1 or abs(m * self.step_h - span) > 1e-9 * span:
            raise ValueError(f"step {self.step_h} does not divide T - t = {span}")
        return int(m)


@dataclass(frozen=True)
class JumpRecord:
    time: float
    size: float


@dataclass
class PathNoise:
    """All randomness of one path on ``[t, T]``: enumerated jumps and per-step normals."""

    grid: np.ndarray
    jump_times: np.ndarray
    jump_sizes: np.ndarray
    jump_step: np.ndarray
    normals: np.ndarray

    def step_jumps(self, k):
        sel = self.jump_step == k
        return self.jump_times[sel], self.jump_sizes[sel]


@dataclass
class PathSample:
    times: np.ndarray
    sigma_sq: np.ndarray
    log_s: np.ndarray
    jumps: list
    log_weight: float
    z_shift: float = 0.0

    @property
    def s_T(self):
        return math.exp(self.log_s[-1])


def path_stream(master_seed, path_index, purpose):
    """Counter-based (Philox) generator keyed by ``(master_seed, path_index, purpose)``."""
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(path_index), int(purpose)))
    return np.random.Generator(np.random.Philox(seq))


def _series_jumps(t0, t1, kernel, rng, epsilon):
    """Infinite-activity jumps on ``(t0, t1]`` larger than ``epsilon``.

    Proposals ``x_k = (2 c w / Gamma_k)**2`` (``Gamma_k`` unit-rate arrival times,
    ``c`` the density prefactor, ``w`` the window) form a Poisson process with
    intensity ``c x**-1.5`` on ``(epsilon, inf)``; each is kept with probability
    ``exp(-b^2 x / 2)``.  Proposals come in a fixed order, so a smaller epsilon only
    appends jumps and leaves the larger ones untouched.
    """
    width = t1 - t0
    span = 2.0 * kernel.scale * width
    gamma_max = span / math.sqrt(epsilon)
    expected = gamma_max
    chunk = int(expected + 6.0 * math.sqrt(expected) + 16)
    draws = []
    total = 0.0
    for _ in range(_MAX_SERIES_CHUNKS):
        u = rng.random((chunk, 3))
        arrivals = total + np.cumsum(-np.log1p(-u[:, 0]))
        draws.append((arrivals, u))
        total = arrivals[-1]
        if total >= gamma_max:
            break
    else:
        raise RuntimeError("jump series did not terminate")
    arrivals = np.concatenate([d[0] for d in draws])
    u = np.concatenate([d[1] for d in draws])
    n = int(np.searchsorted(arrivals, gamma_max, side="left"))
    arrivals, u = arrivals[:n], u[:n]
    with np.errstate(divide="ignore"):
        sizes = (span / arrivals) ** 2
    keep = u[:, 1] < np.exp(-kernel.half_b2 * sizes)
    times = t1 - width * u[keep, 2]
    return times, sizes[keep]


def _gamma_jumps(t0, t1, kernel, rng, epsilon):
    """Finite-activity Gamma(1/2, b^2/2) jumps on ``(t0, t1]`` larger than ``epsilon``."""
    width = t1 - t0
    n = rng.poisson(kernel.rate_cp2 * width)
    v = rng.standard_normal(n)
    times = t1 - width * rng.random(n)
    sizes = v * v / (kernel.b * kernel.b)
    keep = sizes > epsilon
    return times[keep], sizes[keep]


def simulate_jumps(t0, t1, kernel, series_rng, gamma_rng, epsilon=None):
    """All enumerated jumps on ``(t0, t1]``, sorted by time."""
    if not t1 > t0:
        raise ValueError("empty window")
    epsilon = kernel.epsilon if epsilon is None else epsilon
    t_a, x_a = _series_jumps(t0, t1, kernel, series_rng, epsilon)
    t_b, x_b = _gamma_jumps(t0, t1, kernel, gamma_rng, epsilon)
    times = np.concatenate([t_a, t_b])
    sizes = np.concatenate([x_a, x_b])
    order = np.argsort(times, kind="stable")
    return times[order], sizes[order]


def simulate_jumps_in_step(s, h, kernel, series_rng, gamma_rng):
    """Jumps in one window ``(s, s + h]`` as :class:`JumpRecord` objects."""
    times, sizes = simulate_jumps(s, s + h, kernel, series_rng, gamma_rng)
    return [JumpRecord(float(t), float(x)) for t, x in zip(times, sizes)]


def time_grid(t, T, m):
    return t + (T - t) * np.arange(m + 1) / m


def draw_path_noise(kernel, config, t, T, path_index):
    m = config.n_steps(t, T)
    grid = time_grid(t, T, m)
    series = path_stream(config.master_seed, path_index, STREAM_JUMP_SERIES)
    gamma = path_stream(config.master_seed, path_index, STREAM_JUMP_GAMMA)
    times, sizes = simulate_jumps(t, T, kernel, series, gamma)
    step = np.searchsorted(grid, times, side="left") - 1
    np.clip(step, 0, m - 1, out=step)
    normals = path_stream(config.master_seed, path_index, STREAM_GAUSS).standard_normal((m, 2))
    return PathNoise(grid, times, sizes, step, normals)


def gauss_legendre(order):
    """Nodes and weights on ``[0, 1]``."""
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


# --------------------------------------------------------------------------- reference path


@dataclass
class StepState:
    time: float
    sigma_sq: float
    log_s: float


def advance_step(state, step_end, jump_times, jump_sizes, normals, model, gl=None, use_weights=True):
    """Advance one grid step; returns ``(new_state, log_weight_increment)``.

    ``jump_times`` must be sorted and lie in ``(state.time, step_end]``.
    """
    k = model.kernel
    lam, c2, alpha = k.lam, k.c2, model.alpha
    drift_level = k.mu_eps / lam
    nodes, weights = gl if gl is not None else gauss_legendre(5)
    a_int = b_int = c_int = i_int = 0.0
    log_jumps = 0.0
    jump_total = 0.0
    v = state.sigma_sq
    prev = state.time
    events = list(zip(jump_times, jump_sizes)) + [(step_end, None)]
    for tau, size in events:
        dt = tau - prev
        excess = v - drift_level
        a_int += drift_level * dt - excess * math.expm1(-lam * dt) / lam
        for xi, wj in zip(nodes, weights):
            vn = drift_level + excess * math.exp(-lam * dt * xi)
            r = 1.0 / (vn + c2)
            b_int += wj * dt * alpha * vn * r
            c_int += wj * dt * alpha * alpha * vn * r * r
            i_int += wj * dt * r
        v = drift_level + excess * math.exp(-lam * dt)
        if size is not None:
            theta = alpha * math.expm1(k.rho * size) / (v + c2)
            if theta >= 1.0:
                raise InvalidStateError(f"1 - theta <= 0 at t={tau}")
            log_jumps += math.log1p(-theta)
            v += size
            jump_total += size
        prev = tau
    h = step_end - state.time
    root_a = math.sqrt(a_int)
    x_int = root_a * normals[0]
    log_s = state.log_s + model.mu * h - 0.5 * a_int + x_int + k.rho * (jump_total + k.mu_eps * h)
    if not use_weights:
        return StepState(step_end, v, log_s), 0.0
    resid = max(c_int - b_int * b_int / a_int, 0.0)
    y_int = (b_int / root_a) * normals[0] + math.sqrt(resid) * normals[1]
    dlogw = -y_int - 0.5 * c_int + alpha * (k.c1 - k.gamma_eps) * i_int + log_jumps
    return StepState(step_end, v, log_s), dlogw


def simulate_path(model, config, path_index, z_shift=0.0):
    """One trajectory from ``(s_bar * exp(rho z), sigma_bar_sq + z)`` at ``eval_t`` to ``T``."""
    if z_shift < 0:
        raise ValueError("z_shift must be non-negative")
    p = model.params
    noise = draw_path_noise(model.kernel, config, p.eval_t, p.horizon_T, path_index)
    gl = gauss_legendre(config.gl_order)
    m = len(noise.grid) - 1
    state = StepState(p.eval_t, p.sigma_bar_sq + z_shift, math.log(p.s_bar) + p.rho * z_shift)
    sig = np.empty(m + 1)
    logs = np.empty(m + 1)
    sig[0], logs[0] = state.sigma_sq, state.log_s
    log_w = 0.0
    jumps = []
    for j in range(m):
        times, sizes = noise.step_jumps(j)
        state, dw = advance_step(state, noise.grid[j + 1], times, sizes, noise.normals[j], model, gl,
                                 config.use_weights)
        log_w += dw
        sig[j + 1], logs[j + 1] = state.sigma_sq, state.log_s
        jumps.append([JumpRecord(float(a), float(b)) for a, b in zip(times, sizes)])
    return PathSample(noise.grid, sig, logs, jumps, log_w, z_shift)


# --------------------------------------------------------------------------- vectorized engine


@dataclass
class _PathGeometry:
    """z-independent pieces of one path; every shift adds ``z * decay`` to the base variance."""

    piece_step: np.ndarray  # index of the first piece of each step
    node_base: np.ndarray
    node_decay: np.ndarray
    node_weight: np.ndarray
    step_a_base: np.ndarray
    step_a_decay: np.ndarray
    jump_base: np.ndarray
    jump_decay: np.ndarray
    jump_sizes: np.ndarray
    normals: np.ndarray


def _path_geometry(kernel, noise, t, sigma0_sq, gl_nodes, gl_weights):
    lam = kernel.lam
    drift_level = kernel.mu_eps / lam
    grid = noise.grid
    m = len(grid) - 1
    n_jumps = len(noise.jump_times)
    # events: every jump, then the end of every step; sorted by (step, time, end-last)
    ev_time = np.concatenate([noise.jump_times, grid[1:]])
    ev_step = np.concatenate([noise.jump_step, np.arange(m)])
    ev_size = np.concatenate([noise.jump_sizes, np.zeros(m)])
    ev_end = np.concatenate([np.zeros(n_jumps, dtype=bool), np.ones(m, dtype=bool)])
    order = np.lexsort((ev_end, ev_time, ev_step))
    ev_time, ev_step, ev_size, ev_end = ev_time[order], ev_step[order], ev_size[order], ev_end[order]
    start = np.empty_like(ev_time)
    start[0] = t
    start[1:] = ev_time[:-1]
    dt = np.maximum(ev_time - start, 0.0)
    decay_start = np.exp(-lam * (start - t))
    # OU solution: sigma^2(s) = L + (sigma0^2 - L) e^{-lam(s-t)} + sum_{tau <= s} x e^{-lam(s-tau)}
    jump_mass = np.cumsum(ev_size * np.exp(lam * (ev_time - t)))
    prior_mass = np.concatenate([[0.0], jump_mass[:-1]])
    v_start = drift_level + decay_start * ((sigma0_sq - drift_level) + prior_mass)
    excess = v_start - drift_level
    shrink = np.exp(-lam * dt)
    # node arrays are (order, pieces) so the node sum is a slab add
    node_shrink = np.exp(-lam * gl_nodes[:, None] * dt[None, :])
    node_base = drift_level + excess[None, :] * node_shrink
    node_decay = decay_start[None, :] * node_shrink
    node_weight = gl_weights[:, None] * dt[None, :]
    growth = -np.expm1(-lam * dt) / lam
    a_base = np.bincount(ev_step, drift_level * dt + excess * growth, minlength=m)
    a_decay = np.bincount(ev_step, decay_start * growth, minlength=m)
    jumps = ~ev_end
    v_before = drift_level + excess * shrink
    # pieces are sorted by step and every step ends with its own end event
    step_first = np.searchsorted(ev_step, np.arange(m), side="left")
    return _PathGeometry(
        piece_step=step_first,
        node_base=node_base,
        node_decay=node_decay,
        node_weight=node_weight,
        step_a_base=a_base,
        step_a_decay=a_decay,
        jump_base=v_before[jumps],
        jump_decay=(decay_start * shrink)[jumps],
        jump_sizes=ev_size[jumps],
        normals=noise.normals,
    )


@dataclass
class TerminalSample:
    """Terminal log-prices and log-weights, shape ``(n_shifts, n_paths)``."""

    z_shifts: np.ndarray
    path_indices: np.ndarray
    log_s: np.ndarray
    log_weight: np.ndarray = field(repr=False)

    @property
    def s_T(self):
        return np.exp(self.log_s)

    @property
    def weights(self):
        return np.exp(self.log_weight)


_Z_CHUNK = 64


def _shift_terminal(model, geom, z, span, use_weights):
    """Terminal ``(log_s, log_w)`` of one path for a vector of shifts ``z``."""
    k = model.kernel
    alpha, c2 = model.alpha, k.c2
    zc = z[:, None]
    a_step = geom.step_a_base[None, :] + zc * geom.step_a_decay[None, :]
    root_a = np.sqrt(a_step)
    n1, n2 = geom.normals[:, 0], geom.normals[:, 1]
    log_s = (math.log(model.params.s_bar) + k.rho * z + model.mu * span
             + np.sum(root_a * n1 - 0.5 * a_step, axis=1)
             + k.rho * (np.sum(geom.jump_sizes) + k.mu_eps * span))
    if not use_weights:
        return log_s, np.zeros_like(log_s)
    v = z[:, None, None] * geom.node_decay
    v += geom.node_base
    r = v + c2
    np.reciprocal(r, out=r)
    wr = r * geom.node_weight
    i_piece = wr.sum(axis=1)
    wr *= v
    b_piece = wr.sum(axis=1)
    wr *= r
    c_piece = wr.sum(axis=1)
    b_step = alpha * np.add.reduceat(b_piece, geom.piece_step, axis=1)
    c_step = alpha * alpha * np.add.reduceat(c_piece, geom.piece_step, axis=1)
    i_step = np.add.reduceat(i_piece, geom.piece_step, axis=1)
    resid = np.maximum(c_step - b_step * b_step / a_step, 0.0)
    y = (b_step / root_a) * n1 + np.sqrt(resid) * n2
    theta = alpha * np.expm1(k.rho * geom.jump_sizes)[None, :] / (
        geom.jump_base[None, :] + zc * geom.jump_decay[None, :] + c2)
    if np.any(theta >= 1.0):
        raise InvalidStateError("1 - theta <= 0 on a simulated path")
    log_w = (np.sum(-y - 0.5 * c_step + alpha * (k.c1 - k.gamma_eps) * i_step, axis=1)
             + np.sum(np.log1p(-theta), axis=1))
    return log_s, log_w


def simulate_terminal_batch(model, config, z_shifts, path_indices):
    """Terminal values for the given path indices at every shift in ``z_shifts``."""
    p = model.params
    z_shifts = np.atleast_1d(np.asarray(z_shifts, dtype=float))
    if np.any(z_shifts < 0):
        raise ValueError("z shifts must be non-negative")
    path_indices = np.asarray(path_indices, dtype=np.int64)
    nodes, weights = gauss_legendre(config.gl_order)
    span = p.horizon_T - p.eval_t
    log_s = np.empty((len(z_shifts), len(path_indices)))
    log_w = np.empty_like(log_s)
    for col, idx in enumerate(path_indices):
        noise = draw_path_noise(model.kernel, config, p.eval_t, p.horizon_T, idx)
        geom = _path_geometry(model.kernel, noise, p.eval_t, p.sigma_bar_sq, nodes, weights)
        for lo in range(0, len(z_shifts), _Z_CHUNK):
            zs = z_shifts[lo:lo + _Z_CHUNK]
            log_s[lo:lo + len(zs), col], log_w[lo:lo + len(zs), col] = _shift_terminal(
                model, geom, zs, span, config.use_weights)
    return log_s, log_w


def path_batches(config):
    n, size = config.n_paths, config.batch_size
    return [np.arange(lo, min(lo + size, n)) for lo in range(0, n, size)]


def map_batches(func, config, *args):
    """Apply ``func(*args, path_indices)`` to every path batch, in path order.

    With ``config.workers > 1`` batches run in worker processes; the returned list
    is ordered by batch regardless, so downstream reductions are worker-independent.
    """
    batches = path_batches(config)
    if config.workers == 1 or len(batches) == 1:
        return [func(*args, b) for b in batches]
    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        futures = [pool.submit(func, *args, b) for b in batches]
        return [f.result() for f in futures]


def simulate_terminal(model, config, z_shifts=(0.0,)):
    """All ``config.n_paths`` paths at each shift; see :class:`TerminalSample`."""
    z_shifts = np.atleast_1d(np.asarray(z_shifts, dtype=float))
    parts = map_batches(simulate_terminal_batch, config, model, config, z_shifts)
    log_s = np.concatenate([p[0] for p in parts], axis=1)
    log_w = np.concatenate([p[1] for p in parts], axis=1)
    return TerminalSample(z_shifts, np.arange(config.n_paths), log_s, log_w)


def simulate_variance(kernel, sigma0_sq, horizon, n_paths, master_seed):
    """Squared volatility at ``horizon`` only (no price, no weights), one value per path."""
    lam = kernel.lam
    drift_level = kernel.mu_eps / lam
    base = drift_level + (sigma0_sq - drift_level) * math.exp(-lam * horizon)
    out = np.empty(n_paths)
    for i in range(n_paths):
        series = path_stream(master_seed, i, STREAM_JUMP_SERIES)
        gamma = path_stream(master_seed, i, STREAM_JUMP_GAMMA)
        times, sizes = simulate_jumps(0.0, horizon, kernel, series, gamma)
        out[i] = base + np.sum(sizes * np.exp(-lam * (horizon - times)))
    return out
