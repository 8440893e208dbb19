"""Trapezoidal integration against the leverage-weighted Levy density g.

``g`` behaves like ``z**-1/2`` at the origin, so the first interval ``(0, z_1)``
is integrated adaptively and the rest by the trapezoidal rule on the nodes.  A
grid is accepted only if the same rule reproduces ``C1 = int g`` closely.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import GridRejectedError

DEFAULT_TOLERANCE = 1e-5
REDUCED_TOLERANCE = 1e-4

# (count, step) segments starting at z = 0
SEGMENT_PRESETS = {
    "NV": ((200, 1e-5), (100, 1e-4), (100, 1e-3)),
    "Scho": ((100, 1e-5), (1000, 1e-4), (900, 1e-2)),
}
# (z_min, z_max, count) geometric grids for desk-scale runs
GEOMETRIC_PRESETS = {
    "NV-reduced": (3e-4, 0.1, 60),
    "Scho-reduced": (1e-3, 3.0, 60),
}


def segment_nodes(segments):
    """Nodes ``z_1 < ... < z_N`` from consecutive ``(count, step)`` runs starting at 0."""
    nodes = []
    z = 0.0
    for count, step in segments:
        count = int(count)
        if count < 1 or not step > 0:
            raise ValueError(f"bad segment ({count}, {step})")
        nodes.append(z + step * np.arange(1, count + 1))
        z = nodes[-1][-1]
    return np.concatenate(nodes)


def geometric_nodes(z_min, z_max, count):
    if not 0 < z_min < z_max or count < 2:
        raise ValueError("need 0 < z_min < z_max and at least two nodes")
    return np.geomspace(z_min, z_max, int(count))


@dataclass(frozen=True)
class QuadratureGrid:
    nodes: np.ndarray
    g_values: np.ndarray
    coefficients: np.ndarray  # trapezoid weight times g at each node
    head_integral: float
    c1_approx: float
    c1_error: float
    name: str = "custom"

    @property
    def size(self):
        return len(self.nodes)


def _trapezoid_weights(nodes):
    gaps = np.diff(nodes)
    w = np.zeros_like(nodes)
    w[:-1] += 0.5 * gaps
    w[1:] += 0.5 * gaps
    return w


def _apply(head_integral, coefficients, phi_values, phi_at_zero):
    return phi_at_zero * head_integral + float(np.dot(coefficients, phi_values))


def resolve_nodes(spec):
    """Nodes and a display name from a preset name, segment list, or explicit node array."""
    if isinstance(spec, str):
        for key, segments in SEGMENT_PRESETS.items():
            if key.lower() == spec.lower():
                return segment_nodes(segments), key
        for key, geo in GEOMETRIC_PRESETS.items():
            if key.lower() == spec.lower():
                return geometric_nodes(*geo), key
        raise KeyError(f"unknown grid preset {spec!r}")
    arr = np.asarray(spec, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 2:
        return segment_nodes(arr), "custom"
    return arr, "custom"


def build_grid(kernel, spec="NV", tolerance=DEFAULT_TOLERANCE, name=None):
    """Build and validate a grid for ``kernel``; raises :class:`GridRejectedError` if too coarse."""
    nodes, default_name = resolve_nodes(spec)
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 1 or len(nodes) < 2:
        raise ValueError("a grid needs at least two nodes")
    if not nodes[0] > 0 or np.any(np.diff(nodes) <= 0):
        raise ValueError("grid nodes must be positive and strictly increasing")
    if kernel.rho == 0.0:
        g = np.zeros_like(nodes)
        head = 0.0
    else:
        g = kernel.g_density(nodes)
        head = kernel.integrate_g(0.0, float(nodes[0]))
    coefficients = _trapezoid_weights(nodes) * g
    c1_approx = _apply(head, coefficients, np.ones_like(nodes), 1.0)
    c1_error = abs(c1_approx - kernel.c1)
    grid = QuadratureGrid(nodes, g, coefficients, head, c1_approx, c1_error, name or default_name)
    if tolerance is not None and c1_error > tolerance:
        raise GridRejectedError(
            f"grid {grid.name!r}: |C1 approx - C1| = {c1_error:.3e} exceeds tolerance {tolerance:.1e}",
            c1_error,
        )
    return grid


def integrate_against_g(grid, phi_values, phi_at_zero):
    """Approximate ``int phi(z) g(z) dz``; ``phi_at_zero`` multiplies the head integral."""
    phi_values = np.asarray(phi_values, dtype=float)
    if phi_values.shape != grid.nodes.shape:
        raise ValueError(f"expected {grid.size} values, got {phi_values.shape}")
    return _apply(grid.head_integral, grid.coefficients, phi_values, phi_at_zero)


def parse_grid_text(text):
    """Read a grid description.

    One directive per line (``#`` starts a comment):

    * ``COUNT STEP`` -- append ``COUNT`` nodes spaced ``STEP`` (segments chain from 0);
    * ``geometric Z_MIN Z_MAX COUNT`` -- a geometric grid (must be the only directive);
    * ``tolerance VALUE`` -- override the C1 rejection tolerance.

    Returns ``(nodes, tolerance_or_None)``.
    """
    segments = []
    geometric = None
    tolerance = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split("#", 1)[0].split()
        if not parts:
            continue
        head = parts[0].lower()
        if head == "tolerance":
            tolerance = float(parts[1])
        elif head == "geometric":
            if len(parts) != 4:
                raise ValueError(f"line {lineno}: geometric needs Z_MIN Z_MAX COUNT")
            geometric = (float(parts[1]), float(parts[2]), int(parts[3]))
        elif len(parts) == 2:
            segments.append((int(parts[0]), float(parts[1])))
        else:
            raise ValueError(f"line {lineno}: cannot parse {raw!r}")
    if geometric and segments:
        raise ValueError("mix of geometric and segment directives")
    if geometric:
        return geometric_nodes(*geometric), tolerance
    if not segments:
        raise ValueError("grid file defines no nodes")
    return segment_nodes(segments), tolerance


def load_grid_file(path):
    return parse_grid_text(Path(path).read_text(encoding="utf-8"))
