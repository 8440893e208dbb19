import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bnslrm.errors import GridRejectedError
from bnslrm.levy_kernel import LevyKernel, c_rho_1
from bnslrm.model import preset
from bnslrm.quadrature import build_grid, integrate_against_g, load_grid_file, parse_grid_text, resolve_nodes


def kernel(name, **over):
    p = preset(name).at(**over) if over else preset(name)
    return LevyKernel.from_params(p.a, p.b, p.lam, p.rho)


@pytest.mark.parametrize("name,published", [("NV", 6.50e-8), ("Scho", 6.07e-6)])
def test_preset_grid_errors(name, published):
    grid = build_grid(kernel(name), name)
    assert grid.c1_error <= 1e-5
    assert f"{grid.c1_error:.2e}" == f"{published:.2e}"


def test_preset_node_layout():
    nv, _ = resolve_nodes("NV")
    scho, _ = resolve_nodes("scho")
    assert len(nv) == 400 and nv[0] == pytest.approx(1e-5) and nv[-1] == pytest.approx(0.112)
    assert len(scho) == 2000 and scho[0] == pytest.approx(1e-5) and scho[-1] == pytest.approx(9.101)


def test_constant_integrand_reproduces_c1_approx():
    grid = build_grid(kernel("NV"), "NV")
    assert integrate_against_g(grid, np.ones(grid.size), 1.0) == grid.c1_approx
    assert integrate_against_g(grid, np.zeros(grid.size), 0.0) == 0.0


@pytest.mark.parametrize("name", ["NV", "Scho"])
def test_exponential_integrand_closed_form(name):
    k = kernel(name)
    grid = build_grid(k, name)
    phi = np.exp(k.rho * grid.nodes)
    exact = c_rho_1(k.a, k.b, k.lam, 2 * k.rho) - c_rho_1(k.a, k.b, k.lam, k.rho)
    # The acceptance check on C1 benefits from the trapezoid excess cancelling the truncated
    # tail; for a non-constant integrand the error is of the order of both combined.
    tail = abs(k.integrate_g(grid.nodes[-1], np.inf))
    trap = abs(grid.c1_approx - grid.head_integral - k.integrate_g(grid.nodes[0], grid.nodes[-1]))
    assert abs(integrate_against_g(grid, phi, 1.0) - exact) <= 1.1 * (tail + trap)


@settings(max_examples=30, deadline=None)
@given(alpha=st.floats(-10, 10), beta=st.floats(-10, 10), seed=st.integers(0, 2 ** 16))
def test_linearity(alpha, beta, seed):
    grid = build_grid(kernel("NV"), "NV-reduced", tolerance=1e-4)
    rng = np.random.default_rng(seed)
    p, q = rng.random(grid.size), rng.random(grid.size)
    p0, q0 = rng.random(2)
    lhs = integrate_against_g(grid, alpha * p + beta * q, alpha * p0 + beta * q0)
    rhs = alpha * integrate_against_g(grid, p, p0) + beta * integrate_against_g(grid, q, q0)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-15)


def test_refinement_reduces_error():
    k = kernel("NV")
    errors = [build_grid(k, np.geomspace(1e-4, 0.15, n), tolerance=None).c1_error for n in (30, 60, 120, 240)]
    assert all(b < a for a, b in zip(errors, errors[1:]))


def test_reduced_grids_within_reduced_tolerance():
    assert build_grid(kernel("NV"), "NV-reduced", tolerance=1e-4).c1_error < 1e-4
    assert build_grid(kernel("Scho"), "Scho-reduced", tolerance=1e-4).c1_error < 1e-4


def test_coarse_grid_rejected():
    with pytest.raises(GridRejectedError) as info:
        build_grid(kernel("NV"), np.geomspace(1e-2, 0.1, 5))
    assert info.value.c1_error > 1e-5


def test_zero_leverage_grid_is_zero():
    grid = build_grid(kernel("NV", rho=0.0), "NV")
    assert grid.c1_approx == 0.0 and grid.c1_error == 0.0 and np.all(grid.coefficients == 0.0)


def test_bad_nodes():
    with pytest.raises(ValueError):
        build_grid(kernel("NV"), [0.0, 0.1])
    with pytest.raises(ValueError):
        build_grid(kernel("NV"), [0.2, 0.1])
    with pytest.raises(KeyError):
        build_grid(kernel("NV"), "fine")
    with pytest.raises(ValueError):
        integrate_against_g(build_grid(kernel("NV"), "NV"), np.ones(3), 1.0)


def test_grid_file(tmp_path):
    path = tmp_path / "nv.grid"
    path.write_text("# NV layout\n200 1e-5\n100 1e-4\n100 1e-3\ntolerance 2e-5\n")
    nodes, tol = load_grid_file(path)
    assert tol == 2e-5
    np.testing.assert_array_equal(nodes, resolve_nodes("NV")[0])
    nodes, tol = parse_grid_text("geometric 1e-4 0.1 30")
    assert len(nodes) == 30 and tol is None
    for bad in ("", "1 2 3", "geometric 1 2", "10 1e-3\ngeometric 1e-4 1 5"):
        with pytest.raises(ValueError):
            parse_grid_text(bad)
