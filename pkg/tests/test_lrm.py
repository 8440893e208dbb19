import numpy as np
import pytest

from bnslrm.lrm import lrm_call, lrm_put, strike_sweep, term_residual
from bnslrm.model import BnsModel, preset
from bnslrm.paths import McConfig, simulate_terminal
from bnslrm.pricer import put_payoff, weighted
from bnslrm.quadrature import build_grid, integrate_against_g

CFG = McConfig(n_paths=120, batch_size=60, master_seed=23)


def setup(name="NV", t=0.5, **over):
    model = BnsModel.from_params(preset(name).at(t, **over))
    grid = build_grid(model.kernel, f"{name}-reduced", tolerance=1e-4)
    return model, grid


@pytest.fixture(scope="module")
def nv_sweep():
    model, grid = setup()
    strikes = model.params.s_bar * np.array([0.8, 1.0, 1.2])
    return model, grid, strikes, strike_sweep(model, CFG, grid, strikes)


def test_call_is_one_plus_put(nv_sweep):
    *_, sweep = nv_sweep
    for r in sweep:
        assert r.xi_call == 1.0 + r.xi_put
        assert np.isfinite(r.se) and r.se > 0


def test_terms_account_for_ratio(nv_sweep):
    model, _, _, sweep = nv_sweep
    for r in sweep:
        scale = abs(r.term_integral.mean) + abs(r.term_head.mean) + abs(model.params.sigma_bar_sq * r.term_digital.mean)
        assert abs(term_residual(r, model)) <= 1e-12 * scale
        assert r.term_head.mean == pytest.approx(model.kernel.c1 * r.head_price.mean, rel=1e-12)


def test_integral_matches_node_prices(nv_sweep):
    model, grid, strikes, sweep = nv_sweep
    sample = simulate_terminal(model, CFG, np.concatenate([[0.0], grid.nodes]))
    for strike, r in zip(strikes, sweep):
        prices = np.array([weighted(sample, put_payoff, strike, row).mean() for row in range(grid.size + 1)])
        assert r.term_integral.mean == pytest.approx(integrate_against_g(grid, prices[1:], prices[0]), rel=1e-10)
        assert r.head_price.mean == pytest.approx(prices[0], rel=1e-12)


def test_single_strike_equals_sweep_row(nv_sweep):
    model, grid, strikes, sweep = nv_sweep
    single = lrm_put(model, CFG, grid, strikes[1])
    assert single == sweep.rows[1]
    assert lrm_call(model, CFG, grid, strikes[1]).xi_call == sweep.rows[1].xi_call


def test_sweep_layout(nv_sweep):
    model, grid, strikes, _ = nv_sweep
    sweep = strike_sweep(model, McConfig(n_paths=20, master_seed=1), grid, strikes, times=[0.1, 0.5])
    assert len(sweep) == 6 and set(sweep.weights) == {0.1, 0.5}
    assert [r.t for r in sweep.at(0.1)] == [0.1] * 3
    with pytest.raises(ValueError):
        strike_sweep(model, CFG, grid, strikes[::-1])


def test_zero_leverage_reduces_to_digital():
    model, grid = setup(rho=0.0)
    s_bar = model.params.s_bar
    for r in strike_sweep(model, CFG, grid, s_bar * np.array([0.9, 1.0, 1.1])):
        assert r.term_integral.mean == 0.0 and r.term_head.mean == 0.0
        assert r.xi_call == pytest.approx(1.0 + r.term_digital.mean / s_bar, rel=1e-15, abs=1e-15)


def test_zero_drift_weights_irrelevant():
    model, grid = setup(alpha=0.0)
    strikes = model.params.s_bar * np.array([0.9, 1.1])
    on = strike_sweep(model, CFG, grid, strikes)
    off = strike_sweep(model, McConfig(n_paths=120, batch_size=60, master_seed=23, use_weights=False), grid, strikes)
    for a, b in zip(on, off):
        assert a.xi_put == pytest.approx(b.xi_put, abs=1e-12)
    assert on.weights[0.5].min == on.weights[0.5].max == 1.0


def test_extreme_strikes():
    model, grid = setup()
    s_bar = model.params.s_bar
    low, high = strike_sweep(model, CFG, grid, [1e-6 * s_bar, 1e3 * s_bar])
    assert low.xi_put == 0.0 and low.xi_call == 1.0
    assert abs(high.xi_call) <= 3 * high.se + 1e-12
