import math

import numpy as np
import pytest

from bnslrm.model import preset
from bnslrm.paths import McConfig, simulate_terminal
from bnslrm.pricer import (McEstimate, as_model, call_payoff, digital_payoff, price_call, price_put,
                           put_payoff, weight_diagnostics, weighted)

CFG = McConfig(n_paths=500, batch_size=250, master_seed=17)


@pytest.fixture(scope="module", params=["NV", "Scho"])
def case(request):
    model = as_model(preset(request.param).at(0.5), CFG)
    return model, simulate_terminal(model, CFG)


def test_put_vanishes_for_tiny_strike(case):
    model, sample = case
    assert np.all(weighted(sample, put_payoff, 1e-8 * model.params.s_bar) == 0.0)


def test_put_call_parity(case):
    model, sample = case
    s_bar = model.params.s_bar
    for strike in (0.8 * s_bar, s_bar, 1.2 * s_bar):
        diff = weighted(sample, call_payoff, strike) - weighted(sample, put_payoff, strike)
        est = McEstimate.from_samples(diff)
        assert abs(est.mean - (s_bar - strike)) <= 3 * est.std_error


def test_put_monotone_in_strike(case):
    model, sample = case
    strikes = model.params.s_bar * np.linspace(0.5, 1.5, 21)
    means = [weighted(sample, put_payoff, k).mean() for k in strikes]
    assert np.all(np.diff(means) >= 0)


def test_digital_limits(case):
    model, sample = case
    s_bar = model.params.s_bar
    assert np.all(weighted(sample, digital_payoff, 1e-8 * s_bar) == 0.0)
    est = McEstimate.from_samples(weighted(sample, digital_payoff, 1e6 * s_bar))
    assert abs(est.mean + s_bar) <= 3 * est.std_error


def test_wrappers_agree_with_sample(case):
    model, sample = case
    strike = model.params.s_bar
    put = price_put(model, CFG, strike)
    assert put.mean == pytest.approx(weighted(sample, put_payoff, strike).mean(), rel=1e-14)
    assert put.n == CFG.n_paths
    assert price_call(model, CFG, strike).mean >= 0


def test_bad_inputs():
    with pytest.raises(ValueError):
        price_put(preset("NV"), CFG, 0.0)
    with pytest.raises(TypeError):
        as_model({"alpha": 0.1}, CFG)
    with pytest.raises(ValueError):
        McEstimate.from_samples([1.0])


def test_estimate_arithmetic():
    x = np.arange(10.0)
    est = McEstimate.from_samples(x)
    assert est.mean == 4.5 and est.std_error == pytest.approx(np.std(x, ddof=1) / math.sqrt(10))
    diff = est - est
    assert diff.mean == 0.0 and diff.std_error == pytest.approx(math.sqrt(2) * est.std_error)


def test_weight_diagnostics():
    d = weight_diagnostics(np.ones(50))
    assert d.ess == pytest.approx(50) and d.ess_fraction == pytest.approx(1.0)
    d = weight_diagnostics([1.0, 0.0, 0.0, 0.0])
    assert d.ess == pytest.approx(1.0) and d.max == 1.0 and d.min == 0.0
