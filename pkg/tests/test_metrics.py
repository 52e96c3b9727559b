import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from csmimo.harness.config import preset
from csmimo.harness.runner import run_scenario
from csmimo.metrics import TrialMetrics, binarize, empirical_cdf, mse_pfa, pjr, prr


def test_prr_single_nonzero_is_infinite():
    s = np.zeros(10, dtype=complex)
    s[3] = 2.0
    assert prr(s, [3]) == [math.inf]


def test_prr_uniform_estimate():
    assert prr(np.ones(81), [5])[0] == pytest.approx(1 / 80)


def test_prr_excludes_jammer_and_other_targets():
    s = np.array([3.0, 1.0, 2.0, 1.0])
    assert prr(s, [0, 2], jammer_index=1) == [pytest.approx(9.0), pytest.approx(4.0)]


def test_index_validation():
    with pytest.raises(ValueError):
        prr(np.ones(4), [1], jammer_index=1)
    with pytest.raises(ValueError):
        prr(np.ones(4), [1, 1])
    with pytest.raises(IndexError):
        pjr(np.ones(4), [5], 0)


def test_pjr_examples():
    s = np.array([1.0, 0.0, 0.0])
    assert pjr(s, [0], 1) == math.inf
    assert pjr(np.array([2.0, 2j, 0.0]), [0], 1) == pytest.approx(1.0)
    assert pjr(np.array([2.0, 1.0, 4.0]), [0, 2], 1) == pytest.approx(10.0)


@settings(max_examples=50)
@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=6, max_size=12),
       st.floats(0.01, 100), st.floats(0, 2 * np.pi))
def test_prr_pjr_scale_invariant(values, scale, phase):
    s = np.array(values)
    c = scale * np.exp(1j * phase)
    a, b = prr(s, [0, 1], 2), prr(c * s, [0, 1], 2)
    for x, y in zip(a, b):
        assert (math.isinf(x) and math.isinf(y)) or x == pytest.approx(y, rel=1e-9)
    if abs(s[2]) > 1e-6:
        assert pjr(c * s, [0, 1], 2) == pytest.approx(pjr(s, [0, 1], 2), rel=1e-9)


def test_mse_pfa_examples():
    s = np.zeros(81)
    s[[10, 20]] = [1.0, 0.8]
    assert mse_pfa(s, [10, 20], 0.5) == (0.0, 0.0)
    assert mse_pfa(np.ones(81), [10, 20], 0.5) == (pytest.approx(79 / 81), 1.0)


@given(st.floats(0.01, 0.99))
def test_perfect_recovery_any_tau(tau):
    s = np.zeros(20)
    s[[2, 7]] = 1.0
    assert mse_pfa(s, [2, 7], tau) == (0.0, 0.0)


def test_binarize_zero_and_errors():
    np.testing.assert_array_equal(binarize(np.zeros(4), 0.5), np.zeros(4))
    with pytest.raises(ValueError):
        binarize(np.ones(4), 0.0)


def test_trial_metrics_invariants():
    TrialMetrics([1.0], math.inf, 0.0, 0.5)
    with pytest.raises(ValueError):
        TrialMetrics([-1.0], 1.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        TrialMetrics([1.0], 1.0, 0.0, 1.5)


def test_cdf_single_sample_step():
    f = empirical_cdf([2.5])
    assert f(2.4999) == 0.0 and f(2.5) == 1.0 and f(100.0) == 1.0


def test_cdf_infinity_sorts_last_and_max_is_one():
    f = empirical_cdf([3.0, math.inf, 1.0, 3.0])
    np.testing.assert_array_equal(f.values, [1.0, 3.0, math.inf])
    np.testing.assert_allclose(f.probabilities, [0.25, 0.75, 1.0])
    assert f(3.0) == 0.75 and f(math.inf) == 1.0
    assert f.rows()[-1] == (math.inf, 1.0)


def test_cdf_errors():
    with pytest.raises(ValueError):
        empirical_cdf([])
    with pytest.raises(ValueError):
        empirical_cdf([1.0, math.nan])


@settings(max_examples=30)
@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50))
def test_cdf_monotone(samples):
    f = empirical_cdf(samples)
    assert np.all(np.diff(f.probabilities) > 0)
    assert f(max(samples)) == 1.0


def _prrs(result, method):
    return np.array([p for r in result.records for p in r.metrics[method].prr_per_target])


def test_cs_prr_dominates_capon_fig2():
    res = run_scenario(preset("fig2")[0].replace(trials=40, baselines=["capon"]))
    cs, capon = _prrs(res, "cs"), _prrs(res, "capon")
    grid = np.unique(np.concatenate([cs, capon]))
    assert np.all(empirical_cdf(cs)(grid) <= empirical_cdf(capon)(grid))
    assert np.median(cs) > 10 * np.median(capon)


def test_median_pjr_falls_with_jammer_power():
    medians = {}
    for power in (400.0, 3600.0):
        cfg = preset("fig4-beta20")[0].replace(trials=30, baselines=["capon"])
        cfg.jammer.power = power
        medians[power] = run_scenario(cfg).summary["methods"]
    for method in ("cs", "capon"):
        assert medians[3600.0][method]["pjr_median"] < medians[400.0][method]["pjr_median"]


def test_cs_mse_flat_over_tau():
    sweep = [0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8]
    cfg = preset("fig2")[0].replace(trials=40, baselines=["capon"], tau_sweep=sweep)
    methods = run_scenario(cfg).summary["methods"]
    cs = [e["mse"] for e in methods["cs"]["tau_sweep"]]
    capon = [e["mse"] for e in methods["capon"]["tau_sweep"]]
    assert max(cs) - min(cs) < 0.01
    assert max(capon) - min(capon) > 10 * (max(cs) - min(cs))
