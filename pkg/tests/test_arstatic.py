import numpy as np
import pytest
from scipy import stats

from arstatic import (bandwidth_table, fit_ar, hansen_lc, lag_design, ljung_box, newey_west_bandwidth,
                      select_order_sbic, white_covariance)
from conftest import SHILLER_PATH, requires_shiller
from data_generator import simulate_ar
from data_loader import load_prices, log_returns, returns_from_values
from errors import ConfigurationError


def test_lag_design_uses_presample_when_available():
    series = returns_from_values([3.0, 4.0, 5.0], presample=np.array([2.0, 1.0]))

    y, lags = lag_design(series, 2)

    np.testing.assert_array_equal(y, [3.0, 4.0, 5.0])
    np.testing.assert_array_equal(lags, [[2.0, 1.0], [3.0, 2.0], [4.0, 3.0]])


def test_lag_design_conditions_on_first_values():
    y, lags = lag_design(np.arange(6.0), 2)

    np.testing.assert_array_equal(y, [2.0, 3.0, 4.0, 5.0])
    np.testing.assert_array_equal(lags[:, 0], [1.0, 2.0, 3.0, 4.0])


def test_noise_coefficients_are_insignificant(rng):
    fit = fit_ar(rng.normal(size=1000), 2)

    assert np.all(np.abs(fit.coefficients / fit.standard_errors) < 3.0)
    assert fit.n_used == 998
    assert fit.residuals.size == fit.n_used


def test_exact_recursion_recovers_coefficient():
    x = 3.0 * 0.5 ** np.arange(40)

    fit = fit_ar(x, 1)

    assert fit.coefficients[1] == pytest.approx(0.5, abs=1e-10)


def test_covariance_is_symmetric_psd(ar2_returns):
    fit = fit_ar(ar2_returns, 2)

    np.testing.assert_allclose(fit.covariance, fit.covariance.T)
    assert np.all(np.linalg.eigvalsh(fit.covariance) >= -1e-15)


def test_zero_bandwidth_hac_equals_white(ar2_returns):
    fit = fit_ar(ar2_returns, 2, hac_bandwidth=0)

    np.testing.assert_allclose(fit.covariance, white_covariance(fit), rtol=1e-12, atol=1e-18)


def test_slopes_invariant_to_level_shift(ar2_returns):
    base = fit_ar(ar2_returns, 2)
    shifted = fit_ar(ar2_returns.values + 1.0, 2)

    np.testing.assert_allclose(shifted.slopes, base.slopes, atol=1e-10)
    assert shifted.coefficients[0] != pytest.approx(base.coefficients[0])


def test_automatic_bandwidth():
    assert newey_west_bandwidth(100) == 4
    assert newey_west_bandwidth(1695) == 7


def test_bandwidth_table_matches_single_fits(ar2_returns):
    table = bandwidth_table(ar2_returns, 2, bandwidths=[0, 3, newey_west_bandwidth(298)])

    assert list(table.columns) == ["bandwidth", "se_alpha_0", "se_alpha_1", "se_alpha_2", "is_default"]
    assert table["is_default"].tolist() == [False, False, True]
    for _, row in table.iterrows():
        expected = fit_ar(ar2_returns, 2, int(row["bandwidth"])).standard_errors
        np.testing.assert_allclose(row[["se_alpha_0", "se_alpha_1", "se_alpha_2"]].to_numpy(dtype=float),
                                   expected, rtol=1e-12)


def test_bandwidth_table_needs_bandwidths(ar2_returns):
    with pytest.raises(ConfigurationError):
        bandwidth_table(ar2_returns, 2, bandwidths=[])


def test_fit_ar_rejects_bad_order(ar2_returns):
    with pytest.raises(ConfigurationError):
        fit_ar(ar2_returns, 0)


def test_sbic_selects_ar1():
    rng = np.random.default_rng(5)

    assert select_order_sbic(simulate_ar([0.5], 2000, rng), 6) == 1


def test_sbic_invariant_to_affine_rescaling(ar2_returns):
    base = select_order_sbic(ar2_returns, 6)

    assert select_order_sbic(10.0 * ar2_returns.values - 2.0, 6) == base


def test_sbic_on_noise_stays_in_range(rng):
    assert 1 <= select_order_sbic(rng.normal(size=300), 4) <= 4


def test_hansen_lc_detects_break():
    rng = np.random.default_rng(9)
    first = simulate_ar([0.1], 750, rng)
    second = simulate_ar([0.6], 750, rng)
    series = np.concatenate([first, second])

    result = hansen_lc(fit_ar(series, 1))

    assert result.statistic > 0
    assert result.rejects_constancy
    assert result.individual.size == 3


def test_hansen_lc_checks_its_series(ar2_returns):
    fit = fit_ar(ar2_returns, 2)

    with pytest.raises(ConfigurationError):
        hansen_lc(fit, ar2_returns.values[:100])


def test_ljung_box_zero_series():
    result = ljung_box(np.zeros(50), 10)

    assert result.statistic == 0.0
    assert result.p_value == 1.0


def test_ljung_box_flags_raw_ar1():
    rng = np.random.default_rng(13)

    result = ljung_box(simulate_ar([0.5], 500, rng), 10)

    assert result.p_value < 0.01


def test_ljung_box_lag_limit():
    with pytest.raises(ConfigurationError):
        ljung_box(np.random.default_rng(0).normal(size=20), 10)


@pytest.mark.slow
def test_ljung_box_pvalues_uniform_on_noise():
    rng = np.random.default_rng(17)

    pvalues = [ljung_box(rng.normal(size=400), 20).p_value for _ in range(400)]

    assert stats.kstest(pvalues, "uniform").pvalue > 0.05


@pytest.mark.slow
def test_hansen_lc_size_on_stable_ar2():
    rng = np.random.default_rng(23)

    rejections = [hansen_lc(fit_ar(simulate_ar([0.3, -0.08], 1500, rng), 2)).rejects_constancy
                  for _ in range(500)]

    assert np.mean(rejections) <= 0.05


@pytest.mark.slow
def test_hansen_lc_power_on_break():
    rng = np.random.default_rng(29)
    hits = []
    for _ in range(100):
        series = np.concatenate([simulate_ar([0.1], 750, rng), simulate_ar([0.6], 750, rng)])
        hits.append(hansen_lc(fit_ar(series, 1)).rejects_constancy)

    assert np.mean(hits) >= 0.95


@requires_shiller
def test_shiller_table_two():
    returns = log_returns(load_prices(SHILLER_PATH, start="1871-01", end="2012-06"))

    assert select_order_sbic(returns, 12) == 2
    fit = fit_ar(returns, 2)
    np.testing.assert_allclose(fit.coefficients, [0.0026, 0.3082, -0.0797], atol=1e-4)
    assert fit.adj_r2 == pytest.approx(0.0857, abs=1e-3)
    assert hansen_lc(fit, returns).statistic == pytest.approx(53.0101, abs=0.5)
    assert fit.bandwidth == 7
    np.testing.assert_allclose(fit.standard_errors, [0.0010, 0.0282, 0.0312], rtol=0.15)

    table = bandwidth_table(returns, 2)
    default = table[table["is_default"]]
    assert default["bandwidth"].tolist() == [7]
    assert default["se_alpha_1"].iloc[0] == pytest.approx(fit.standard_errors[1], rel=1e-12)
