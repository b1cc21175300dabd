import numpy as np
import pandas as pd
import pytest
from scipy import stats

from data_generator import simulate_ar
from data_loader import returns_from_values
from efficiency import (CompanionMatrix, _gradient_recursion, bootstrap_joint_test, coverage_rate,
                        interim_gradient, interim_multipliers, interim_se, joint_test_distribution,
                        longrun_gradient, longrun_multiplier, longrun_se, multiplier_path,
                        sup_t_statistic)
from errors import ConfigurationError, NumericError
from tvar import TvarFit, build_stacked, solve_stacked

TABLE_COEFFICIENTS = np.array([0.3082, -0.0797])


def _fit(paths, variance=0.01):
    paths = np.asarray(paths, dtype=float)
    q, n = paths.shape
    cov = np.tile(np.eye(q) * variance, (n, 1, 1))
    return TvarFit(intercept=0.0, intercept_se=0.0, paths=paths, covariances=cov,
                   conditional_covariances=cov, residuals=np.zeros(n), state_residuals=np.zeros((n, q)),
                   lam=np.full(q, 1e-3), prior=paths[:, 0], prior_weight=1.0, sigma2=1.0,
                   dates=pd.period_range("2000-01", periods=n, freq="M"))


def _central_difference(func, alpha, step=1e-6):
    alpha = np.asarray(alpha, dtype=float)
    gradient = np.empty(alpha.size)
    for j in range(alpha.size):
        bump = np.zeros(alpha.size)
        bump[j] = step
        gradient[j] = (func(alpha + bump) - func(alpha - bump)) / (2.0 * step)
    return gradient


def test_interim_multipliers_geometric_ar1():
    np.testing.assert_allclose(interim_multipliers([0.5], 3), [1.0, 0.5, 0.25, 0.125])


def test_interim_multipliers_white_noise():
    np.testing.assert_array_equal(interim_multipliers([0.0, 0.0], 5), [1, 0, 0, 0, 0, 0])


def test_two_lag_recursion():
    beta = interim_multipliers(TABLE_COEFFICIENTS, 2)

    assert beta[1] == pytest.approx(0.3082)
    assert beta[2] == pytest.approx(0.3082 ** 2 - 0.0797, abs=1e-15)


def test_single_lag_is_powers():
    np.testing.assert_allclose(interim_multipliers([0.7], 20), 0.7 ** np.arange(21), rtol=1e-14)


def test_interim_multipliers_negative_horizon():
    with pytest.raises(ConfigurationError):
        interim_multipliers([0.5], -1)


def test_longrun_examples():
    assert longrun_multiplier([0.0, 0.0]) == 1.0
    assert longrun_multiplier(TABLE_COEFFICIENTS) == pytest.approx(1.0 / 0.7715)
    assert longrun_multiplier([0.5]) == 2.0
    assert np.sum(interim_multipliers([0.5], 50)) == pytest.approx(2.0, abs=1e-12)


def test_longrun_multiplier_unit_root():
    with pytest.raises(NumericError):
        longrun_multiplier([0.6, 0.4])


def test_partial_sums_converge():
    rng = np.random.default_rng(3)
    checked = 0
    while checked < 20:
        alpha = rng.uniform(-0.6, 0.6, 3)
        if CompanionMatrix.from_coefficients(alpha).spectral_radius >= 0.9:
            continue
        assert abs(np.sum(interim_multipliers(alpha, 200)) - longrun_multiplier(alpha)) < 1e-6
        checked += 1


def test_companion_matrix():
    companion = CompanionMatrix.from_coefficients([0.5, 0.2, 0.1])

    np.testing.assert_array_equal(companion.entries[1:], [[1, 0, 0], [0, 1, 0]])
    assert companion.order == 3
    assert companion.is_stationary
    assert companion.power(4)[0, 0] == pytest.approx(interim_multipliers([0.5, 0.2, 0.1], 4)[4])


def test_first_horizon_selects_first_coefficient():
    np.testing.assert_array_equal(interim_gradient(TABLE_COEFFICIENTS, 1), [1.0, 0.0])


def test_ar1_cube():
    assert interim_gradient([0.5], 3)[0] == pytest.approx(0.75, abs=1e-12)
    assert _central_difference(lambda a: interim_multipliers(a, 3)[3], [0.5])[0] == \
        pytest.approx(0.75, abs=1e-6)


@pytest.mark.parametrize("k", range(1, 7))
def test_interim_gradient_matches_finite_difference(k):
    rng = np.random.default_rng(k)
    alpha = rng.uniform(-0.4, 0.4, 2)

    numeric = _central_difference(lambda a: interim_multipliers(a, k)[k], alpha)

    np.testing.assert_allclose(interim_gradient(alpha, k), numeric, rtol=1e-4, atol=1e-9)


def test_recursion_matches_closed_sum():
    alpha = np.array([[0.3, -0.1, 0.05], [0.6, 0.1, -0.2]])

    beta, grad = _gradient_recursion(alpha, 12)

    for p in range(2):
        np.testing.assert_allclose(beta[p], interim_multipliers(alpha[p], 12), atol=1e-15)
        for k in range(13):
            np.testing.assert_allclose(grad[p, k], interim_gradient(alpha[p], k), atol=1e-13)


def test_longrun_gradient_matches_finite_difference():
    numeric = _central_difference(longrun_multiplier, TABLE_COEFFICIENTS)

    np.testing.assert_allclose(longrun_gradient(TABLE_COEFFICIENTS), numeric, rtol=1e-8)


def test_interim_se_first_horizon():
    sigma = np.array([[0.09, 0.01], [0.01, 0.04]])

    assert interim_se(TABLE_COEFFICIENTS, sigma, 1, 100) == pytest.approx(0.03)


def test_interim_se_matches_numeric_delta_method():
    rng = np.random.default_rng(8)
    root = rng.normal(size=(2, 2))
    sigma = root @ root.T
    alpha = np.array([0.25, 0.1])

    for k in range(1, 7):
        g = _central_difference(lambda a: interim_multipliers(a, k)[k], alpha)
        expected = np.sqrt(g @ sigma @ g / 50)
        assert interim_se(alpha, sigma, k, 50) == pytest.approx(expected, rel=1e-5)


def test_longrun_se_examples():
    assert longrun_se([0.5], [[0.04]], 100) == pytest.approx(0.08)
    assert longrun_se([0.0, 0.0], np.eye(2), 1) == pytest.approx(np.sqrt(2.0))


def test_longrun_se_needs_stationarity():
    with pytest.raises(NumericError):
        longrun_se([1.1], [[0.04]], 100)


def test_covariance_shape_checked():
    with pytest.raises(ConfigurationError):
        interim_se([0.5, 0.1], np.eye(3), 2, 10)


def test_coverage_rate():
    assert coverage_rate([0.0, 1.0, 3.0], [1.0, 1.0, 1.0], 0.0) == pytest.approx(2.0 / 3.0)


def test_multiplier_path_constant():
    fit = _fit(np.repeat(TABLE_COEFFICIENTS[:, None], 12, axis=1))

    path = multiplier_path(fit, horizon=10)

    np.testing.assert_allclose(path.longrun, 1.29618, atol=1e-5)
    np.testing.assert_array_equal(path.interim[:, 0], 1.0)
    assert path.interim.shape == (12, 11)
    assert path.interim_se.shape == (12, 10)
    np.testing.assert_allclose(path.interim_se[:, 0], 0.1)


def test_multiplier_path_zero():
    fit = _fit(np.zeros((2, 8)))

    path = multiplier_path(fit, horizon=6)

    np.testing.assert_array_equal(path.longrun, 1.0)
    np.testing.assert_array_equal(path.interim[:, 1:], 0.0)
    np.testing.assert_allclose(path.longrun_se, np.sqrt(0.02))
    assert np.all(path.lower < 1.0) and np.all(path.upper > 1.0)


def test_nonstationary_periods_are_flagged():
    paths = np.zeros((2, 6))
    paths[0, 3] = 1.2

    path = multiplier_path(_fit(paths), horizon=4)

    assert path.stationary.tolist() == [True, True, True, False, True, True]
    assert np.isnan(path.longrun[3]) and np.isnan(path.longrun_se[3])
    assert path.to_dict()["n_nonstationary"] == 1
    assert path.spectral_radius[3] == pytest.approx(1.2)


def test_multiplier_path_frames():
    path = multiplier_path(_fit(np.zeros((1, 4))), horizon=3)

    assert list(path.to_frame().columns) == ["date", "phi", "se", "lower", "upper", "stationary",
                                             "spectral_radius"]
    surface = path.surface_frame()
    assert len(surface) == 16
    assert surface["horizon"].max() == 3


def test_multiplier_path_invalid_level():
    with pytest.raises(ConfigurationError):
        multiplier_path(_fit(np.zeros((1, 4))), ci_level=1.5)


def test_sup_t_statistic():
    paths = np.array([[0.1, -0.3, 0.2]])

    assert sup_t_statistic(_fit(paths, variance=0.01)) == pytest.approx(3.0)


def test_bootstrap_same_seed_same_distribution(tvar_returns):
    fit = solve_stacked(build_stacked(tvar_returns, 2, lam=1e-3))

    first = joint_test_distribution(fit, tvar_returns, replications=99, seed=5)
    second = joint_test_distribution(fit, tvar_returns, replications=99, seed=5)

    np.testing.assert_array_equal(first.statistics, second.statistics)
    assert first.p_value == second.p_value
    assert 0.0 <= first.p_value <= 1.0


def test_bootstrap_too_few_replications(tvar_returns):
    fit = solve_stacked(build_stacked(tvar_returns, 2, lam=1e-3))

    with pytest.raises(ConfigurationError):
        bootstrap_joint_test(fit, tvar_returns, replications=50)


def test_bootstrap_fit_must_match_series(tvar_returns, ar2_returns):
    fit = solve_stacked(build_stacked(tvar_returns, 2, lam=1e-3))

    with pytest.raises(ConfigurationError):
        bootstrap_joint_test(fit, ar2_returns, replications=99)


@pytest.mark.slow
def test_bootstrap_power_on_strong_ar1():
    rng = np.random.default_rng(41)
    series = returns_from_values(simulate_ar([0.4], 500, rng))
    fit = solve_stacked(build_stacked(series, 1, lam=1e-4))

    assert bootstrap_joint_test(fit, series, replications=99, seed=1) <= 0.01


@pytest.mark.slow
def test_bootstrap_size_on_white_noise():
    rng = np.random.default_rng(43)
    pvalues = []
    for i in range(200):
        series = returns_from_values(rng.normal(size=300))
        fit = solve_stacked(build_stacked(series, 1, lam=1e-4))
        pvalues.append(bootstrap_joint_test(fit, series, replications=199, seed=i))
    pvalues = np.asarray(pvalues)

    assert np.mean(pvalues <= 0.01) <= 0.02
    assert np.mean(pvalues <= 0.10) <= 0.15
    assert stats.kstest(pvalues, "uniform").pvalue > 0.001


@pytest.mark.slow
@pytest.mark.parametrize("hac", [False, True])
def test_longrun_band_coverage(hac):
    rng = np.random.default_rng(47)
    truth = longrun_multiplier([0.3, -0.08])
    estimates, ses = [], []
    for _ in range(500):
        series = returns_from_values(simulate_ar([0.3, -0.08], 500, rng))
        fit = solve_stacked(build_stacked(series, 2, lam=1e-6), hac=hac)
        path = multiplier_path(fit, horizon=1)
        estimates.append(path.longrun[250])
        ses.append(path.longrun_se[250])

    assert 0.90 <= coverage_rate(estimates, ses, truth) <= 0.99
