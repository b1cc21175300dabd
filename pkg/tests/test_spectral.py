import numpy as np
import pytest
from scipy import stats

from data_generator import simulate_ar
from errors import ConfigurationError
from spectral import (AR_SPECTRUM, RAW_PERIODOGRAM, SMOOTHED_PERIODOGRAM, SpectrumEstimate,
                      ar_spectrum, daniell_kernel, daniell_smooth, dominant_period, fourier_ordinates,
                      hp_filter, periodogram)


def test_hp_linear_series_is_all_trend():
    series = 1.0 + 0.01 * np.arange(300)

    result = hp_filter(series)

    np.testing.assert_allclose(result.trend, series, atol=1e-6)
    assert np.max(np.abs(result.cycle)) < 1e-6


def test_hp_small_lambda_tracks_the_series(rng):
    series = rng.normal(size=100)

    result = hp_filter(series, lam=1e-8)

    np.testing.assert_allclose(result.trend, series, atol=1e-6)


def test_hp_trend_plus_cycle_is_series(rng):
    series = rng.normal(size=120).cumsum()

    result = hp_filter(series)

    np.testing.assert_allclose(result.trend + result.cycle, series, atol=1e-12)


def test_hp_is_linear_in_the_input(rng):
    x, y = rng.normal(size=(2, 150))

    combined = hp_filter(2.0 * x - 3.0 * y).trend

    np.testing.assert_allclose(combined, 2.0 * hp_filter(x).trend - 3.0 * hp_filter(y).trend,
                               atol=1e-9)


def test_hp_separates_slow_and_fast_waves():
    t = np.arange(1200)
    slow = np.sin(2 * np.pi * t / 240)
    fast = 0.5 * np.sin(2 * np.pi * t / 12)

    result = hp_filter(slow + fast)

    middle = slice(300, 900)
    assert np.max(np.abs(result.trend[middle] - slow[middle])) < 0.1
    assert np.corrcoef(result.cycle[middle], fast[middle])[0, 1] > 0.95


def test_hp_cycle_recovers_sine_on_trend():
    t = np.arange(800)
    wave = np.sin(2 * np.pi * t / 40)

    result = hp_filter(wave + 0.5 + 0.02 * t, lam=129600)

    assert np.corrcoef(result.cycle, wave)[0, 1] > 0.99


def test_hp_needs_four_points():
    with pytest.raises(ConfigurationError):
        hp_filter([1.0, 2.0, 3.0])


def test_hp_lambda_must_be_positive():
    with pytest.raises(ConfigurationError):
        hp_filter(np.arange(10.0), lam=0.0)


def test_hp_missing_values_rejected():
    with pytest.raises(ConfigurationError):
        hp_filter([1.0, np.nan, 2.0, 3.0, 4.0])


def test_daniell_span_three():
    np.testing.assert_allclose(daniell_kernel([3]), [0.25, 0.5, 0.25])


def test_iterated_kernel_sums_to_one():
    kernel = daniell_kernel([7, 7])

    assert kernel.size == 13
    assert kernel.sum() == pytest.approx(1.0)
    np.testing.assert_allclose(kernel, kernel[::-1])


@pytest.mark.parametrize("spans", [[4], [1], [7, 6]])
def test_daniell_invalid_spans(spans):
    with pytest.raises(ConfigurationError):
        daniell_kernel(spans)


def test_circular_smoothing_keeps_total_mass(rng):
    ordinates = rng.exponential(size=64)

    smoothed = daniell_smooth(ordinates, [5, 5])

    assert smoothed.size == 64
    assert smoothed.sum() == pytest.approx(ordinates.sum())


def test_periodogram_cosine_spike():
    t = np.arange(200)

    spectrum = periodogram(np.cos(2 * np.pi * 0.05 * t))

    assert spectrum.method == RAW_PERIODOGRAM
    assert spectrum.frequencies[int(np.argmax(spectrum.density))] == pytest.approx(0.05)
    assert spectrum.dominant_period_months == pytest.approx(20.0)
    assert spectrum.frequencies.size == 100


def test_periodogram_parseval(rng):
    x = rng.normal(size=257)

    ordinates = fourier_ordinates(x)

    assert ordinates.sum() == pytest.approx(np.sum((x - x.mean()) ** 2))


def test_raw_confidence_factor():
    spectrum = periodogram(np.random.default_rng(0).normal(size=64))

    assert spectrum.df == 2.0
    assert spectrum.ci_factor[0] == pytest.approx(2.0 / stats.chi2.ppf(0.975, 2))
    assert spectrum.ci_factor[1] == pytest.approx(2.0 / stats.chi2.ppf(0.025, 2))


def test_smoothing_raises_degrees_of_freedom(rng):
    spectrum = periodogram(rng.normal(size=300), spans=(7, 7))

    assert spectrum.method == SMOOTHED_PERIODOGRAM
    assert spectrum.df == pytest.approx(2.0 / np.sum(daniell_kernel((7, 7)) ** 2))
    assert spectrum.df > 2.0
    assert spectrum.ci_factor[1] - spectrum.ci_factor[0] < 39.0


def test_long_cycle_found_in_smoothed_spectrum():
    rng = np.random.default_rng(12)
    t = np.arange(1697)
    series = (np.sin(2 * np.pi * t / (35 * 12)) + 0.5 * np.sin(2 * np.pi * t / 12)
              + 0.1 * rng.normal(size=t.size))

    spectrum = periodogram(series, spans=(7, 7))

    assert 360 <= dominant_period(spectrum, min_period=24) <= 480


def test_periodogram_short_series_rejected():
    with pytest.raises(ConfigurationError):
        periodogram(np.arange(7.0))


def test_white_noise_ordinates_are_exponential():
    rng = np.random.default_rng(21)

    spectrum = periodogram(rng.normal(size=1000))

    assert stats.kstest(spectrum.density[:-1], "expon").pvalue > 0.01


def test_ar_spectrum_ar1_shape():
    rng = np.random.default_rng(2)

    spectrum = ar_spectrum(simulate_ar([0.5], 5000, rng), max_order=8)

    assert spectrum.method == AR_SPECTRUM
    assert spectrum.frequencies.size == 512
    assert spectrum.frequencies[-1] == 0.5
    assert spectrum.density[0] / spectrum.density[-1] == pytest.approx(9.0, rel=0.25)


def test_ar_spectrum_ar2_matches_closed_form():
    rng = np.random.default_rng(4)
    alpha = np.array([0.5, -0.3])

    spectrum = ar_spectrum(simulate_ar(alpha, 5000, rng), max_order=8)

    lags = np.exp(-2j * np.pi * np.outer(spectrum.frequencies, [1, 2]))
    expected = 1.0 / np.abs(1.0 - lags @ alpha) ** 2
    relative = np.abs(spectrum.density / expected - 1.0)
    assert np.mean(relative) < 0.1
    assert np.max(relative) < 0.3


def test_ar_spectrum_constant_series_has_zero_density():
    spectrum = ar_spectrum(np.full(100, 3.0))

    np.testing.assert_array_equal(spectrum.density, 0.0)
    assert spectrum.order == 0


def test_ar_spectrum_order_limit():
    with pytest.raises(ConfigurationError):
        ar_spectrum(np.random.default_rng(0).normal(size=30), max_order=24)


def _spectrum():
    return SpectrumEstimate(frequencies=np.array([0.01, 0.02, 0.05, 0.1]),
                            density=np.array([1.0, 3.0, 10.0, 2.0]), method=RAW_PERIODOGRAM,
                            ci_factor=(1.0, 1.0), df=2.0)


def test_dominant_period_restricted_to_long_periods():
    assert dominant_period(_spectrum(), min_period=24) == pytest.approx(50.0)


def test_dominant_period_unrestricted_maximum():
    assert dominant_period(_spectrum(), min_period=5) == pytest.approx(20.0)


def test_dominant_period_min_period_must_exceed_two():
    with pytest.raises(ConfigurationError):
        dominant_period(_spectrum(), min_period=2)


def test_dominant_period_no_frequency_long_enough():
    with pytest.raises(ConfigurationError):
        dominant_period(_spectrum(), min_period=200)
