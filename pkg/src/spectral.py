"""
Periodicity of the efficiency degree: HP filtering, raw and Daniell-smoothed
periodograms, and the AR-fitted spectrum
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats
from statsmodels.regression.linear_model import yule_walker
from statsmodels.tsa.filters.hp_filter import hpfilter

from errors import ConfigurationError

RAW_PERIODOGRAM = "raw_periodogram"
SMOOTHED_PERIODOGRAM = "smoothed_periodogram"
AR_SPECTRUM = "ar_spectrum"

# Ravn-Uhlig value for monthly data.
DEFAULT_HP_LAMBDA = 129600.0
DEFAULT_SPANS = (7, 7)
AR_GRID_POINTS = 512


@dataclass(frozen=True)
class HpDecomposition:
    trend: np.ndarray
    cycle: np.ndarray
    lam: float

    def to_frame(self, dates: Optional[pd.PeriodIndex] = None) -> pd.DataFrame:
        data = {}
        if dates is not None:
            data["date"] = dates.strftime("%Y-%m")
        data["trend"] = self.trend
        data["cycle"] = self.cycle
        return pd.DataFrame(data)


@dataclass(frozen=True)
class SpectrumEstimate:
    """Spectral density on a grid in (0, 0.5] cycles per month."""

    frequencies: np.ndarray
    density: np.ndarray
    method: str
    ci_factor: Tuple[float, float]
    df: float
    spans: Optional[Tuple[int, ...]] = None
    order: Optional[int] = None

    @property
    def dominant_period_months(self) -> float:
        return float(1.0 / self.frequencies[int(np.argmax(self.density))])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "frequency": self.frequencies,
            "period_months": 1.0 / self.frequencies,
            "density": self.density,
        })

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "spans": list(self.spans) if self.spans else None,
            "order": self.order,
            "df": self.df,
            "ci_factor": list(self.ci_factor),
            "dominant_period_months": self.dominant_period_months,
            "n_frequencies": int(self.frequencies.size),
        }


def _values(series) -> np.ndarray:
    values = np.asarray(getattr(series, "values", series), dtype=float)
    if not np.all(np.isfinite(values)):
        raise ConfigurationError("Series contains missing or non-finite values")
    return values


def hp_filter(series, lam: float = DEFAULT_HP_LAMBDA) -> HpDecomposition:
    """
    Hodrick-Prescott decomposition.

    The trend solves (I + lam D'D) trend = series, with D the second-difference
    operator; the cycle is the remainder.

    Args:
        series: Real series of length >= 4
        lam: Smoothing parameter (> 0)

    Returns:
        HpDecomposition
    """
    x = _values(series)
    if x.size < 4:
        raise ConfigurationError(f"HP filter needs at least 4 observations, got {x.size}")
    if not np.isfinite(lam) or lam <= 0:
        raise ConfigurationError(f"HP lambda must be positive, got {lam}")
    _, trend = hpfilter(x, lamb=lam)
    trend = np.asarray(trend, dtype=float)
    return HpDecomposition(trend=trend, cycle=x - trend, lam=float(lam))


def fourier_ordinates(series, demean: bool = True) -> np.ndarray:
    """I_j = |sum_t x_t exp(-2 pi i j t / n)|^2 / n for j = 0..n-1."""
    x = _values(series)
    if demean:
        x = x - x.mean()
    return np.abs(np.fft.fft(x)) ** 2 / x.size


def daniell_kernel(spans: Sequence[int]) -> np.ndarray:
    """
    Weights of the iterated modified Daniell kernel, indexed -m..m.

    A span s gives half-width m = s // 2 with weight 1/(2m) inside and 1/(4m)
    at both ends.
    """
    kernel = np.array([1.0])
    for span in spans:
        span = int(span)
        if span < 3 or span % 2 == 0:
            raise ConfigurationError(f"Daniell spans must be odd and at least 3, got {span}")
        m = span // 2
        weights = np.full(2 * m + 1, 1.0 / (2 * m))
        weights[0] = weights[-1] = 1.0 / (4 * m)
        kernel = np.convolve(kernel, weights)
    return kernel


def daniell_smooth(ordinates: np.ndarray, spans: Sequence[int]) -> np.ndarray:
    """Circular kernel smoothing of a full set of Fourier ordinates."""
    kernel = daniell_kernel(spans)
    m = kernel.size // 2
    ordinates = np.asarray(ordinates, dtype=float)
    if m >= ordinates.size:
        raise ConfigurationError("Smoothing spans are wider than the series")
    padded = np.concatenate((ordinates[-m:], ordinates, ordinates[:m])) if m else ordinates
    return np.convolve(padded, kernel, mode="valid")


def _ci_factor(df: float, level: float = 0.95) -> Tuple[float, float]:
    tail = (1.0 - level) / 2.0
    return (float(df / stats.chi2.ppf(1.0 - tail, df)), float(df / stats.chi2.ppf(tail, df)))


def periodogram(series, demean: bool = True, spans: Optional[Sequence[int]] = None,
                ci_level: float = 0.95) -> SpectrumEstimate:
    """
    Periodogram at the Fourier frequencies j/n, j = 1..floor(n/2).

    With ``spans`` the full ordinate set is smoothed circularly by the iterated
    modified Daniell kernel, after replacing the zero frequency by the average
    of its neighbours. The confidence factor pair multiplies the density to give
    a chi-square band with df = 2 / sum(k^2) (2 for the raw periodogram).

    Args:
        series: Real series of length >= 8
        demean: Subtract the mean first
        spans: Daniell spans (odd integers), None for the raw periodogram
        ci_level: Coverage of the multiplicative band

    Returns:
        SpectrumEstimate
    """
    x = _values(series)
    n = x.size
    if n < 8:
        raise ConfigurationError(f"Periodogram needs at least 8 observations, got {n}")

    ordinates = fourier_ordinates(x, demean)
    half = n // 2
    frequencies = np.arange(1, half + 1) / n

    if spans:
        spans = tuple(int(s) for s in spans)
        kernel = daniell_kernel(spans)
        full = ordinates.copy()
        full[0] = 0.5 * (full[1] + full[-1])
        density = daniell_smooth(full, spans)[1:half + 1]
        df = 2.0 / np.sum(kernel ** 2)
        method = SMOOTHED_PERIODOGRAM
    else:
        spans = None
        density = ordinates[1:half + 1]
        df = 2.0
        method = RAW_PERIODOGRAM

    return SpectrumEstimate(frequencies=frequencies, density=np.clip(density, 0.0, None),
                            method=method, ci_factor=_ci_factor(df, ci_level), df=float(df),
                            spans=spans)


def select_yule_walker_order(x: np.ndarray, max_order: int) -> Tuple[int, np.ndarray, float]:
    """AIC over Yule-Walker fits of order 0..max_order; returns (order, coefficients, innovation variance)."""
    n = x.size
    best = (0, np.zeros(0), float(np.mean(x ** 2)))
    best_aic = n * np.log(best[2])
    for order in range(1, max_order + 1):
        rho, sigma = yule_walker(x, order=order, method="mle", demean=False)
        variance = float(sigma) ** 2
        aic = n * np.log(variance) + 2.0 * order
        if aic < best_aic:
            best, best_aic = (order, np.asarray(rho, dtype=float), variance), aic
    return best


def ar_spectrum(series, max_order: int = 24, grid_points: int = AR_GRID_POINTS,
                ci_level: float = 0.95) -> SpectrumEstimate:
    """
    Spectrum of a Yule-Walker AR fit with AIC order choice.

    density(f) = sigma^2 / |1 - sum_j a_j exp(-2 pi i j f)|^2 on f = 0.5 k / grid_points,
    k = 1..grid_points, which is on the periodogram's scale. A series without
    variation has zero density.

    Args:
        series: Real series with length > max_order + 10
        max_order: Largest AR order considered
        grid_points: Number of frequencies in (0, 0.5]

    Returns:
        SpectrumEstimate
    """
    x = _values(series)
    if max_order < 0 or x.size <= max_order + 10:
        raise ConfigurationError(f"max_order={max_order} too large for {x.size} observations")

    x = x - x.mean()
    frequencies = 0.5 * np.arange(1, grid_points + 1) / grid_points

    if np.allclose(x, 0.0):
        return SpectrumEstimate(frequencies=frequencies, density=np.zeros(grid_points),
                                method=AR_SPECTRUM, ci_factor=(1.0, 1.0), df=np.inf, order=0)

    order, coefficients, variance = select_yule_walker_order(x, max_order)
    lags = np.arange(1, order + 1)
    transfer = 1.0 - np.exp(-2j * np.pi * np.outer(frequencies, lags)) @ coefficients
    density = variance / np.abs(transfer) ** 2

    # Asymptotic band of an AR spectrum is not chi-square; report the raw-periodogram factor.
    return SpectrumEstimate(frequencies=frequencies, density=density, method=AR_SPECTRUM,
                            ci_factor=_ci_factor(2.0, ci_level), df=2.0, order=order)


def dominant_period(spectrum: SpectrumEstimate, min_period: float = 24.0) -> float:
    """
    Period (months) of the largest density among periods of at least ``min_period``.

    Args:
        spectrum: SpectrumEstimate
        min_period: Shortest period considered (> 2)

    Returns:
        1 / frequency at the restricted maximum
    """
    if min_period <= 2:
        raise ConfigurationError(f"min_period must exceed 2 months, got {min_period}")
    mask = (spectrum.frequencies > 0) & (spectrum.frequencies <= 1.0 / min_period)
    if not np.any(mask):
        raise ConfigurationError(f"No frequencies with period >= {min_period}")
    frequencies = spectrum.frequencies[mask]
    return float(1.0 / frequencies[int(np.argmax(spectrum.density[mask]))])


__all__ = [
    "HpDecomposition", "SpectrumEstimate", "hp_filter", "fourier_ordinates", "daniell_kernel",
    "daniell_smooth", "periodogram", "select_yule_walker_order", "ar_spectrum", "dominant_period",
]
