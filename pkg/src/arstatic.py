"""
Whole-sample AR(q) estimation: OLS with Newey-West covariance, SBIC order
selection, Hansen's parameter-constancy test and the Ljung-Box residual check
"""

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import pandas as pd
import statsmodels.api as sm
from statsmodels.stats.diagnostic import acorr_ljungbox

from errors import ConfigurationError, NumericError

# Hansen (1992) joint Lc with variance, 1% asymptotic critical value for 4 parameters.
HANSEN_LC_CRITICAL_1PCT = 1.60

AUTO_BANDWIDTH = "auto"


@dataclass(frozen=True)
class ArFit:
    """Whole-sample AR(q) estimates; coefficients are (alpha_0, alpha_1, ..., alpha_q)."""

    order: int
    coefficients: np.ndarray
    covariance: np.ndarray
    residuals: np.ndarray
    adj_r2: float
    n_used: int
    bandwidth: int
    design: np.ndarray
    response: np.ndarray

    @property
    def standard_errors(self) -> np.ndarray:
        return np.sqrt(np.diag(self.covariance))

    @property
    def slopes(self) -> np.ndarray:
        return self.coefficients[1:]

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "coefficients": self.coefficients.tolist(),
            "standard_errors": self.standard_errors.tolist(),
            "adj_r2": self.adj_r2,
            "n_used": self.n_used,
            "hac_bandwidth": self.bandwidth,
        }


@dataclass(frozen=True)
class HansenLc:
    statistic: float
    includes_variance: bool
    critical_1pct: float
    individual: np.ndarray

    @property
    def rejects_constancy(self) -> bool:
        return self.statistic > self.critical_1pct

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "includes_variance": self.includes_variance,
            "critical_1pct": self.critical_1pct,
            "individual": self.individual.tolist(),
            "rejects_constancy": self.rejects_constancy,
        }


@dataclass(frozen=True)
class LjungBoxResult:
    statistic: float
    p_value: float
    lags: int


def _values(series) -> np.ndarray:
    return np.asarray(getattr(series, "values", series), dtype=float)


def lag_design(series, q: int, condition: Optional[int] = None):
    """
    Build the response and lag matrix of an AR(q) regression.

    When the series carries ``presample`` values (at least q of them) they serve
    as x_0, x_{-1}, ... and every observation is used. Otherwise the first
    ``condition`` observations (default q) are held back as presample.

    Args:
        series: ReturnSeries or array
        q: Number of lags
        condition: Observations reserved for conditioning (>= q)

    Returns:
        (response, lags) with lags[:, l-1] = x_{t-l}
    """
    x = _values(series)
    presample = getattr(series, "presample", None)
    if condition is None and presample is not None and len(presample) >= q:
        full = np.concatenate((np.asarray(presample[:q], dtype=float)[::-1], x))
        start = q
    else:
        full = x
        start = q if condition is None else condition
    if start < q:
        raise ConfigurationError(f"Conditioning on {start} points cannot support {q} lags")
    n = full.size
    lags = np.column_stack([full[start - l:n - l] for l in range(1, q + 1)]) if q else np.empty((n - start, 0))
    return full[start:], lags


def newey_west_bandwidth(n: int) -> int:
    """
    Automatic bandwidth floor(4 (n/100)^(2/9)).

    This is the default truncation lag of every Newey-West covariance in the
    toolkit. On the 1871:01-2012:06 monthly sample (n = 1695 after two lags)
    it gives 7 lags; ``bandwidth_table`` lists the standard errors at other
    lags when a different truncation has to be matched.
    """
    return int(np.floor(4.0 * (n / 100.0) ** (2.0 / 9.0)))


def fit_ar(returns, q: int, hac_bandwidth: Union[int, str] = AUTO_BANDWIDTH,
           condition: Optional[int] = None) -> ArFit:
    """
    Estimate an AR(q) with intercept by OLS and a Newey-West (Bartlett) covariance.

    Args:
        returns: ReturnSeries or array
        q: Autoregressive order
        hac_bandwidth: Bartlett truncation lag, or "auto" for floor(4 (n/100)^(2/9))
        condition: Observations held back as presample (default q)

    Returns:
        ArFit
    """
    if q < 1:
        raise ConfigurationError(f"AR order must be positive, got {q}")
    if len(_values(returns)) <= q + 10:
        raise ConfigurationError(f"Series too short for AR({q})")

    y, lags = lag_design(returns, q, condition)
    design = sm.add_constant(lags, has_constant="add")
    if np.linalg.matrix_rank(design) < design.shape[1]:
        raise NumericError(f"Collinear AR({q}) design")

    n = y.size
    bandwidth = newey_west_bandwidth(n) if hac_bandwidth == AUTO_BANDWIDTH else int(hac_bandwidth)
    if bandwidth < 0:
        raise ConfigurationError(f"HAC bandwidth must be nonnegative, got {bandwidth}")

    results = sm.OLS(y, design).fit(cov_type="HAC", cov_kwds={"maxlags": bandwidth, "use_correction": False})
    covariance = np.asarray(results.cov_params())
    covariance = 0.5 * (covariance + covariance.T)

    return ArFit(
        order=q,
        coefficients=np.asarray(results.params),
        covariance=covariance,
        residuals=np.asarray(results.resid),
        adj_r2=float(results.rsquared_adj),
        n_used=int(n),
        bandwidth=bandwidth,
        design=design,
        response=y,
    )


def bandwidth_table(returns, q: int, bandwidths=range(0, 13)) -> pd.DataFrame:
    """
    Newey-West standard errors of the AR(q) coefficients at each truncation lag.

    Returns:
        One row per bandwidth with columns bandwidth, se_alpha_0..se_alpha_q and
        is_default (the automatic rule's lag)
    """
    bandwidths = [int(b) for b in bandwidths]
    if not bandwidths:
        raise ConfigurationError("bandwidth list is empty")
    rows = []
    for bandwidth in bandwidths:
        fit = fit_ar(returns, q, bandwidth)
        row = {"bandwidth": bandwidth}
        row.update({f"se_alpha_{i}": se for i, se in enumerate(fit.standard_errors)})
        row["is_default"] = bandwidth == newey_west_bandwidth(fit.n_used)
        rows.append(row)
    return pd.DataFrame(rows)


def white_covariance(fit: ArFit) -> np.ndarray:
    """Heteroskedasticity-only (HC0) covariance of an ArFit's coefficients."""
    results = sm.OLS(fit.response, fit.design).fit(cov_type="HC0")
    return np.asarray(results.cov_params())


def select_order_sbic(returns, max_q: int) -> int:
    """
    Pick the AR order minimizing Schwarz's criterion.

    Every candidate is fitted on the same sample, conditioned on max_q presample
    points, so the criteria are comparable.

    Args:
        returns: ReturnSeries or array
        max_q: Largest order considered

    Returns:
        Selected order in 1..max_q
    """
    if max_q < 1:
        raise ConfigurationError(f"max_q must be at least 1, got {max_q}")

    best_q, best_value = 1, np.inf
    for q in range(1, max_q + 1):
        y, lags = lag_design(returns, q, condition=max_q)
        design = np.column_stack([np.ones(y.size), lags])
        beta, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
        resid = y - design @ beta
        n = y.size
        ssr = max(resid @ resid, np.finfo(float).tiny)
        value = np.log(ssr / n) + design.shape[1] * np.log(n) / n
        if value < best_value:
            best_q, best_value = q, value
    return best_q


def hansen_lc(fit: ArFit, returns=None) -> HansenLc:
    """
    Hansen's joint Lc statistic for constancy of all coefficients and the error variance.

    Scores are the OLS first-order conditions x_t e_t together with e_t^2 - sigma^2;
    Lc = (1/n) sum_t S_t' V^{-1} S_t with S_t the cumulative scores and V = sum_t f_t f_t'.

    Args:
        fit: ArFit from fit_ar
        returns: The series the fit was produced from (checked for consistency)

    Returns:
        HansenLc
    """
    if returns is not None:
        y, _ = lag_design(returns, fit.order)
        if y.size != fit.n_used:
            raise ConfigurationError("ArFit was not produced from this series")

    resid = fit.residuals
    n = resid.size
    sigma2 = resid @ resid / n
    scores = np.column_stack([fit.design * resid[:, None], resid ** 2 - sigma2])
    cumulative = np.cumsum(scores, axis=0)
    v = scores.T @ scores

    try:
        v_inv = np.linalg.inv(v)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"Singular score covariance in Hansen test: {exc}") from None

    statistic = float(np.einsum("ti,ij,tj->", cumulative, v_inv, cumulative) / n)
    individual = np.sum(cumulative ** 2, axis=0) / (n * np.diag(v))

    return HansenLc(statistic=statistic, includes_variance=True,
                    critical_1pct=HANSEN_LC_CRITICAL_1PCT, individual=individual)


def ljung_box(residuals, lags: int) -> LjungBoxResult:
    """
    Ljung-Box portmanteau test on a residual series.

    Args:
        residuals: Residual series
        lags: Number of autocorrelations pooled (< half the sample)

    Returns:
        Q statistic, chi-square p-value and lag count; a series without
        variation returns Q = 0, p = 1
    """
    e = _values(residuals)
    if lags < 1 or lags >= e.size / 2:
        raise ConfigurationError(f"Ljung-Box lags must be in [1, n/2), got {lags} for n={e.size}")
    if np.allclose(e, e[0]):
        return LjungBoxResult(statistic=0.0, p_value=1.0, lags=lags)

    table = acorr_ljungbox(e, lags=[lags], return_df=True)
    return LjungBoxResult(statistic=float(table["lb_stat"].iloc[0]),
                          p_value=float(table["lb_pvalue"].iloc[0]), lags=lags)
