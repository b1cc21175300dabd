"""
Impulse responses and long-run multipliers as a degree of market efficiency

Under an efficient market every interim multiplier beta_k (k >= 1) is zero and
the long-run multiplier phi = 1 / (1 - sum alpha_j) equals one. Applied period
by period to a TV-AR fit these give time-varying efficiency measures with
delta-method confidence bands.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy import stats

from data_loader import returns_from_values
from errors import ConfigurationError, NumericError
from tvar import TvarFit, build_stacked, solve_stacked

DEFAULT_HORIZON = 60
DEFAULT_CI_LEVEL = 0.95
MIN_REPLICATIONS = 99
UNIT_ROOT_TOL = 1e-10


@dataclass(frozen=True)
class CompanionMatrix:
    """Companion form A of an AR(q): first row alpha, identity subdiagonal."""

    entries: np.ndarray

    @classmethod
    def from_coefficients(cls, alpha) -> "CompanionMatrix":
        alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
        q = alpha.size
        entries = np.zeros((q, q))
        entries[0] = alpha
        entries[1:, :-1] = np.eye(q - 1)
        return cls(entries=entries)

    @property
    def order(self) -> int:
        return self.entries.shape[0]

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.entries))))

    @property
    def is_stationary(self) -> bool:
        return self.spectral_radius < 1.0

    def power(self, k: int) -> np.ndarray:
        return np.linalg.matrix_power(self.entries, k)


@dataclass(frozen=True)
class MultiplierPath:
    """Per-period multipliers; interim is T x (H+1), interim_se T x H for k = 1..H."""

    dates: pd.PeriodIndex
    interim: np.ndarray
    interim_se: np.ndarray
    longrun: np.ndarray
    longrun_se: np.ndarray
    ci_level: float
    stationary: np.ndarray
    spectral_radius: np.ndarray

    @property
    def horizon(self) -> int:
        return self.interim.shape[1] - 1

    @property
    def critical_value(self) -> float:
        return float(stats.norm.ppf(0.5 + self.ci_level / 2.0))

    @property
    def lower(self) -> np.ndarray:
        return self.longrun - self.critical_value * self.longrun_se

    @property
    def upper(self) -> np.ndarray:
        return self.longrun + self.critical_value * self.longrun_se

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "date": self.dates.strftime("%Y-%m"),
            "phi": self.longrun,
            "se": self.longrun_se,
            "lower": self.lower,
            "upper": self.upper,
            "stationary": self.stationary,
            "spectral_radius": self.spectral_radius,
        })

    def surface_frame(self) -> pd.DataFrame:
        """Interim multipliers in long format (date, horizon, beta)."""
        n, width = self.interim.shape
        return pd.DataFrame({
            "date": np.repeat(self.dates.strftime("%Y-%m"), width),
            "horizon": np.tile(np.arange(width), n),
            "beta": self.interim.ravel(),
        })

    def to_dict(self) -> dict:
        finite = self.longrun[self.stationary]
        return {
            "horizon": self.horizon,
            "ci_level": self.ci_level,
            "n_periods": int(self.longrun.size),
            "n_nonstationary": int(np.sum(~self.stationary)),
            "longrun_min": float(finite.min()) if finite.size else None,
            "longrun_max": float(finite.max()) if finite.size else None,
            "longrun_mean": float(finite.mean()) if finite.size else None,
        }


@dataclass(frozen=True)
class BootstrapResult:
    p_value: float
    statistic: float
    replications: int
    seed: int
    statistics: np.ndarray

    def to_dict(self) -> dict:
        return {
            "p_value": self.p_value,
            "statistic": self.statistic,
            "replications": self.replications,
            "seed": self.seed,
        }


def interim_multipliers(alpha, horizon: int) -> np.ndarray:
    """
    Interim multipliers beta_0..beta_H of an AR(q).

    Args:
        alpha: AR coefficients alpha_1..alpha_q
        horizon: Largest horizon H (>= 0)

    Returns:
        Array of length H+1 with beta_0 = 1
    """
    if horizon < 0:
        raise ConfigurationError(f"horizon must be nonnegative, got {horizon}")
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    q = alpha.size
    beta = np.zeros(horizon + 1)
    beta[0] = 1.0
    for k in range(1, horizon + 1):
        j = min(k, q)
        beta[k] = beta[k - j:k][::-1] @ alpha[:j]
    return beta


def longrun_multiplier(alpha) -> float:
    """phi = 1 / (1 - alpha_1 - ... - alpha_q); raises NumericError at a unit root."""
    denom = 1.0 - float(np.sum(alpha))
    if abs(denom) < UNIT_ROOT_TOL:
        raise NumericError("Unit root: coefficients sum to one, long-run multiplier undefined")
    return 1.0 / denom


def interim_gradient(alpha, k: int) -> np.ndarray:
    """
    Gradient G_k of beta_k with respect to alpha.

    With beta_k = J A^k J', differentiating the matrix power gives
        G_k = sum_{m=0}^{k-1} beta_m J (A')^{k-1-m}.
    The sum starts at m = 0; the m = 0 term carries beta_0 = 1.
    """
    companion = CompanionMatrix.from_coefficients(alpha)
    if k <= 0:
        return np.zeros(companion.order)
    beta = interim_multipliers(alpha, k)
    gradient = np.zeros(companion.order)
    power = np.eye(companion.order)
    for m in range(k - 1, -1, -1):
        gradient += beta[m] * power[:, 0]
        power = companion.entries @ power
    return gradient


def _gradient_recursion(alpha: np.ndarray, horizon: int) -> tuple:
    """
    Multipliers and their gradients for a batch of coefficient vectors.

    alpha is P x q. Returns beta (P x (H+1)) and grad (P x (H+1) x q) from
        d beta_k / d alpha_j = beta_{k-j} + sum_i alpha_i d beta_{k-i} / d alpha_j.
    """
    p, q = alpha.shape
    beta = np.zeros((p, horizon + 1))
    grad = np.zeros((p, horizon + 1, q))
    beta[:, 0] = 1.0
    for k in range(1, horizon + 1):
        for i in range(1, min(k, q) + 1):
            beta[:, k] += alpha[:, i - 1] * beta[:, k - i]
            grad[:, k] += alpha[:, i - 1, None] * grad[:, k - i]
            grad[:, k, i - 1] += beta[:, k - i]
    return beta, grad


def _check_covariance(sigma_alpha, q: int) -> np.ndarray:
    sigma_alpha = np.atleast_2d(np.asarray(sigma_alpha, dtype=float))
    if sigma_alpha.shape != (q, q):
        raise ConfigurationError(f"Covariance must be {q}x{q}, got {sigma_alpha.shape}")
    return sigma_alpha


def interim_se(alpha, sigma_alpha, k: int, n: int) -> float:
    """
    Delta-method standard error of beta_k.

    Args:
        alpha: AR coefficients
        sigma_alpha: Asymptotic covariance of sqrt(n)(alpha_hat - alpha)
        k: Horizon
        n: Sample size

    Returns:
        sqrt(G_k Sigma G_k' / n)
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    sigma_alpha = _check_covariance(sigma_alpha, alpha.size)
    g = interim_gradient(alpha, k)
    return float(np.sqrt(max(g @ sigma_alpha @ g, 0.0) / n))


def longrun_gradient(alpha) -> np.ndarray:
    """F = phi^2 (1, ..., 1)."""
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    return np.full(alpha.size, longrun_multiplier(alpha) ** 2)


def longrun_se(alpha, sigma_alpha, n: int) -> float:
    """
    Delta-method standard error of phi.

    Args:
        alpha: AR coefficients of a stationary AR(q)
        sigma_alpha: Asymptotic covariance of sqrt(n)(alpha_hat - alpha)
        n: Sample size

    Returns:
        sqrt(F Sigma F' / n)
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    sigma_alpha = _check_covariance(sigma_alpha, alpha.size)
    if not CompanionMatrix.from_coefficients(alpha).is_stationary:
        raise NumericError("Long-run standard error requires a stationary AR")
    f = longrun_gradient(alpha)
    return float(np.sqrt(max(f @ sigma_alpha @ f, 0.0) / n))


def multiplier_path(fit: TvarFit, horizon: int = DEFAULT_HORIZON,
                    ci_level: float = DEFAULT_CI_LEVEL) -> MultiplierPath:
    """
    Time-varying interim and long-run multipliers with pointwise bands.

    Each period uses its own coefficient vector and covariance block (n = 1,
    since the blocks are already finite-sample covariances). Periods whose
    local AR is not stationary are flagged and their phi is withheld (NaN).

    Args:
        fit: TvarFit
        horizon: Largest interim horizon H
        ci_level: Coverage of the pointwise normal bands

    Returns:
        MultiplierPath
    """
    if horizon < 0:
        raise ConfigurationError(f"horizon must be nonnegative, got {horizon}")
    if not 0.0 < ci_level < 1.0:
        raise ConfigurationError(f"ci_level must be in (0, 1), got {ci_level}")

    alpha = fit.paths.T
    n, q = alpha.shape
    cov = fit.covariances

    radius = np.array([CompanionMatrix.from_coefficients(a).spectral_radius for a in alpha])
    stationary = radius < 1.0

    interim, grad = _gradient_recursion(alpha, horizon)
    interim_var = np.einsum("tki,tij,tkj->tk", grad[:, 1:], cov, grad[:, 1:])
    interim_se_path = np.sqrt(np.clip(interim_var, 0.0, None))

    longrun = np.full(n, np.nan)
    longrun_se_path = np.full(n, np.nan)
    sums = alpha.sum(axis=1)
    longrun[stationary] = 1.0 / (1.0 - sums[stationary])
    f = (longrun ** 2)[:, None] * np.ones(q)
    variance = np.einsum("ti,tij,tj->t", f, cov, f)
    longrun_se_path[stationary] = np.sqrt(np.clip(variance[stationary], 0.0, None))

    return MultiplierPath(dates=fit.dates, interim=interim, interim_se=interim_se_path,
                          longrun=longrun, longrun_se=longrun_se_path, ci_level=ci_level,
                          stationary=stationary, spectral_radius=radius)


def sup_t_statistic(fit: TvarFit) -> float:
    """sup over periods and coefficients of |alpha_{l,t}| / se_{l,t}."""
    se = fit.standard_errors
    ratio = np.abs(fit.paths) / np.where(se > 0, se, np.inf)
    return float(np.max(ratio))


def _values(returns) -> np.ndarray:
    return np.asarray(getattr(returns, "values", returns), dtype=float)


def _null_statistic(child: np.random.SeedSequence, center: float, residuals: np.ndarray,
                    n_values: int, n_presample: int, q: int, lam, prior_weight: float) -> float:
    rng = np.random.default_rng(child)
    draws = center + rng.choice(residuals, size=n_values + n_presample, replace=True)
    if n_presample:
        series = returns_from_values(draws[n_presample:], presample=draws[:n_presample][::-1])
    else:
        series = draws
    replicate = solve_stacked(build_stacked(series, q, None, lam, prior_weight))
    return sup_t_statistic(replicate)


def joint_test_distribution(fit: TvarFit, returns, replications: int = 999, seed: int = 0,
                            n_jobs: int = 1) -> BootstrapResult:
    """
    Residual bootstrap of the joint hypothesis that every AR coefficient path is zero.

    Null samples are the return mean plus centered TV-AR residuals drawn with
    replacement. Each replicate is re-estimated with the fit's lambda and prior
    weight (the prior recomputed by OLS on the replicate) and summarized by the
    sup |alpha| / se statistic with model-based standard errors. Replicate seeds
    are spawned from ``seed``, so results do not depend on ``n_jobs``.

    Args:
        fit: TvarFit estimated on ``returns``
        returns: ReturnSeries or array the fit came from
        replications: Number of bootstrap samples (>= 99)
        seed: Root seed
        n_jobs: joblib worker count

    Returns:
        BootstrapResult
    """
    if replications < MIN_REPLICATIONS:
        raise ConfigurationError(f"replications must be at least {MIN_REPLICATIONS}, got {replications}")

    q = fit.q
    values = _values(returns)
    presample = getattr(returns, "presample", None)
    n_presample = q if presample is not None and len(presample) >= q else 0
    if values.size + n_presample - q != fit.n_periods:
        raise ConfigurationError("TvarFit was not estimated on this series")

    observed = fit
    if fit.hac:
        observed = solve_stacked(build_stacked(returns, q, fit.prior, fit.lam, fit.prior_weight))
    statistic = sup_t_statistic(observed)

    residuals = fit.residuals - fit.residuals.mean()
    center = float(values.mean())
    children = np.random.SeedSequence(seed).spawn(replications)

    draws = Parallel(n_jobs=n_jobs)(
        delayed(_null_statistic)(child, center, residuals, values.size, n_presample, q,
                                 fit.lam, fit.prior_weight)
        for child in children
    )
    draws = np.asarray(draws)
    p_value = float(np.mean(draws >= statistic))

    return BootstrapResult(p_value=p_value, statistic=statistic, replications=replications,
                           seed=seed, statistics=draws)


def bootstrap_joint_test(fit: TvarFit, returns, replications: int = 999, seed: int = 0,
                         n_jobs: int = 1) -> float:
    """Bootstrap p-value of the zero-coefficient-paths hypothesis (see joint_test_distribution)."""
    return joint_test_distribution(fit, returns, replications, seed, n_jobs).p_value


def coverage_rate(estimates: np.ndarray, standard_errors: np.ndarray, truth: float,
                  ci_level: float = DEFAULT_CI_LEVEL) -> float:
    """Share of normal intervals estimate +/- z se that contain ``truth``."""
    z = stats.norm.ppf(0.5 + ci_level / 2.0)
    estimates = np.asarray(estimates, dtype=float)
    standard_errors = np.asarray(standard_errors, dtype=float)
    covered = np.abs(estimates - truth) <= z * standard_errors
    return float(np.mean(covered))


__all__ = [
    "CompanionMatrix", "MultiplierPath", "BootstrapResult", "interim_multipliers",
    "longrun_multiplier", "interim_gradient", "longrun_gradient", "interim_se", "longrun_se",
    "multiplier_path", "sup_t_statistic", "joint_test_distribution", "bootstrap_joint_test",
    "coverage_rate",
]
