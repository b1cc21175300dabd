"""
Kalman filter and Rauch-Tung-Striebel smoother for regressions whose
coefficients follow independent random walks:

    y_t = z_t' a_t + u_t,          u_t ~ N(0, obs_var)
    a_t = a_{t-1} + v_t,           v_t ~ N(0, diag(state_var))
    a_1 ~ N(a_prior, prior_cov)
"""

from dataclasses import dataclass

import numpy as np

from errors import NumericError


@dataclass(frozen=True)
class FilterOutput:
    filtered_states: np.ndarray
    filtered_covariances: np.ndarray
    predicted_states: np.ndarray
    predicted_covariances: np.ndarray
    errors: np.ndarray
    error_variances: np.ndarray


def kalman_filter(y: np.ndarray, z: np.ndarray, a_prior: np.ndarray, prior_cov: np.ndarray,
                  state_var, obs_var: float = 1.0) -> FilterOutput:
    """
    Forward pass of the random-walk-coefficient filter.

    Args:
        y: Observations, length T
        z: T x q regressors
        a_prior: Mean of the first state
        prior_cov: Covariance of the first state
        state_var: Random-walk step variance (scalar or one per coefficient)
        obs_var: Observation noise variance

    Returns:
        FilterOutput with filtered/predicted moments and one-step errors
    """
    y = np.asarray(y, dtype=float)
    z = np.atleast_2d(np.asarray(z, dtype=float))
    n, q = z.shape
    step = np.diag(np.broadcast_to(np.asarray(state_var, dtype=float), (q,)))

    a = np.asarray(a_prior, dtype=float).copy()
    p = np.asarray(prior_cov, dtype=float).copy()

    a_filt = np.empty((n, q))
    p_filt = np.empty((n, q, q))
    a_pred = np.empty((n, q))
    p_pred = np.empty((n, q, q))
    errors = np.empty(n)
    variances = np.empty(n)

    for t in range(n):
        if t > 0:
            p = p + step
        a_pred[t], p_pred[t] = a, p

        zt = z[t]
        pz = p @ zt
        f = zt @ pz + obs_var
        if not np.isfinite(f) or f <= 0:
            raise NumericError(f"Non-invertible innovation variance {f!r} at step {t}")
        e = y[t] - zt @ a
        gain = pz / f
        a = a + gain * e
        p = p - np.outer(gain, pz)
        p = 0.5 * (p + p.T)

        a_filt[t], p_filt[t] = a, p
        errors[t], variances[t] = e, f

    return FilterOutput(a_filt, p_filt, a_pred, p_pred, errors, variances)


def rts_smoother(filtered: FilterOutput, state_var):
    """
    Rauch-Tung-Striebel backward pass with identity transition.

    Args:
        filtered: Output of kalman_filter
        state_var: Random-walk step variance used in the filter

    Returns:
        (smoothed states T x q, smoothed covariances T x q x q)
    """
    x = filtered.filtered_states.copy()
    p = filtered.filtered_covariances.copy()
    n, q = x.shape
    step = np.diag(np.broadcast_to(np.asarray(state_var, dtype=float), (q,)))

    for k in range(n - 2, -1, -1):
        p_pred = p[k] + step
        gain = np.linalg.solve(p_pred, p[k]).T
        x[k] = x[k] + gain @ (x[k + 1] - x[k])
        p[k] = p[k] + gain @ (p[k + 1] - p_pred) @ gain.T
        p[k] = 0.5 * (p[k] + p[k].T)

    return x, p


def concentrated_loglik(filtered: FilterOutput) -> float:
    """
    Gaussian prediction-error log likelihood with the observation variance
    concentrated out (the filter must have been run with obs_var = 1).
    """
    n = filtered.errors.size
    sigma2 = np.mean(filtered.errors ** 2 / filtered.error_variances)
    if not np.isfinite(sigma2) or sigma2 <= 0:
        raise NumericError("Prediction errors vanish; the concentrated likelihood is unbounded")
    return float(-0.5 * (n * np.log(2.0 * np.pi) + np.sum(np.log(filtered.error_variances))
                         + n * np.log(sigma2) + n))
