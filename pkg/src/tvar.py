"""
Non-Bayesian time-varying AR estimation as one stacked least-squares solve

The observation equations x_t = alpha_0 + z_t' a_t + u_t and the random-walk
state equations a_t = a_{t-1} + v_t are stacked into a single weighted
regression. Its normal matrix is block tridiagonal in the period-major layout
(alpha_0, a_1, ..., a_T), bordered by the intercept, so it is solved with a
banded Cholesky factorization in O(T q^2).
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd
from scipy import sparse
from scipy.linalg import LinAlgError, cho_solve_banded, cholesky_banded

from arstatic import AUTO_BANDWIDTH, lag_design, newey_west_bandwidth
from errors import ConfigurationError, NumericError
from kalman import concentrated_loglik, kalman_filter, rts_smoother

DEFAULT_LAMBDA_GRID = tuple(float(v) for v in 10.0 ** np.arange(-6.0, 0.01, 0.5))

# Window thresholds: s1 is the first s with m(s) > LOWER*M, s2 the first with m(s) >= UPPER*M.
WINDOW_LOWER = 0.025
WINDOW_UPPER = 0.975


@dataclass(frozen=True)
class StackedSystem:
    """
    Stacked observation/state regression  [x; gamma] = [Z; W] beta + [u; v].

    Rows 0..T-1 are observations, row T + t*q + (l-1) is the state equation of
    coefficient l at period t (t = 0 holds the prior rows). ``row_weights`` are
    inverse row variances in units of the observation variance.
    """

    response: np.ndarray
    regressor: sparse.csr_matrix
    row_weights: np.ndarray
    q: int
    lam: np.ndarray
    prior: np.ndarray
    prior_weight: float
    dates: pd.PeriodIndex
    observations: np.ndarray
    lags: np.ndarray

    @property
    def n_periods(self) -> int:
        return self.observations.size

    @property
    def n_columns(self) -> int:
        return 1 + self.q * self.n_periods

    @property
    def layout(self) -> np.ndarray:
        """q x T array; layout[l-1, t-1] is the column of alpha_{l,t}."""
        return 1 + np.arange(self.q * self.n_periods).reshape(self.n_periods, self.q).T

    def column(self, coefficient: int, period: int) -> int:
        """Column of alpha_{coefficient, period} (both counted from 1)."""
        if not 1 <= coefficient <= self.q or not 1 <= period <= self.n_periods:
            raise ConfigurationError(f"No column for coefficient {coefficient}, period {period}")
        return 1 + (period - 1) * self.q + (coefficient - 1)

    @property
    def noise_spec(self) -> dict:
        return {
            "observation_variance": 1.0,
            "state_variance": self.lam.tolist(),
            "prior_variance": (self.lam / self.prior_weight).tolist(),
            "units": "observation variance",
        }

    @property
    def row_variances(self) -> np.ndarray:
        return 1.0 / self.row_weights


@dataclass(frozen=True)
class TvarFit:
    """Smoothed TV-AR estimates; period-indexed arrays run over t = 1..T."""

    intercept: float
    intercept_se: float
    paths: np.ndarray
    covariances: np.ndarray
    conditional_covariances: np.ndarray
    residuals: np.ndarray
    state_residuals: np.ndarray
    lam: np.ndarray
    prior: np.ndarray
    prior_weight: float
    sigma2: float
    dates: pd.PeriodIndex
    hac: bool = False
    hac_bandwidth: Optional[int] = None
    iterations: int = 0
    full_covariance: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def q(self) -> int:
        return self.paths.shape[0]

    @property
    def n_periods(self) -> int:
        return self.paths.shape[1]

    @property
    def standard_errors(self) -> np.ndarray:
        """q x T standard errors from the reported covariance blocks."""
        return np.sqrt(np.clip(np.diagonal(self.covariances, axis1=1, axis2=2), 0.0, None)).T

    def to_frame(self) -> pd.DataFrame:
        """Columnar form: period, date, alpha_l, se_l, cov_i_j (i <= j), residual."""
        data = {"period": np.arange(1, self.n_periods + 1), "date": self.dates.strftime("%Y-%m")}
        se = self.standard_errors
        for ell in range(self.q):
            data[f"alpha_{ell + 1}"] = self.paths[ell]
        for ell in range(self.q):
            data[f"se_{ell + 1}"] = se[ell]
        for i in range(self.q):
            for j in range(i, self.q):
                data[f"cov_{i + 1}_{j + 1}"] = self.covariances[:, i, j]
        data["residual"] = self.residuals
        return pd.DataFrame(data)

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "n_periods": self.n_periods,
            "intercept": self.intercept,
            "intercept_se": self.intercept_se,
            "lambda": self.lam.tolist(),
            "prior": self.prior.tolist(),
            "prior_weight": self.prior_weight,
            "sigma2": self.sigma2,
            "hac": self.hac,
            "hac_bandwidth": self.hac_bandwidth,
            "iterations": self.iterations,
            "first_date": str(self.dates[0]),
        }

    @classmethod
    def from_artifacts(cls, frame: pd.DataFrame, summary: dict) -> "TvarFit":
        """Rebuild a fit from ``to_frame()`` and ``to_dict()`` output (resume support)."""
        q = int(summary["q"])
        n = len(frame)
        paths = np.vstack([frame[f"alpha_{ell + 1}"].to_numpy(dtype=float) for ell in range(q)])
        cov = np.empty((n, q, q))
        for i in range(q):
            for j in range(i, q):
                cov[:, i, j] = cov[:, j, i] = frame[f"cov_{i + 1}_{j + 1}"].to_numpy(dtype=float)
        dates = pd.period_range(start=summary["first_date"], periods=n, freq="M")
        return cls(
            intercept=float(summary["intercept"]),
            intercept_se=float(summary["intercept_se"]),
            paths=paths,
            covariances=cov,
            conditional_covariances=cov.copy(),
            residuals=frame["residual"].to_numpy(dtype=float),
            state_residuals=np.zeros((n, q)),
            lam=np.asarray(summary["lambda"], dtype=float),
            prior=np.asarray(summary["prior"], dtype=float),
            prior_weight=float(summary["prior_weight"]),
            sigma2=float(summary["sigma2"]),
            dates=dates,
            hac=bool(summary["hac"]),
            hac_bandwidth=summary.get("hac_bandwidth"),
            iterations=int(summary.get("iterations", 0)),
        )


@dataclass(frozen=True)
class SmootherWeights:
    coefficient: int
    tau: int
    weights: np.ndarray
    cumulative: np.ndarray
    s1: int
    s2: int
    q_tilde: Optional[np.ndarray] = None

    @property
    def width(self) -> int:
        return self.s2 - self.s1

    @property
    def window(self):
        return self.s1, self.s2, self.width

    def to_frame(self, dates: Optional[pd.PeriodIndex] = None) -> pd.DataFrame:
        data = {"period": np.arange(1, self.weights.size + 1)}
        if dates is not None:
            data["date"] = dates.strftime("%Y-%m")
        data["weight"] = self.weights
        data["cumulative_abs"] = self.cumulative
        data["in_window"] = (data["period"] >= self.s1) & (data["period"] <= self.s2)
        return pd.DataFrame(data)

    def to_dict(self) -> dict:
        return {"coefficient": self.coefficient, "tau": self.tau, "s1": self.s1,
                "s2": self.s2, "width": self.width}


@dataclass(frozen=True)
class KalmanOracleResult:
    smoothed_states: np.ndarray
    smoothed_covariances: np.ndarray
    intercept: float
    loglik: float


def _lambda_vector(lam, q: int) -> np.ndarray:
    values = np.asarray(lam, dtype=float).ravel()
    if values.size == 1:
        values = np.full(q, values[0])
    if values.size != q:
        raise ConfigurationError(f"lambda needs 1 or {q} values, got {values.size}")
    if np.any(~np.isfinite(values)) or np.any(values <= 0):
        raise ConfigurationError(f"lambda must be positive, got {values.tolist()}")
    return values


def default_prior(returns, q: int) -> np.ndarray:
    """Whole-sample OLS AR(q) slopes, the default prior vector."""
    y, lags = lag_design(returns, q)
    design = np.column_stack([np.ones(y.size), lags])
    beta, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    return beta[1:]


def _assemble(dates, y, lags, prior, lam, prior_weight) -> StackedSystem:
    n, q = lags.shape
    ncols = 1 + q * n
    cols = 1 + np.arange(q * n).reshape(n, q)

    obs_rows = np.repeat(np.arange(n), q + 1)
    obs_cols = np.column_stack([np.zeros(n, dtype=int), cols]).ravel()
    obs_data = np.column_stack([np.ones(n), lags]).ravel()

    state_rows_all = n + np.arange(q * n).reshape(n, q)
    # -a_t in every state row (t = 0 is the prior row), +a_{t-1} for t >= 1
    minus_rows, minus_cols = state_rows_all.ravel(), cols.ravel()
    plus_rows, plus_cols = state_rows_all[1:].ravel(), cols[:-1].ravel()

    rows = np.concatenate([obs_rows, minus_rows, plus_rows])
    columns = np.concatenate([obs_cols, minus_cols, plus_cols])
    data = np.concatenate([obs_data, -np.ones(minus_rows.size), np.ones(plus_rows.size)])
    regressor = sparse.csr_matrix((data, (rows, columns)), shape=(n + q * n, ncols))

    response = np.concatenate([y, -prior, np.zeros(q * (n - 1))])
    state_weights = np.tile(1.0 / lam, (n, 1))
    state_weights[0] *= prior_weight
    row_weights = np.concatenate([np.ones(n), state_weights.ravel()])

    return StackedSystem(response=response, regressor=regressor, row_weights=row_weights, q=q,
                         lam=lam, prior=prior, prior_weight=float(prior_weight), dates=dates,
                         observations=y, lags=lags)


def build_stacked(returns, q: int, prior: Optional[Sequence[float]] = None,
                  lam: Union[float, Sequence[float]] = 1e-3, prior_weight: float = 1.0) -> StackedSystem:
    """
    Build the stacked observation/state system for a TV-AR(q).

    Args:
        returns: ReturnSeries (presample values are used when present) or array
        q: Autoregressive order
        prior: Prior coefficient vector (default: whole-sample OLS slopes)
        lam: State-to-observation variance ratio, scalar or one per coefficient
        prior_weight: Precision of the prior rows relative to a state step

    Returns:
        StackedSystem
    """
    if q < 1:
        raise ConfigurationError(f"AR order must be positive, got {q}")
    lam = _lambda_vector(lam, q)
    if not np.isfinite(prior_weight) or prior_weight <= 0:
        raise ConfigurationError(f"prior_weight must be positive, got {prior_weight}")

    y, lags = lag_design(returns, q)
    if y.size < 2:
        raise ConfigurationError(f"Series too short for a TV-AR({q})")

    prior = default_prior(returns, q) if prior is None else np.asarray(prior, dtype=float).ravel()
    if prior.size != q:
        raise ConfigurationError(f"prior needs {q} values, got {prior.size}")

    dates = getattr(returns, "dates", None)
    if dates is None:
        dates = pd.period_range("2000-01", periods=len(np.asarray(returns)), freq="M")
    dates = dates[len(dates) - y.size:]

    return _assemble(dates, y, lags, prior, lam, prior_weight)


class NormalEquations:
    """
    Banded Cholesky factorization of X' Omega X bordered by the intercept.

    With N = [[n00, c'], [c, N_aa]], solves use
        N_aa g = c,  s = n00 - c'g,  x0 = (r0 - c'N_aa^{-1} r_a)/s,  x_a = N_aa^{-1} r_a - g x0.
    """

    def __init__(self, system: StackedSystem):
        self.system = system
        x = system.regressor
        weighted = sparse.diags(system.row_weights) @ x
        normal = (x.T @ weighted).tocsr()
        self.rhs = np.asarray(weighted.T @ system.response).ravel()

        q, m = system.q, system.n_columns - 1
        self.n00 = float(normal[0, 0])
        self.c = normal[1:, 0].toarray().ravel()
        block = normal[1:, 1:].todia()
        self.bandwidth = q

        band = np.zeros((q + 1, m))
        for k in range(q + 1):
            band[k, :m - k] = block.diagonal(-k)
        self.band = band

        try:
            self.factor = cholesky_banded(band, lower=True)
        except LinAlgError as exc:
            raise NumericError(f"Normal matrix is not positive definite: {exc}") from None

        pivots = self.factor[0] ** 2
        smallest = float(pivots.min())
        if smallest <= np.finfo(float).eps * float(pivots.max()):
            raise NumericError(f"Numerically singular normal matrix (smallest pivot {smallest:.3e})")
        self.smallest_pivot = smallest

        self.g = self.solve_block(self.c)
        self.schur = self.n00 - self.c @ self.g
        if self.schur <= np.finfo(float).eps * max(self.n00, 1.0):
            raise NumericError(f"Intercept is not identified (Schur pivot {self.schur:.3e})")

    def solve_block(self, rhs: np.ndarray) -> np.ndarray:
        return cho_solve_banded((self.factor, True), rhs)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve N x = rhs for a vector or an (n_columns x k) matrix."""
        rhs = np.asarray(rhs, dtype=float)
        ya = self.solve_block(rhs[1:])
        x0 = (rhs[0] - self.c @ ya) / self.schur
        xa = ya - np.multiply.outer(self.g, x0)
        if rhs.ndim == 1:
            return np.concatenate(([x0], xa))
        return np.vstack([x0[None, :], xa])

    def diagonal_blocks(self) -> np.ndarray:
        """Diagonal q x q blocks of N_aa^{-1} by the forward/backward block recursion."""
        system = self.system
        q, n = system.q, system.n_periods
        w = system.row_weights[n:].reshape(n, q)
        z = system.lags

        d = np.einsum("ti,tj->tij", z, z)
        d[:, np.arange(q), np.arange(q)] += w
        d[:-1, np.arange(q), np.arange(q)] += w[1:]

        s_inv = np.empty((n, q, q))
        s = d[0]
        s_inv[0] = np.linalg.inv(s)
        for t in range(1, n):
            s = d[t] - w[t][:, None] * s_inv[t - 1] * w[t][None, :]
            s_inv[t] = np.linalg.inv(s)

        blocks = np.empty((n, q, q))
        blocks[-1] = s_inv[-1]
        for t in range(n - 2, -1, -1):
            link = s_inv[t] * w[t + 1][None, :]
            blocks[t] = s_inv[t] + link @ blocks[t + 1] @ link.T
        return 0.5 * (blocks + np.transpose(blocks, (0, 2, 1)))

    def dense_inverse(self) -> np.ndarray:
        return self.solve(np.eye(self.system.n_columns))


def _bartlett_matrix(n: int, bandwidth: int) -> sparse.csr_matrix:
    offsets = np.arange(-bandwidth, bandwidth + 1)
    weights = 1.0 - np.abs(offsets) / (bandwidth + 1.0)
    return sparse.diags([np.full(n - abs(k), wk) for k, wk in zip(offsets, weights)], offsets).tocsr()


def _hac_blocks(normal: NormalEquations, residuals: np.ndarray, bandwidth: int):
    """
    Sandwich N^{-1} S N^{-1} per period. Observation scores are pooled with
    Bartlett weights across periods; state-row scores enter as outer products.
    """
    system = normal.system
    q, n = system.q, system.n_periods
    x = system.regressor
    weighted_resid = system.row_weights * residuals

    scores = sparse.diags(weighted_resid) @ x
    obs_scores = scores[:n]
    state_scores = scores[n:]

    y_obs = normal.solve(obs_scores.T.toarray())
    kernel = _bartlett_matrix(n, bandwidth)
    y_obs_k = (kernel @ y_obs.T).T
    a = y_obs[1:].reshape(n, q, n)
    ak = y_obs_k[1:].reshape(n, q, n)
    blocks = np.einsum("tiu,tju->tij", a, ak)
    intercept_var = float(y_obs[0] @ y_obs_k[0])

    y_state = normal.solve(state_scores.T.toarray())
    r = y_state[1:].reshape(n, q, -1)
    blocks += np.einsum("tiu,tju->tij", r, r)
    intercept_var += float(y_state[0] @ y_state[0])

    return 0.5 * (blocks + np.transpose(blocks, (0, 2, 1))), intercept_var


def _point_solve(system: StackedSystem):
    normal = NormalEquations(system)
    beta = normal.solve(normal.rhs)
    residuals = system.response - system.regressor @ beta
    return normal, beta, residuals


def solve_stacked(system: StackedSystem, hac: bool = False,
                  hac_bandwidth: Union[int, str] = AUTO_BANDWIDTH, iterations: int = 0,
                  keep_full_covariance: bool = False) -> TvarFit:
    """
    Solve the weighted normal equations of a stacked TV-AR system.

    Args:
        system: Output of build_stacked
        hac: Replace the model-based per-period covariances by a Newey-West sandwich
        hac_bandwidth: Bartlett truncation lag for the sandwich ("auto" rule by default)
        iterations: Feasible-GLS passes re-estimating each coefficient's state
            variance ratio from the smoothed state residuals (0 = single pass)
        keep_full_covariance: Also return the dense (1+qT) x (1+qT) covariance

    Returns:
        TvarFit
    """
    if iterations < 0:
        raise ConfigurationError(f"iterations must be nonnegative, got {iterations}")

    normal, beta, residuals = _point_solve(system)
    for _ in range(iterations):
        n = system.n_periods
        sigma2 = float(system.row_weights @ residuals ** 2) / (n - 1)
        steps = residuals[n:].reshape(n, system.q)[1:]
        lam = np.maximum(np.mean(steps ** 2, axis=0) / sigma2, 1e-12)
        system = _assemble(system.dates, system.observations, system.lags, system.prior,
                           lam, system.prior_weight)
        normal, beta, residuals = _point_solve(system)

    q, n = system.q, system.n_periods
    sigma2 = float(system.row_weights @ residuals ** 2) / (n - 1)
    paths = beta[1:].reshape(n, q).T

    conditional = normal.diagonal_blocks()
    g = normal.g.reshape(n, q)
    model_blocks = conditional + np.einsum("ti,tj->tij", g, g) / normal.schur

    if hac:
        bandwidth = newey_west_bandwidth(n) if hac_bandwidth == AUTO_BANDWIDTH else int(hac_bandwidth)
        covariances, intercept_var = _hac_blocks(normal, residuals, bandwidth)
    else:
        bandwidth = None
        covariances, intercept_var = sigma2 * model_blocks, sigma2 / normal.schur

    full = sigma2 * normal.dense_inverse() if keep_full_covariance else None

    if not np.all(np.isfinite(paths)):
        raise NumericError("Non-finite coefficient paths")

    return TvarFit(
        intercept=float(beta[0]),
        intercept_se=float(np.sqrt(max(intercept_var, 0.0))),
        paths=paths,
        covariances=covariances,
        conditional_covariances=sigma2 * conditional,
        residuals=residuals[:n],
        state_residuals=residuals[n:].reshape(n, q),
        lam=system.lam,
        prior=system.prior,
        prior_weight=system.prior_weight,
        sigma2=sigma2,
        dates=system.dates,
        hac=hac,
        hac_bandwidth=bandwidth,
        iterations=iterations,
        full_covariance=full,
    )


def smoother_weights(system: StackedSystem, fit: Optional[TvarFit] = None, coefficient: int = 1,
                     tau: Optional[int] = None, full_block: bool = False) -> SmootherWeights:
    """
    Window width and weights of the smoother for one coefficient at one period.

    The estimator is beta_hat = Q [x; gamma] with Q = (X'Omega X)^{-1} X'Omega. The
    row of Q for alpha_{coefficient, tau}, restricted to observation columns,
    gives the weights w_t; m(s) is their cumulative absolute mass and M = m(T).

    Args:
        system: Stacked system the fit was solved from
        fit: Fit solved from ``system`` (checked for consistency)
        coefficient: Coefficient number l (1..q)
        tau: Anchor period (1..T), default floor(T/2)
        full_block: Also return the T x T block of the permuted estimator matrix

    Returns:
        SmootherWeights
    """
    n = system.n_periods
    if tau is None:
        tau = n // 2
    if not 1 <= tau <= n:
        raise ConfigurationError(f"tau must be in 1..{n}, got {tau}")
    if not 1 <= coefficient <= system.q:
        raise ConfigurationError(f"coefficient must be in 1..{system.q}, got {coefficient}")
    if fit is not None and fit.paths.shape != (system.q, n):
        raise ConfigurationError("TvarFit does not match the stacked system")

    normal = NormalEquations(system)
    obs = system.regressor[:n]

    unit = np.zeros(system.n_columns)
    unit[system.column(coefficient, tau)] = 1.0
    weights = obs @ normal.solve(unit)

    q_tilde = None
    if full_block:
        selector = np.zeros((system.n_columns, n))
        selector[system.layout[coefficient - 1], np.arange(n)] = 1.0
        q_tilde = np.asarray((obs @ normal.solve(selector)).T)

    cumulative = np.cumsum(np.abs(weights))
    total = cumulative[-1]
    if total <= 0:
        raise NumericError("Smoother weights have no mass")
    s1 = int(np.argmax(cumulative > WINDOW_LOWER * total)) + 1
    s2 = int(np.argmax(cumulative >= WINDOW_UPPER * total)) + 1

    return SmootherWeights(coefficient=coefficient, tau=tau, weights=np.asarray(weights),
                           cumulative=cumulative, s1=s1, s2=s2, q_tilde=q_tilde)


def kalman_oracle(returns, q: int, prior: Optional[Sequence[float]], prior_cov: np.ndarray,
                  lam, obs_var: float = 1.0, intercept: Optional[float] = None) -> KalmanOracleResult:
    """
    Classical filter + RTS smoother for the same TV-AR model.

    The intercept is concentrated out in two steps: it is taken from the stacked
    solve (or given explicitly), subtracted from the data, and the remaining
    random-walk-coefficient regression is smoothed. The concentration step reads
    the prior precision off the mean diagonal of ``prior_cov``.

    Args:
        returns: ReturnSeries or array
        q: Autoregressive order
        prior: Prior mean of the first state (default: whole-sample OLS slopes)
        prior_cov: q x q covariance of the first state
        lam: State step variance relative to obs_var (scalar or per coefficient)
        obs_var: Observation noise variance
        intercept: Known intercept; estimated by the stacked solve when None

    Returns:
        KalmanOracleResult (states as q x T, covariances as T x q x q)
    """
    lam = _lambda_vector(lam, q)
    prior = default_prior(returns, q) if prior is None else np.asarray(prior, dtype=float)
    prior_cov = np.asarray(prior_cov, dtype=float)

    if intercept is None:
        prior_weight = float(np.mean(lam) * obs_var / np.mean(np.diag(prior_cov)))
        system = build_stacked(returns, q, prior, lam, prior_weight)
        _, beta, _ = _point_solve(system)
        intercept = float(beta[0])

    y, lags = lag_design(returns, q)
    filtered = kalman_filter(y - intercept, lags, prior, prior_cov, lam * obs_var, obs_var)
    states, covariances = rts_smoother(filtered, lam * obs_var)

    unit = kalman_filter(y - intercept, lags, prior, prior_cov / obs_var, lam, 1.0)
    return KalmanOracleResult(smoothed_states=states.T, smoothed_covariances=covariances,
                              intercept=intercept, loglik=concentrated_loglik(unit))


def lambda_likelihoods(returns, q: int, grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
                       prior: Optional[Sequence[float]] = None, prior_weight: float = 1.0) -> pd.DataFrame:
    """Concentrated prediction-error log likelihood at every grid value."""
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise ConfigurationError("lambda grid is empty")
    prior = default_prior(returns, q) if prior is None else np.asarray(prior, dtype=float)

    rows = []
    for lam in grid:
        oracle = kalman_oracle(returns, q, prior, np.eye(q) * lam / prior_weight, lam)
        rows.append({"lambda": float(lam), "loglik": oracle.loglik, "intercept": oracle.intercept})
    return pd.DataFrame(rows)


def select_lambda(returns, q: int, grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
                  prior: Optional[Sequence[float]] = None, prior_weight: float = 1.0) -> float:
    """
    Pick the grid value maximizing the Gaussian prediction-error likelihood.

    Args:
        returns: ReturnSeries or array
        q: Autoregressive order
        grid: Candidate lambda values
        prior: Prior coefficient vector (default: whole-sample OLS slopes)
        prior_weight: Prior precision relative to a state step

    Returns:
        Selected lambda (first maximizer on ties)
    """
    table = lambda_likelihoods(returns, q, grid, prior, prior_weight)
    if len(table) == 1:
        return float(table["lambda"].iloc[0])
    return float(table["lambda"].iloc[int(np.argmax(table["loglik"].to_numpy()))])


def calibrate_lambda_to_width(returns, q: int, target: int = 144,
                              grid: Optional[Sequence[float]] = None, coefficient: int = 1,
                              prior: Optional[Sequence[float]] = None,
                              prior_weight: float = 1.0) -> pd.DataFrame:
    """
    Window width at tau = floor(T/2) across a lambda grid.

    Args:
        returns: ReturnSeries or array
        q: Autoregressive order
        target: Window width sought (months)
        grid: Candidate lambda values (default: 1e-6..1e2, 10 per decade)
        coefficient: Coefficient whose window is measured

    Returns:
        DataFrame with lambda, width, s1, s2 and distance to target, closest first
    """
    grid = 10.0 ** np.arange(-6.0, 2.01, 0.1) if grid is None else np.asarray(grid, dtype=float)
    prior = default_prior(returns, q) if prior is None else np.asarray(prior, dtype=float)

    rows = []
    for lam in grid:
        system = build_stacked(returns, q, prior, lam, prior_weight)
        window = smoother_weights(system, coefficient=coefficient)
        rows.append({"lambda": float(lam), "width": window.width, "s1": window.s1, "s2": window.s2,
                     "distance": abs(window.width - target)})
    table = pd.DataFrame(rows)
    return table.sort_values(["distance", "lambda"], kind="mergesort").reset_index(drop=True)


def refit(system: StackedSystem, returns, **solve_kwargs) -> TvarFit:
    """Re-estimate on a new series with the system's lambda, prior weight and order."""
    rebuilt = build_stacked(returns, system.q, None, system.lam, system.prior_weight)
    return solve_stacked(rebuilt, **solve_kwargs)


def with_lambda(system: StackedSystem, lam) -> StackedSystem:
    """Same data and prior with a different lambda."""
    return _assemble(system.dates, system.observations, system.lags, system.prior,
                     _lambda_vector(lam, system.q), system.prior_weight)


__all__ = [
    "StackedSystem", "TvarFit", "SmootherWeights", "KalmanOracleResult", "NormalEquations",
    "build_stacked", "solve_stacked", "select_lambda", "lambda_likelihoods", "kalman_oracle",
    "smoother_weights", "calibrate_lambda_to_width", "default_prior", "refit", "with_lambda",
]
