"""
Synthetic return generator

Simulates monthly log returns from constant and time-varying autoregressions
so the pipeline, the oracle checks and the Monte Carlo suites can run without
the historical price file.
"""

from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from errors import ConfigurationError


def simulate_ar(coefs: Sequence[float], n: int, rng: np.random.Generator,
                intercept: float = 0.0, sigma: float = 1.0, burn: int = 200) -> np.ndarray:
    """
    Simulate a constant-coefficient AR(q) process.

    Args:
        coefs: AR coefficients alpha_1..alpha_q (may be empty for white noise)
        n: Number of observations to return
        rng: Random generator
        intercept: Constant term alpha_0
        sigma: Innovation standard deviation
        burn: Leading observations discarded to forget the zero start

    Returns:
        Array of length n
    """
    coefs = np.asarray(coefs, dtype=float)
    q = coefs.size
    total = n + burn
    noise = rng.normal(0.0, sigma, total)
    x = np.zeros(total + q)
    for t in range(total):
        lags = x[t:t + q][::-1]
        x[t + q] = intercept + coefs @ lags + noise[t]
    return x[q + burn:]


def simulate_tvar(paths: np.ndarray, rng: np.random.Generator, intercept: float = 0.0,
                  sigma: float = 1.0, presample: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Simulate x_t = alpha_0 + sum_l alpha_{l,t} x_{t-l} + u_t for given coefficient paths.

    Args:
        paths: q x T matrix of coefficient paths
        rng: Random generator
        intercept: Constant alpha_0
        sigma: Innovation standard deviation
        presample: Optional x_0, x_{-1}, ... (most recent first); zeros by default

    Returns:
        Array of length T
    """
    paths = np.atleast_2d(np.asarray(paths, dtype=float))
    q, n = paths.shape
    lags = np.zeros(q) if presample is None else np.asarray(presample[:q], dtype=float).copy()
    noise = rng.normal(0.0, sigma, n)
    x = np.empty(n)
    for t in range(n):
        x[t] = intercept + paths[:, t] @ lags + noise[t]
        lags = np.concatenate(([x[t]], lags[:-1]))
    return x


def random_walk_paths(start: Sequence[float], n: int, lam, rng: np.random.Generator,
                      bound: float = 0.9, max_tries: int = 1000) -> np.ndarray:
    """
    Draw random-walk coefficient paths whose local AR stays comfortably stationary.

    Paths with any |alpha_{l,t}| above ``bound`` or a local sum above ``bound``
    are redrawn.

    Args:
        start: Initial coefficient vector
        n: Number of periods
        lam: State step variance (scalar or one per coefficient)
        rng: Random generator
        bound: Stationarity margin

    Returns:
        q x n matrix of paths
    """
    start = np.asarray(start, dtype=float)
    q = start.size
    scale = np.sqrt(np.broadcast_to(np.asarray(lam, dtype=float), (q,)))
    for _ in range(max_tries):
        steps = rng.normal(0.0, 1.0, (q, n)) * scale[:, None]
        paths = start[:, None] + np.cumsum(steps, axis=1)
        if np.all(np.abs(paths) < bound) and np.all(np.abs(paths.sum(axis=0)) < bound):
            return paths
    raise ConfigurationError("Could not draw a stationary coefficient path; lower lam or bound")


def simulate_random_walk(n: int, rng: np.random.Generator, sigma: float = 1.0) -> np.ndarray:
    """Simulate a driftless random walk of length n."""
    return np.cumsum(rng.normal(0.0, sigma, n))


class SyntheticPriceGenerator:
    """Generate a synthetic monthly index whose returns follow a TV-AR(2)."""

    # Configuration constants
    N_MONTHS = 600
    START_MONTH = "1950-01"
    START_LEVEL = 100.0
    INTERCEPT = 0.003
    SIGMA = 0.04
    START_COEFS = (0.30, -0.08)
    STATE_VARIANCE = 2e-4

    def __init__(self, n_months: int = N_MONTHS, random_seed: int = 7):
        """
        Initialize the generator.

        Args:
            n_months: Number of monthly prices to generate
            random_seed: Random seed for reproducibility
        """
        self.n_months = n_months
        self.rng = np.random.default_rng(random_seed)

    def generate_returns(self) -> np.ndarray:
        paths = random_walk_paths(self.START_COEFS, self.n_months - 1, self.STATE_VARIANCE, self.rng)
        return simulate_tvar(paths, self.rng, intercept=self.INTERCEPT, sigma=self.SIGMA)

    def generate(self) -> pd.DataFrame:
        """
        Generate the synthetic price table.

        Returns:
            DataFrame with Date (YYYY.MM) and P columns
        """
        returns = self.generate_returns()
        levels = self.START_LEVEL * np.exp(np.concatenate(([0.0], np.cumsum(returns))))
        months = pd.period_range(self.START_MONTH, periods=self.n_months, freq="M")
        return pd.DataFrame({"Date": months.strftime("%Y.%m"), "P": levels})

    @staticmethod
    def save_to_csv(df: pd.DataFrame, filepath: str = "data/synthetic_monthly.csv") -> None:
        output_path = Path(filepath)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        df.to_csv(output_path, index=False, float_format="%.10g")


def generate_sample_dataset(n_months: int = 600, output_path: str = "data/synthetic_monthly.csv",
                            random_seed: int = 7) -> pd.DataFrame:
    """
    Convenience function to generate and save a synthetic monthly price file.

    Args:
        n_months: Number of monthly prices
        output_path: Output file path
        random_seed: Random seed

    Returns:
        Generated DataFrame
    """
    generator = SyntheticPriceGenerator(n_months=n_months, random_seed=random_seed)
    df = generator.generate()
    generator.save_to_csv(df, output_path)
    return df
