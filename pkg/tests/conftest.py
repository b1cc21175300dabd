import sys
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

PROJECT_ROOT = Path(__file__).resolve().parents[1]
SRC_PATH = PROJECT_ROOT / "src"
SHILLER_PATH = PROJECT_ROOT / "data" / "shiller_monthly.csv"

for path in (SRC_PATH, PROJECT_ROOT):
    if str(path) not in sys.path:
        sys.path.insert(0, str(path))

from data_generator import random_walk_paths, simulate_ar, simulate_tvar  # noqa: E402
from data_loader import returns_from_values  # noqa: E402

requires_shiller = pytest.mark.skipif(not SHILLER_PATH.exists(),
                                      reason="data/shiller_monthly.csv not available")


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)


@pytest.fixture
def ar2_returns(rng):
    """300 monthly returns from a constant AR(2)."""
    values = simulate_ar([0.3, -0.1], 300, rng, intercept=0.002, sigma=0.04)
    return returns_from_values(values, start="1950-01")


@pytest.fixture
def tvar_returns():
    """200 returns from a random-walk-coefficient AR(2), with two presample values."""
    rng = np.random.default_rng(7)
    paths = random_walk_paths([0.3, -0.1], 200, 1e-3, rng, bound=0.8)
    presample = rng.normal(0.0, 1.0, 2)
    values = simulate_tvar(paths, rng, intercept=0.1, sigma=1.0, presample=presample)
    return returns_from_values(values, start="1990-01", presample=presample)


@pytest.fixture
def price_file(tmp_path):
    """Small Shiller-style price file (YYYY.MM dates) from a synthetic AR(2)."""
    rng = np.random.default_rng(11)
    returns = simulate_ar([0.3, -0.08], 299, rng, intercept=0.003, sigma=0.04)
    prices = 100.0 * np.exp(np.concatenate(([0.0], np.cumsum(returns))))
    months = pd.period_range("1950-01", periods=300, freq="M")
    path = tmp_path / "prices.csv"
    pd.DataFrame({"Date": months.strftime("%Y.%m"), "P": prices}).to_csv(path, index=False)
    return path
