"""
Data loading, return construction and descriptive statistics for monthly index prices
"""

import io
import re
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Optional, Union

import numpy as np
import pandas as pd

from errors import ConfigurationError, DataError

# Float format used for every columnar artifact; round-trips doubles exactly.
FLOAT_FORMAT = "%.17g"

_MONTH_PATTERN = re.compile(r"^\s*(\d{4})[-.](\d{1,2})(?:[-.]\d{1,2})?\s*$")


@dataclass(frozen=True)
class PriceSeries:
    """Contiguous monthly index levels."""

    dates: pd.PeriodIndex
    prices: np.ndarray

    def __len__(self) -> int:
        return len(self.prices)


@dataclass(frozen=True)
class ReturnSeries:
    """Monthly log returns, dated at the later month of each price pair.

    ``presample`` optionally holds x_0, x_{-1}, ... (most recent first) for
    conditioning autoregressions without dropping observations.
    """

    dates: pd.PeriodIndex
    values: np.ndarray
    presample: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self.values)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"date": self.dates.strftime("%Y-%m"), "return": self.values})


@dataclass(frozen=True)
class DescriptiveStats:
    mean: float
    sd: float
    min: float
    max: float
    n: int

    def to_dict(self) -> dict:
        return {"mean": self.mean, "sd": self.sd, "min": self.min, "max": self.max, "n": self.n}


def parse_month(text: str) -> pd.Period:
    """
    Parse a month label written as YYYY-MM or YYYY.MM.

    The label is handled as a string: ``1871.1`` is January and ``1871.10`` is
    October, which is how the Shiller spreadsheet writes its dates.

    Args:
        text: Month label

    Returns:
        Monthly period
    """
    match = _MONTH_PATTERN.match(str(text))
    if not match:
        raise DataError(f"Unparsable month label: {text!r}")
    year, month = int(match.group(1)), int(match.group(2))
    if not 1 <= month <= 12:
        raise DataError(f"Month out of range in label: {text!r}")
    return pd.Period(year=year, month=month, freq="M")


def _read_table(source: Union[str, Path, IO[str]], delimiter: Optional[str]) -> pd.DataFrame:
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text()
    if delimiter is None:
        header = text.splitlines()[0] if text else ""
        delimiter = "\t" if "\t" in header else ","
    return pd.read_csv(io.StringIO(text), sep=delimiter, dtype=str, skipinitialspace=True)


def load_prices(source: Union[str, Path, IO[str]], date_column: str = "Date",
                price_column: str = "P", delimiter: Optional[str] = None,
                start: Optional[str] = None, end: Optional[str] = None) -> PriceSeries:
    """
    Load a monthly price series from delimiter-separated text.

    Args:
        source: File path or text stream with a header row
        date_column: Name of the month column
        price_column: Name of the index level column
        delimiter: Field separator (default: tab when the header has one, else comma)
        start: Optional first month to keep (inclusive, YYYY-MM)
        end: Optional last month to keep (inclusive, YYYY-MM)

    Returns:
        PriceSeries with contiguous months
    """
    df = _read_table(source, delimiter)
    df.columns = [str(col).strip() for col in df.columns]

    missing = {date_column, price_column}.difference(df.columns)
    if missing:
        raise ConfigurationError(f"Missing required columns for price loading: {sorted(missing)}")

    df = df[[date_column, price_column]].dropna(how="all")
    # 1-based data row numbers, header excluded
    rows = df.index.to_numpy() + 1
    periods = []
    for row, label in zip(rows, df[date_column]):
        try:
            periods.append(parse_month(label))
        except DataError as exc:
            raise DataError(f"Row {row}: {exc}") from None

    ordinals = np.array([period.ordinal for period in periods], dtype=np.int64)
    backwards = np.flatnonzero(np.diff(ordinals) <= 0)
    if backwards.size:
        k = int(backwards[0])
        raise DataError(f"Row {rows[k + 1]}: month {periods[k + 1]} does not follow {periods[k]}; "
                        "dates must be strictly increasing")
    df = df.assign(_period=periods, _row=rows)

    if start is not None:
        df = df[df["_period"] >= parse_month(start)]
    if end is not None:
        df = df[df["_period"] <= parse_month(end)]

    prices = np.empty(len(df))
    for i, (row, label, raw) in enumerate(zip(df["_row"], df[date_column], df[price_column])):
        try:
            value = float(str(raw).replace(",", ""))
        except ValueError:
            raise DataError(f"Row {row}: unparsable price {raw!r} ({label})") from None
        if not np.isfinite(value) or value <= 0:
            raise DataError(f"Row {row}: non-positive or missing price {raw!r} ({label})")
        prices[i] = value

    dates = pd.PeriodIndex(df["_period"].tolist(), freq="M")
    if len(dates) < 2:
        raise DataError(f"Need at least 2 monthly prices, got {len(dates)}")

    ordinals = dates.asi8
    steps = np.diff(ordinals)
    if np.any(steps != 1):
        k = int(np.flatnonzero(steps != 1)[0])
        raise DataError(f"Month gap between {dates[k]} and {dates[k + 1]}")

    return PriceSeries(dates=dates, prices=prices)


def log_returns(prices: PriceSeries) -> ReturnSeries:
    """
    Take the log first difference of a price series.

    Args:
        prices: Contiguous monthly prices

    Returns:
        ReturnSeries of length len(prices) - 1 dated at the later month
    """
    if len(prices) < 2:
        raise DataError("Need at least 2 prices to form a return")
    values = np.diff(np.log(prices.prices))
    return ReturnSeries(dates=prices.dates[1:], values=values)


def returns_from_values(values, start: str = "2000-01",
                        presample: Optional[np.ndarray] = None) -> ReturnSeries:
    """Wrap a plain array as a monthly ReturnSeries starting at ``start``."""
    values = np.asarray(values, dtype=float)
    dates = pd.period_range(start=parse_month(start), periods=len(values), freq="M")
    return ReturnSeries(dates=dates, values=values, presample=presample)


def describe(returns: ReturnSeries) -> DescriptiveStats:
    """
    Compute the descriptive statistics reported for the return series.

    Args:
        returns: Nonempty return series

    Returns:
        Mean, sample standard deviation (n - 1 divisor), min, max and count
    """
    x = np.asarray(returns.values, dtype=float)
    if x.size == 0:
        raise DataError("Cannot describe an empty series")
    sd = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    return DescriptiveStats(mean=float(np.mean(x)), sd=sd, min=float(np.min(x)),
                            max=float(np.max(x)), n=int(x.size))


def load_returns(filepath: Union[str, Path]) -> ReturnSeries:
    """Read a return series written by ``save_csv(returns.to_frame(), ...)``."""
    df = load_csv(filepath)
    dates = pd.PeriodIndex([parse_month(label) for label in df["date"]], freq="M")
    return ReturnSeries(dates=dates, values=df["return"].to_numpy(dtype=float))


def load_csv(filepath: Union[str, Path]) -> pd.DataFrame:
    """
    Load an artifact written by ``save_csv``.

    Floats are parsed with the round-trip parser so reloaded values are
    bit-identical to the ones saved; a ``date`` column stays text.

    Args:
        filepath: Path to the CSV file

    Returns:
        DataFrame containing the loaded data
    """
    return pd.read_csv(filepath, dtype={"date": str}, float_precision="round_trip")


def save_csv(df: pd.DataFrame, filepath: Union[str, Path]) -> None:
    """
    Save DataFrame to CSV file with exact float formatting.

    Args:
        df: DataFrame to save
        filepath: Output file path
    """
    Path(filepath).parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(filepath, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
