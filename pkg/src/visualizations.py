"""
Static SVG figures for the pipeline artifacts
"""

from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
import seaborn as sns  # noqa: E402

from data_loader import load_csv  # noqa: E402
from errors import ConfigurationError  # noqa: E402

LINE_WITH_BAND = "line_with_band"
SURFACE_LONG_FORMAT = "surface_long_format"
SPECTRUM_PANEL = "spectrum_panel"

REQUIRED_COLUMNS = {
    LINE_WITH_BAND: ("date", "phi", "lower", "upper"),
    SURFACE_LONG_FORMAT: ("date", "horizon", "beta"),
    SPECTRUM_PANEL: ("frequency", "density"),
}

FIGURE_SIZE = (10, 6)
FONT_SIZE = 11

# Fixed SVG ids and no timestamp, so identical data gives identical files.
plt.rcParams["svg.hashsalt"] = "tv-market-efficiency"
SAVE_METADATA = {"Date": None}


def _load(artifact: Union[str, Path, pd.DataFrame]) -> pd.DataFrame:
    if isinstance(artifact, pd.DataFrame):
        return artifact
    path = Path(artifact)
    if not path.exists():
        raise ConfigurationError(f"Artifact not found: {path}")
    return load_csv(path)


def check_schema(df: pd.DataFrame, kind: str) -> None:
    if kind not in REQUIRED_COLUMNS:
        raise ConfigurationError(f"Unknown plot kind {kind!r}; choose from {', '.join(REQUIRED_COLUMNS)}")
    missing = [column for column in REQUIRED_COLUMNS[kind] if column not in df.columns]
    if missing:
        raise ConfigurationError(f"Artifact does not match {kind}: missing columns {missing}")


def _month_axis(labels: pd.Series) -> pd.DatetimeIndex:
    return pd.PeriodIndex(labels, freq="M").to_timestamp()


def _save(fig, output_path: Union[str, Path]) -> Path:
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(output_path, format="svg", metadata=SAVE_METADATA)
    plt.close(fig)
    return output_path


def _line_with_band(df: pd.DataFrame, ax, events: Optional[pd.DataFrame]) -> None:
    dates = _month_axis(df["date"])
    ax.plot(dates, df["phi"], color="black", linewidth=1.2, label="long-run multiplier")
    ax.plot(dates, df["lower"], color="black", linestyle="--", linewidth=0.7, label="confidence band")
    ax.plot(dates, df["upper"], color="black", linestyle="--", linewidth=0.7)
    if "trend" in df.columns:
        ax.plot(dates, df["trend"], color="#1f77b4", linewidth=2.0, label="HP trend")
    ax.axhline(1.0, color="grey", linewidth=0.8)
    if events is not None and len(events):
        event_dates = _month_axis(events["date"])
        for when in event_dates:
            if dates[0] <= when <= dates[-1]:
                ax.axvline(when, color="#d62728", alpha=0.25, linewidth=0.8)
    ax.set_xlabel("Month", fontsize=FONT_SIZE, fontweight="bold")
    ax.set_ylabel("Long-run multiplier", fontsize=FONT_SIZE, fontweight="bold")
    ax.legend(loc="upper right", frameon=False)
    ax.grid(True, alpha=0.3, linestyle="--")


def _surface(df: pd.DataFrame, ax) -> None:
    table = df.pivot(index="date", columns="horizon", values="beta").sort_index()
    step = max(1, len(table) // 12)
    sns.heatmap(table, ax=ax, cmap="RdBu_r", center=0.0, yticklabels=step,
                cbar_kws={"label": "interim multiplier"})
    ax.collections[0].set_rasterized(True)
    ax.set_xlabel("Horizon (months)", fontsize=FONT_SIZE, fontweight="bold")
    ax.set_ylabel("Month", fontsize=FONT_SIZE, fontweight="bold")


def _spectrum(df: pd.DataFrame, ax, ci_factor: Optional[Tuple[float, float]]) -> None:
    frequency = df["frequency"].to_numpy(dtype=float)
    density = np.clip(df["density"].to_numpy(dtype=float), np.finfo(float).tiny, None)
    ax.semilogy(frequency, density, color="black", linewidth=1.0)
    if ci_factor is not None:
        # Cross: vertical extent is the confidence interval of any ordinate.
        x = frequency[0] + 0.85 * (frequency[-1] - frequency[0])
        y = float(np.exp(np.mean(np.log(density))))
        ax.plot([x, x], [y * ci_factor[0], y * ci_factor[1]], color="#1f77b4", linewidth=1.5)
        ax.plot([x - 0.01, x + 0.01], [y, y], color="#1f77b4", linewidth=1.5)
    ax.set_xlabel("Frequency (cycles per month)", fontsize=FONT_SIZE, fontweight="bold")
    ax.set_ylabel("Spectral density", fontsize=FONT_SIZE, fontweight="bold")
    ax.grid(True, alpha=0.3, linestyle="--")


def emit_plot(artifact: Union[str, Path, pd.DataFrame], kind: str, output_path: Union[str, Path],
              title: Optional[str] = None, events: Optional[pd.DataFrame] = None,
              ci_factor: Optional[Tuple[float, float]] = None) -> Path:
    """
    Render one columnar artifact as an SVG file.

    Args:
        artifact: CSV path or DataFrame
        kind: "line_with_band", "surface_long_format" or "spectrum_panel"
        output_path: Target .svg path
        title: Figure title
        events: Optional table with a date column, drawn as vertical markers (line plots)
        ci_factor: Multiplicative confidence factors drawn as a cross (spectra)

    Returns:
        Path of the written file
    """
    df = _load(artifact)
    check_schema(df, kind)

    fig, ax = plt.subplots(figsize=FIGURE_SIZE)
    if kind == LINE_WITH_BAND:
        _line_with_band(df, ax, events)
    elif kind == SURFACE_LONG_FORMAT:
        _surface(df, ax)
    else:
        _spectrum(df, ax, ci_factor)
    if title:
        ax.set_title(title, fontsize=13, fontweight="bold", pad=20)
    return _save(fig, output_path)


def plot_coefficient_paths(tvar_frame: pd.DataFrame, output_path: Union[str, Path],
                           whole_sample: Optional[Sequence[float]] = None) -> Path:
    """TV-AR coefficient paths with +/-2 se bands; whole-sample estimates as dotted lines."""
    q = sum(1 for column in tvar_frame.columns if column.startswith("alpha_"))
    dates = _month_axis(tvar_frame["date"])
    fig, axes = plt.subplots(q, 1, figsize=(FIGURE_SIZE[0], 3 * q), sharex=True, squeeze=False)
    for ell in range(1, q + 1):
        ax = axes[ell - 1, 0]
        path = tvar_frame[f"alpha_{ell}"].to_numpy(dtype=float)
        se = tvar_frame[f"se_{ell}"].to_numpy(dtype=float)
        ax.plot(dates, path, color="black", linewidth=1.0)
        ax.fill_between(dates, path - 2 * se, path + 2 * se, color="grey", alpha=0.3, linewidth=0)
        if whole_sample is not None:
            ax.axhline(whole_sample[ell - 1], color="black", linestyle=":", linewidth=1.0)
        ax.axhline(0.0, color="grey", linewidth=0.6)
        ax.set_ylabel(f"alpha_{ell}", fontsize=FONT_SIZE, fontweight="bold")
        ax.grid(True, alpha=0.3, linestyle="--")
    axes[-1, 0].set_xlabel("Month", fontsize=FONT_SIZE, fontweight="bold")
    return _save(fig, output_path)


def plot_smoother_weights(weights: pd.DataFrame, output_path: Union[str, Path]) -> Path:
    """Observation weights of one smoothed coefficient, window shaded."""
    fig, ax = plt.subplots(figsize=FIGURE_SIZE)
    period = weights["period"].to_numpy()
    ax.plot(period, weights["weight"], color="black", linewidth=1.0)
    inside = weights["in_window"].astype(bool).to_numpy()
    if inside.any():
        ax.axvspan(period[inside][0], period[inside][-1], color="grey", alpha=0.2)
    ax.set_xlabel("Period", fontsize=FONT_SIZE, fontweight="bold")
    ax.set_ylabel("Weight", fontsize=FONT_SIZE, fontweight="bold")
    ax.grid(True, alpha=0.3, linestyle="--")
    return _save(fig, output_path)


def plot_returns(returns: pd.DataFrame, output_path: Union[str, Path]) -> Path:
    fig, ax = plt.subplots(figsize=FIGURE_SIZE)
    ax.plot(_month_axis(returns["date"]), returns["return"], color="black", linewidth=0.6)
    ax.set_xlabel("Month", fontsize=FONT_SIZE, fontweight="bold")
    ax.set_ylabel("Log return", fontsize=FONT_SIZE, fontweight="bold")
    ax.grid(True, alpha=0.3, linestyle="--")
    return _save(fig, output_path)
