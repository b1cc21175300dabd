"""
Pipeline stages and run manifest

Stages run in a fixed order (ingest, stationarity, arstatic, tvar, efficiency,
spectral). Each one reads what earlier stages left in a PipelineState or, when
run alone, in the output directory, writes its columnar artifacts and records
its outputs, key scalars and wall-clock time in the RunManifest.
"""

import json
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from arstatic import bandwidth_table, fit_ar, hansen_lc, ljung_box, select_order_sbic
from config import PipelineConfig
from data_loader import ReturnSeries, describe, load_csv, load_prices, load_returns, log_returns, save_csv
from efficiency import MultiplierPath, joint_test_distribution, multiplier_path
from errors import DataError, EfficiencyError, NumericError, StageError
from spectral import ar_spectrum, dominant_period, hp_filter, periodogram
from stationarity import adf_gls_test
from tvar import (TvarFit, build_stacked, calibrate_lambda_to_width, lambda_likelihoods,
                  smoother_weights, solve_stacked)

LIBRARY_VERSION = "0.1.0"

STAGES = ("ingest", "stationarity", "arstatic", "tvar", "efficiency", "spectral")

RETURNS_FILE = "returns.csv"
TVAR_FRAME_FILE = "tvar_fit.csv"
TVAR_SUMMARY_FILE = "tvar_fit.json"
LONGRUN_FILE = "longrun_multiplier.csv"
SURFACE_FILE = "interim_surface.csv"
MANIFEST_FILE = "manifest.json"


@dataclass
class StageRecord:
    name: str
    outputs: List[str] = field(default_factory=list)
    seconds: float = 0.0
    status: str = "pending"


@dataclass
class RunManifest:
    """Reproducibility record of a run: config echo, stage outputs, key results."""

    config: dict
    version: str = LIBRARY_VERSION
    started: str = ""
    stages: List[StageRecord] = field(default_factory=list)
    results: Dict[str, dict] = field(default_factory=dict)

    def stage(self, name: str) -> StageRecord:
        for record in self.stages:
            if record.name == name:
                return record
        record = StageRecord(name=name)
        self.stages.append(record)
        return record

    @property
    def completed(self) -> List[str]:
        return [record.name for record in self.stages if record.status == "complete"]

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "started": self.started,
            "config": self.config,
            "stages": [asdict(record) for record in self.stages],
            "results": self.results,
        }

    def save(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as handle:
            json.dump(_jsonable(self.to_dict()), handle, indent=2, sort_keys=True)
            handle.write("\n")
        return path

    @classmethod
    def load(cls, path) -> "RunManifest":
        with open(path) as handle:
            data = json.load(handle)
        manifest = cls(config=data["config"], version=data["version"], started=data["started"],
                       results=data["results"])
        manifest.stages = [StageRecord(**record) for record in data["stages"]]
        return manifest


@dataclass
class PipelineState:
    """In-memory hand-off between stages."""

    returns: Optional[ReturnSeries] = None
    q: Optional[int] = None
    fit: Optional[TvarFit] = None
    path: Optional[MultiplierPath] = None


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if np.isfinite(value) else None
    return value


class Pipeline:
    """Runs the analysis stages for one PipelineConfig."""

    def __init__(self, config: PipelineConfig, verbose: bool = True):
        self.config = config.validate()
        self.verbose = verbose
        self.out = config.output_path
        self.state = PipelineState()
        self.manifest = RunManifest(config=config.to_dict(),
                                    started=datetime.now(timezone.utc).isoformat(timespec="seconds"))
        self._stages: Dict[str, Callable[[StageRecord], None]] = {
            "ingest": self.ingest,
            "stationarity": self.stationarity,
            "arstatic": self.arstatic,
            "tvar": self.tvar,
            "efficiency": self.efficiency,
            "spectral": self.spectral,
        }

    def log(self, message: str = "") -> None:
        if self.verbose:
            print(message)

    def _write(self, record: StageRecord, df: pd.DataFrame, name: str) -> Path:
        path = self.out / name
        save_csv(df, path)
        record.outputs.append(name)
        self.log(f"  ✓ Saved: {path}")
        return path

    def _write_json(self, record: StageRecord, payload: dict, name: str) -> Path:
        path = self.out / name
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as handle:
            json.dump(_jsonable(payload), handle, indent=2, sort_keys=True)
            handle.write("\n")
        record.outputs.append(name)
        self.log(f"  ✓ Saved: {path}")
        return path

    # ------------------------------------------------------------------ stages

    def ingest(self, record: StageRecord) -> None:
        cfg = self.config
        self.log(f"📂 Loading prices from {cfg.input_path}...")
        prices = load_prices(cfg.input_path, cfg.date_column, cfg.price_column, cfg.delimiter,
                             cfg.start, cfg.end)
        returns = log_returns(prices)
        stats = describe(returns)
        self.state.returns = returns
        self._write(record, returns.to_frame(), RETURNS_FILE)
        self.manifest.results["ingest"] = {
            **stats.to_dict(),
            "first_month": str(returns.dates[0]),
            "last_month": str(returns.dates[-1]),
        }
        self.log(f"  ✓ {stats.n} monthly returns, {returns.dates[0]} to {returns.dates[-1]}")

    def stationarity(self, record: StageRecord) -> None:
        cfg = self.config
        returns = self._returns()
        result = adf_gls_test(returns, cfg.adf_max_lag, cfg.adf_criterion, cfg.adf_deterministic)
        self._write(record, pd.DataFrame([result.to_dict()]), "adf_gls.csv")
        self.manifest.results["stationarity"] = result.to_dict()
        self.log(f"  ✓ ADF-GLS = {result.statistic:.4f} (lag {result.lag}, "
                 f"1% critical {result.critical_1pct})")

    def arstatic(self, record: StageRecord) -> None:
        cfg = self.config
        returns = self._returns()
        q = cfg.q if cfg.q is not None else select_order_sbic(returns, cfg.max_q)
        fit = fit_ar(returns, q, cfg.hac_bandwidth)
        lc = hansen_lc(fit, returns)
        lb = ljung_box(fit.residuals, cfg.ljung_box_lags)

        names = ["alpha_0"] + [f"alpha_{i}" for i in range(1, q + 1)]
        table = pd.DataFrame({
            "coefficient": names,
            "estimate": fit.coefficients,
            "se": fit.standard_errors,
            "t": fit.coefficients / fit.standard_errors,
        })
        self._write(record, table, "ar_static.csv")
        self._write(record, bandwidth_table(returns, q), "ar_static_bandwidths.csv")

        self.state.q = q
        self.manifest.results["arstatic"] = {
            **fit.to_dict(),
            "hansen_lc": lc.to_dict(),
            "ljung_box": {"statistic": lb.statistic, "p_value": lb.p_value, "lags": lb.lags},
        }
        coefs = ", ".join(f"{c:.4f}" for c in fit.slopes)
        self.log(f"  ✓ AR({q}) by SBIC: ({coefs}), adj. R2 {fit.adj_r2:.4f}, Lc {lc.statistic:.4f}")

    def tvar(self, record: StageRecord) -> None:
        cfg = self.config
        returns = self._returns()
        q = self._order()

        if cfg.resume_from:
            fit = self._load_fit(Path(cfg.resume_from))
            self.log(f"  ✓ Resumed TV-AR fit from {cfg.resume_from}")
            self.state.fit = fit
            self._write(record, fit.to_frame(), TVAR_FRAME_FILE)
            self._write_json(record, fit.to_dict(), TVAR_SUMMARY_FILE)
            self.manifest.results["tvar"] = {**fit.to_dict(), "resumed_from": cfg.resume_from}
            return

        results = {}
        if cfg.lam is None:
            table = lambda_likelihoods(returns, q, cfg.lambda_grid, prior_weight=cfg.prior_weight)
            self._write(record, table, "lambda_likelihood.csv")
            lam = float(table["lambda"].iloc[int(np.argmax(table["loglik"].to_numpy()))])
            results["lambda_selected_by"] = "likelihood"
            self.log(f"  ✓ lambda = {lam:.3g} by prediction-error likelihood")
        else:
            lam = cfg.lam
            results["lambda_selected_by"] = "config"

        system = build_stacked(returns, q, None, lam, cfg.prior_weight)
        fit = solve_stacked(system, hac=cfg.tvar_hac, hac_bandwidth=cfg.hac_bandwidth,
                            iterations=cfg.iterations)
        self.state.fit = fit
        self._write(record, fit.to_frame(), TVAR_FRAME_FILE)
        self._write_json(record, fit.to_dict(), TVAR_SUMMARY_FILE)

        window = smoother_weights(system, fit)
        self._write(record, window.to_frame(fit.dates), "smoother_weights.csv")

        calibration = calibrate_lambda_to_width(returns, q, cfg.window_target,
                                                prior_weight=cfg.prior_weight)
        self._write(record, calibration, "window_calibration.csv")

        lb = ljung_box(fit.residuals, cfg.ljung_box_lags)
        results.update(fit.to_dict())
        results.update({
            "window": window.to_dict(),
            "window_target": cfg.window_target,
            "lambda_for_target_width": float(calibration["lambda"].iloc[0]),
            "ljung_box": {"statistic": lb.statistic, "p_value": lb.p_value, "lags": lb.lags},
        })
        self.manifest.results["tvar"] = results
        self.log(f"  ✓ TV-AR({q}) on {fit.n_periods} periods, window width {window.width} months")

    def efficiency(self, record: StageRecord) -> None:
        cfg = self.config
        fit = self._fit()
        path = multiplier_path(fit, cfg.horizon, cfg.ci_level)
        self.state.path = path
        self._write(record, path.to_frame(), LONGRUN_FILE)
        self._write(record, path.surface_frame(), SURFACE_FILE)

        boot = joint_test_distribution(fit, self._returns(), cfg.boot_reps, cfg.seed, cfg.workers)
        summary = path.to_dict()
        self.manifest.results["efficiency"] = {**summary, "bootstrap": boot.to_dict()}
        if summary["longrun_min"] is not None:
            self.log(f"  ✓ Long-run multiplier {summary['longrun_min']:.4f} .. {summary['longrun_max']:.4f}")
        self.log(f"  ✓ {summary['n_nonstationary']} non-stationary periods")
        self.log(f"  ✓ Bootstrap p-value {boot.p_value:.4f} ({boot.replications} replications)")

    def spectral(self, record: StageRecord) -> None:
        cfg = self.config
        degree = self._degree()
        dates = pd.period_range(start=degree["date"].iloc[0], periods=len(degree), freq="M")
        values = degree["phi"]
        missing = int(values.isna().sum())
        if missing == len(values):
            raise NumericError("Long-run multiplier is undefined in every period")
        values = values.interpolate(limit_direction="both").to_numpy(dtype=float)

        hp = hp_filter(values, cfg.hp_lambda)
        self._write(record, hp.to_frame(dates), "hp_decomposition.csv")

        targets = {"raw": values}
        if cfg.spectrum_target != "raw":
            targets[cfg.spectrum_target] = hp.trend if cfg.spectrum_target == "trend" else hp.cycle

        summaries = {}
        for label, series in targets.items():
            estimates = {
                "raw": periodogram(series, ci_level=cfg.ci_level),
                "smoothed": periodogram(series, spans=cfg.spans, ci_level=cfg.ci_level),
                "smoothed_wide": periodogram(series, spans=cfg.wide_spans, ci_level=cfg.ci_level),
                "ar": ar_spectrum(series, min(cfg.ar_max_order, len(series) - 11), ci_level=cfg.ci_level),
            }
            for method, estimate in estimates.items():
                self._write(record, estimate.to_frame(), f"spectrum_{label}_{method}.csv")
                summary = estimate.to_dict()
                summary["dominant_period_restricted"] = dominant_period(estimate, cfg.min_period)
                summaries[f"{label}_{method}"] = summary
            self.log(f"  ✓ {label}: dominant period {summaries[f'{label}_smoothed']['dominant_period_restricted']:.0f} months")

        self.manifest.results["spectral"] = {
            "hp_lambda": cfg.hp_lambda,
            "target": cfg.spectrum_target,
            "interpolated_periods": missing,
            "spectra": summaries,
        }

    # ------------------------------------------------------------- artifacts

    def _returns(self) -> ReturnSeries:
        if self.state.returns is None:
            path = self.out / RETURNS_FILE
            if not path.exists():
                raise DataError(f"No return series in memory or at {path}; run the ingest stage")
            self.state.returns = load_returns(path)
        return self.state.returns

    def _order(self) -> int:
        if self.state.q is None:
            if self.config.q is not None:
                self.state.q = self.config.q
            else:
                table = self.out / "ar_static.csv"
                if not table.exists():
                    raise DataError("No AR order available; run the arstatic stage or set q")
                self.state.q = len(load_csv(table)) - 1
        return self.state.q

    def _load_fit(self, directory: Path) -> TvarFit:
        frame_path, summary_path = directory / TVAR_FRAME_FILE, directory / TVAR_SUMMARY_FILE
        if not frame_path.exists() or not summary_path.exists():
            raise DataError(f"No saved TV-AR fit in {directory}")
        frame = load_csv(frame_path)
        with open(summary_path) as handle:
            summary = json.load(handle)
        return TvarFit.from_artifacts(frame, summary)

    def _fit(self) -> TvarFit:
        if self.state.fit is None:
            self.state.fit = self._load_fit(self.out)
        return self.state.fit

    def _degree(self) -> pd.DataFrame:
        if self.state.path is not None:
            return self.state.path.to_frame()
        path = self.out / LONGRUN_FILE
        if not path.exists():
            raise DataError(f"No long-run multiplier path at {path}; run the efficiency stage")
        return load_csv(path)

    # ----------------------------------------------------------------- driver

    def run_stage(self, name: str) -> StageRecord:
        if name not in self._stages:
            raise StageError(name, DataError(f"Unknown stage {name!r}; choose from {', '.join(STAGES)}"))
        record = self.manifest.stage(name)
        record.outputs.clear()
        index = STAGES.index(name) + 1
        self.log(f"\n{'─' * 70}")
        self.log(f"[{index}/{len(STAGES)}] {name}")
        self.log(f"{'─' * 70}")
        started = time.perf_counter()
        try:
            self._stages[name](record)
        except EfficiencyError as exc:
            record.status = "failed"
            raise StageError(name, exc) from exc
        except np.linalg.LinAlgError as exc:
            record.status = "failed"
            raise StageError(name, NumericError(str(exc))) from exc
        except (OSError, ValueError, KeyError) as exc:
            # unreadable files, pandas parser errors and malformed artifacts
            record.status = "failed"
            raise StageError(name, DataError(f"{type(exc).__name__}: {exc}")) from exc
        record.seconds = round(time.perf_counter() - started, 3)
        record.status = "complete"
        self.log(f"  ⏱ {record.seconds:.1f}s")
        return record

    def run(self, stages=STAGES) -> RunManifest:
        started = time.perf_counter()
        self.log("=" * 70)
        self.log("TIME-VARYING MARKET EFFICIENCY PIPELINE")
        self.log("=" * 70)
        try:
            for name in stages:
                self.run_stage(name)
        finally:
            self.manifest.save(self.out / MANIFEST_FILE)
        self.log(f"\n{'=' * 70}")
        self.log(f"✅ Completed {len(self.manifest.completed)} stages in {time.perf_counter() - started:.1f}s")
        self.log(f"Outputs: {self.out}/")
        self.log("=" * 70)
        return self.manifest


def run_pipeline(config: PipelineConfig, verbose: bool = True) -> RunManifest:
    """
    Execute every stage in order for one configuration.

    Args:
        config: Validated before any computation
        verbose: Print progress banners

    Returns:
        RunManifest (also written to <output_dir>/manifest.json)
    """
    return Pipeline(config, verbose).run()


def run_single_stage(config: PipelineConfig, name: str, verbose: bool = True) -> RunManifest:
    """
    Run one stage from the artifacts an earlier run left in the output directory.

    The existing manifest, when present, is updated in place.
    """
    pipeline = Pipeline(config, verbose)
    manifest_path = pipeline.out / MANIFEST_FILE
    if manifest_path.exists():
        previous = RunManifest.load(manifest_path)
        pipeline.manifest.stages = previous.stages
        pipeline.manifest.results = previous.results
        if previous.results.get("arstatic", {}).get("order") is not None and config.q is None:
            pipeline.state.q = int(previous.results["arstatic"]["order"])
    return pipeline.run((name,))
