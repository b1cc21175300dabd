"""
Pipeline configuration

Defaults live on PipelineConfig. A dotenv-style file (TVM_<FIELD>=value) can
override them, and command-line flags override the file.
"""

from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Optional, Tuple, Union

from dotenv import dotenv_values

from data_loader import parse_month
from errors import ConfigurationError
from stationarity import CONSTANT, CONSTANT_AND_TREND, CRITERIA
from tvar import DEFAULT_LAMBDA_GRID

ENV_PREFIX = "TVM_"
PLOT_FORMATS = ("svg", "none")
SPECTRUM_TARGETS = ("trend", "cycle", "raw")


def parse_float_list(text: str) -> Tuple[float, ...]:
    """'1e-4,1e-3' -> (1e-4, 1e-3)"""
    try:
        return tuple(float(item) for item in str(text).split(",") if item.strip())
    except ValueError:
        raise ConfigurationError(f"Expected a comma-separated list of numbers, got {text!r}") from None


def parse_int_list(text: str) -> Tuple[int, ...]:
    try:
        return tuple(int(item) for item in str(text).split(",") if item.strip())
    except ValueError:
        raise ConfigurationError(f"Expected a comma-separated list of integers, got {text!r}") from None


def parse_bandwidth(text) -> Union[int, str]:
    """'auto' or a nonnegative lag count."""
    value = str(text).strip().lower()
    if value == "auto":
        return "auto"
    try:
        bandwidth = int(value)
    except ValueError:
        raise ConfigurationError(f"Expected 'auto' or an integer bandwidth, got {text!r}") from None
    if bandwidth < 0:
        raise ConfigurationError(f"HAC bandwidth must be nonnegative, got {bandwidth}")
    return bandwidth


def _parse_bool(text: str) -> bool:
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"Expected a boolean, got {text!r}")


def _optional(parser):
    def parse(text):
        if text is None or str(text).strip().lower() in ("", "none"):
            return None
        return parser(text)
    return parse


@dataclass
class PipelineConfig:
    """Every tunable of a pipeline run; echoed verbatim into the run manifest."""

    # Configuration constants
    DEFAULT_SPANS = (7, 7)
    DEFAULT_WIDE_SPANS = (15, 15)

    input_path: str = "data/shiller_monthly.csv"
    date_column: str = "Date"
    price_column: str = "P"
    delimiter: Optional[str] = None
    start: Optional[str] = None
    end: Optional[str] = None

    adf_max_lag: Optional[int] = None
    adf_criterion: str = "MBIC"
    adf_deterministic: str = CONSTANT_AND_TREND

    max_q: int = 12
    q: Optional[int] = None
    hac_bandwidth: Union[int, str] = "auto"

    lam: Optional[float] = None
    lambda_grid: Tuple[float, ...] = DEFAULT_LAMBDA_GRID
    prior_weight: float = 1.0
    tvar_hac: bool = True
    iterations: int = 0
    window_target: int = 144
    ljung_box_lags: int = 12

    horizon: int = 60
    ci_level: float = 0.95
    boot_reps: int = 999
    seed: int = 20240101
    workers: int = 1

    hp_lambda: float = 129600.0
    spans: Tuple[int, ...] = DEFAULT_SPANS
    wide_spans: Tuple[int, ...] = DEFAULT_WIDE_SPANS
    ar_max_order: int = 24
    min_period: float = 24.0
    spectrum_target: str = "trend"

    output_dir: str = "output"
    plots: str = "svg"
    resume_from: Optional[str] = None
    events_path: Optional[str] = "data/market_events.csv"

    @classmethod
    def parsers(cls) -> dict:
        opt_int, opt_float, opt_str = _optional(int), _optional(float), _optional(str)
        return {
            "input_path": str, "date_column": str, "price_column": str, "delimiter": opt_str,
            "start": opt_str, "end": opt_str,
            "adf_max_lag": opt_int, "adf_criterion": str, "adf_deterministic": str,
            "max_q": int, "q": opt_int,
            "hac_bandwidth": parse_bandwidth,
            "lam": opt_float, "lambda_grid": parse_float_list, "prior_weight": float,
            "tvar_hac": _parse_bool, "iterations": int, "window_target": int,
            "ljung_box_lags": int,
            "horizon": int, "ci_level": float, "boot_reps": int, "seed": int, "workers": int,
            "hp_lambda": float, "spans": parse_int_list, "wide_spans": parse_int_list,
            "ar_max_order": int, "min_period": float, "spectrum_target": str,
            "output_dir": str, "plots": str, "resume_from": opt_str, "events_path": opt_str,
        }

    @classmethod
    def from_env_file(cls, path: Union[str, Path], base: Optional["PipelineConfig"] = None) -> "PipelineConfig":
        """
        Read TVM_<FIELD>=value pairs from a dotenv-style file.

        Args:
            path: Config file path
            base: Configuration the file overrides (defaults when None)

        Returns:
            New PipelineConfig
        """
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(f"Config file not found: {path}")
        raw = {key: value for key, value in dotenv_values(path).items()
               if key.startswith(ENV_PREFIX)}
        overrides = {}
        for key, value in raw.items():
            name = key[len(ENV_PREFIX):].lower()
            overrides[name] = value
        return (base or cls()).with_overrides(overrides, parse=True)

    def with_overrides(self, overrides: dict, parse: bool = False) -> "PipelineConfig":
        """Copy with the given fields replaced; None values are ignored."""
        parsers = self.parsers()
        updates = {}
        for name, value in overrides.items():
            if name not in parsers:
                raise ConfigurationError(f"Unknown configuration key: {name}")
            if value is None:
                continue
            if parse:
                try:
                    value = parsers[name](value)
                except (TypeError, ValueError) as exc:
                    raise ConfigurationError(f"Bad value for {name}: {value!r} ({exc})") from None
            updates[name] = value
        return replace(self, **updates)

    def validate(self) -> "PipelineConfig":
        """Range-check every field; raises ConfigurationError on the first violation."""
        if self.start and self.end and parse_month(self.end) < parse_month(self.start):
            raise ConfigurationError(f"End month {self.end} is before start month {self.start}")
        if self.adf_criterion not in CRITERIA:
            raise ConfigurationError(f"adf_criterion must be one of {CRITERIA}")
        if self.adf_deterministic not in (CONSTANT, CONSTANT_AND_TREND):
            raise ConfigurationError(f"Unknown adf_deterministic: {self.adf_deterministic}")
        if self.adf_max_lag is not None and self.adf_max_lag < 0:
            raise ConfigurationError("adf_max_lag must be nonnegative")
        if self.max_q < 1:
            raise ConfigurationError("max_q must be at least 1")
        if self.q is not None and not 1 <= self.q <= self.max_q:
            raise ConfigurationError(f"q must be in 1..max_q, got {self.q}")
        if self.hac_bandwidth != "auto" and int(self.hac_bandwidth) < 0:
            raise ConfigurationError("hac_bandwidth must be 'auto' or nonnegative")
        if self.lam is not None and not self.lam > 0:
            raise ConfigurationError(f"lambda must be positive, got {self.lam}")
        if not self.lambda_grid or any(not v > 0 for v in self.lambda_grid):
            raise ConfigurationError("lambda_grid must be nonempty and positive")
        if not self.prior_weight > 0:
            raise ConfigurationError("prior_weight must be positive")
        if self.iterations < 0:
            raise ConfigurationError("iterations must be nonnegative")
        if self.window_target < 1 or self.ljung_box_lags < 1:
            raise ConfigurationError("window_target and ljung_box_lags must be positive")
        if self.horizon < 0:
            raise ConfigurationError("horizon must be nonnegative")
        if not 0.0 < self.ci_level < 1.0:
            raise ConfigurationError(f"ci_level must be in (0, 1), got {self.ci_level}")
        if self.boot_reps < 99:
            raise ConfigurationError(f"boot_reps must be at least 99, got {self.boot_reps}")
        if self.workers < 1:
            raise ConfigurationError("workers must be at least 1")
        if not self.hp_lambda > 0:
            raise ConfigurationError("hp_lambda must be positive")
        for spans in (self.spans, self.wide_spans):
            if not spans or any(s < 3 or s % 2 == 0 for s in spans):
                raise ConfigurationError(f"Daniell spans must be odd and at least 3, got {spans}")
        if self.ar_max_order < 0:
            raise ConfigurationError("ar_max_order must be nonnegative")
        if not self.min_period > 2:
            raise ConfigurationError("min_period must exceed 2 months")
        if self.spectrum_target not in SPECTRUM_TARGETS:
            raise ConfigurationError(f"spectrum_target must be one of {SPECTRUM_TARGETS}")
        if self.plots not in PLOT_FORMATS:
            raise ConfigurationError(f"plots must be one of {PLOT_FORMATS}")
        return self

    def to_dict(self) -> dict:
        data = asdict(self)
        for key, value in data.items():
            if isinstance(value, tuple):
                data[key] = list(value)
        return data

    @property
    def output_path(self) -> Path:
        return Path(self.output_dir)

    @property
    def figures_path(self) -> Path:
        return Path(self.output_dir) / "figures"
