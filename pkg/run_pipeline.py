#!/usr/bin/env python
"""
Time-Varying Market Efficiency - command-line front end

Usage:
    python run_pipeline.py run --input data/shiller_monthly.csv --out output
    python run_pipeline.py stage efficiency --out output
    python run_pipeline.py selfcheck [--slow]

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric error.
"""

import argparse
import sys
from pathlib import Path

# Add src to path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root / "src"))

from config import PipelineConfig, parse_bandwidth, parse_float_list, parse_int_list
from errors import ConfigurationError, DataError, EfficiencyError, StageError
from pipeline import STAGES, run_pipeline, run_single_stage

# Flag destination -> PipelineConfig field
FLAG_FIELDS = {
    "input": "input_path",
    "date_column": "date_column",
    "price_column": "price_column",
    "start": "start",
    "end": "end",
    "max_q": "max_q",
    "q": "q",
    "hac_bandwidth": "hac_bandwidth",
    "lam": "lam",
    "lambda_grid": "lambda_grid",
    "prior_weight": "prior_weight",
    "iterations": "iterations",
    "hp_lambda": "hp_lambda",
    "spans": "spans",
    "wide_spans": "wide_spans",
    "horizon": "horizon",
    "ci": "ci_level",
    "boot_reps": "boot_reps",
    "seed": "seed",
    "workers": "workers",
    "out": "output_dir",
    "plots": "plots",
    "tvar_hac": "tvar_hac",
    "resume_from": "resume_from",
    "spectrum_target": "spectrum_target",
}


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="dotenv-style file with TVM_<FIELD>=value lines")
    parser.add_argument("--input", help="monthly price file (CSV or tab separated)")
    parser.add_argument("--date-column", dest="date_column")
    parser.add_argument("--price-column", dest="price_column")
    parser.add_argument("--start", help="first month kept, YYYY-MM")
    parser.add_argument("--end", help="last month kept, YYYY-MM")
    parser.add_argument("--max-q", dest="max_q", type=int, help="largest AR order for SBIC")
    parser.add_argument("--q", type=int, help="fix the AR order instead of selecting it")
    parser.add_argument("--hac-bandwidth", dest="hac_bandwidth", type=parse_bandwidth,
                        help="Newey-West lags, or 'auto' for floor(4 (n/100)^(2/9))")
    parser.add_argument("--lambda", dest="lam", type=float, help="state-to-observation variance ratio")
    parser.add_argument("--lambda-grid", dest="lambda_grid", type=parse_float_list,
                        help="comma-separated grid for likelihood selection of lambda")
    parser.add_argument("--prior-weight", dest="prior_weight", type=float)
    parser.add_argument("--iterations", type=int, help="feasible-GLS passes for per-coefficient lambda")
    parser.add_argument("--hp-lambda", dest="hp_lambda", type=float)
    parser.add_argument("--spans", type=parse_int_list, help="Daniell spans, e.g. 7,7")
    parser.add_argument("--wide-spans", dest="wide_spans", type=parse_int_list)
    parser.add_argument("--horizon", type=int, help="largest interim-multiplier horizon")
    parser.add_argument("--ci", type=float, help="confidence level of the bands")
    parser.add_argument("--boot-reps", dest="boot_reps", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int, help="bootstrap worker processes")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--plots", choices=("svg", "none"))
    parser.add_argument("--tvar-hac", dest="tvar_hac", action=argparse.BooleanOptionalAction,
                        default=None, help="Newey-West sandwich for the TV-AR covariances")
    parser.add_argument("--resume-from", dest="resume_from",
                        help="directory holding tvar_fit.csv/tvar_fit.json to reuse")
    parser.add_argument("--spectrum-target", dest="spectrum_target", choices=("trend", "cycle", "raw"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Time-varying market efficiency pipeline")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run every stage")
    _add_config_flags(run)

    stage = commands.add_parser("stage", help="run one stage from prior artifacts")
    stage.add_argument("name", choices=STAGES)
    _add_config_flags(stage)

    selfcheck = commands.add_parser("selfcheck", help="run the property and oracle test suites")
    selfcheck.add_argument("--slow", action="store_true", help="include the Monte Carlo suites")
    return parser


def config_from_args(args: argparse.Namespace) -> PipelineConfig:
    """Defaults, then the config file, then command-line flags."""
    config = PipelineConfig()
    if args.config:
        config = PipelineConfig.from_env_file(args.config, config)
    overrides = {field: getattr(args, flag) for flag, field in FLAG_FIELDS.items()}
    return config.with_overrides(overrides).validate()


def selfcheck(slow: bool) -> int:
    import pytest

    arguments = [str(project_root / "tests"), "-q"]
    if slow:
        arguments += ["-m", "slow or not slow"]
    return int(pytest.main(arguments))


def render_plots(config: PipelineConfig) -> None:
    from visualize_charts import EfficiencyChartGenerator

    try:
        EfficiencyChartGenerator(config.output_dir, events_path=config.events_path).generate_all_charts()
    except EfficiencyError:
        raise
    except (OSError, ValueError, KeyError, RuntimeError) as exc:
        raise StageError("plots", DataError(f"{type(exc).__name__}: {exc}")) from exc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "selfcheck":
        return selfcheck(args.slow)

    try:
        config = config_from_args(args)
        if args.command == "run":
            run_pipeline(config)
        else:
            run_single_stage(config, args.name)
        if config.plots == "svg":
            render_plots(config)
    except ConfigurationError as e:
        print(f"\n❌ Configuration error: {e}")
        return e.exit_code
    except EfficiencyError as e:
        print(f"\n❌ {e}")
        return e.exit_code

    return 0


if __name__ == "__main__":
    sys.exit(main())
