from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from config import PipelineConfig
from errors import ConfigurationError
from pipeline import run_pipeline
from visualize_charts import EfficiencyChartGenerator
from visualizations import LINE_WITH_BAND, SPECTRUM_PANEL, SURFACE_LONG_FORMAT, emit_plot


def _longrun_frame():
    dates = pd.period_range("1990-01", periods=24, freq="M").strftime("%Y-%m")
    phi = 1.0 + 0.1 * np.sin(np.arange(24) / 4.0)
    return pd.DataFrame({"date": dates, "phi": phi, "lower": phi - 0.2, "upper": phi + 0.2})


def test_line_with_band_creates_file(tmp_path: Path):
    events = pd.DataFrame({"event": ["crash"], "date": ["1990-06"]})

    output = emit_plot(_longrun_frame(), LINE_WITH_BAND, tmp_path / "longrun.svg",
                       title="Long-run multiplier", events=events)

    assert output.exists()
    assert output.read_text().lstrip().startswith("<?xml")


def test_surface_and_spectrum_panels(tmp_path: Path):
    surface = pd.DataFrame({"date": np.repeat(["2000-01", "2000-02"], 3),
                            "horizon": np.tile([0, 1, 2], 2),
                            "beta": [1.0, 0.3, 0.09, 1.0, 0.2, 0.04]})
    spectrum = pd.DataFrame({"frequency": np.arange(1, 51) / 100.0, "density": np.linspace(2.0, 0.5, 50)})

    assert emit_plot(surface, SURFACE_LONG_FORMAT, tmp_path / "surface.svg").exists()
    assert emit_plot(spectrum, SPECTRUM_PANEL, tmp_path / "spectrum.svg", ci_factor=(0.27, 39.5)).exists()


def test_identical_data_gives_identical_svg(tmp_path: Path):
    first = emit_plot(_longrun_frame(), LINE_WITH_BAND, tmp_path / "a.svg")
    second = emit_plot(_longrun_frame(), LINE_WITH_BAND, tmp_path / "b.svg")

    assert first.read_bytes() == second.read_bytes()


def test_schema_mismatch_is_rejected(tmp_path: Path):
    frame = _longrun_frame().drop(columns=["upper"])

    with pytest.raises(ConfigurationError, match="upper"):
        emit_plot(frame, LINE_WITH_BAND, tmp_path / "bad.svg")
    assert not (tmp_path / "bad.svg").exists()


def test_unknown_kind_is_rejected(tmp_path: Path):
    with pytest.raises(ConfigurationError):
        emit_plot(_longrun_frame(), "pie", tmp_path / "pie.svg")


def test_generator_renders_a_pipeline_run(price_file, tmp_path: Path):
    out = tmp_path / "run"
    config = PipelineConfig(input_path=str(price_file), output_dir=str(out), max_q=4, lam=1e-3,
                            boot_reps=99, horizon=12, plots="none", events_path=None)
    run_pipeline(config, verbose=False)

    generator = EfficiencyChartGenerator(analysis_dir=str(out), events_path=None, verbose=False)
    written = generator.generate_all_charts()

    names = {path.name for path in written}
    assert {"returns.svg", "tvar_coefficients.svg", "smoother_weights.svg", "interim_surface.svg",
            "longrun_multiplier.svg", "spectrum_trend_smoothed.svg"} <= names
    assert all(path.parent == out / "figures" for path in written)


def test_generator_skips_missing_artifacts(tmp_path: Path):
    generator = EfficiencyChartGenerator(analysis_dir=str(tmp_path), verbose=False)

    assert generator.generate_all_charts() == []
