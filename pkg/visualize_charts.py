#!/usr/bin/env python
"""
Create the static figures of a pipeline run

Generates SVG charts from the artifacts in the output directory:
1. Monthly log returns
2. TV-AR coefficient paths with whole-sample estimates (dotted)
3. Smoother weights and window of the first coefficient
4. Interim-multiplier surface (heatmap)
5. Long-run multiplier with confidence band, HP trend and market events
6. Raw, smoothed and AR-fitted spectra of the efficiency degree

Input: CSV/JSON files from output/
Output: SVG charts in output/figures/
"""

import json
import sys
from pathlib import Path
from typing import List, Optional

# Add src to path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root / "src"))

from data_loader import load_csv
from errors import EfficiencyError
from visualizations import (LINE_WITH_BAND, SPECTRUM_PANEL, SURFACE_LONG_FORMAT, emit_plot,
                            plot_coefficient_paths, plot_returns, plot_smoother_weights)


class EfficiencyChartGenerator:
    """Render every figure a pipeline run can produce."""

    SPECTRUM_METHODS = ("raw", "smoothed", "smoothed_wide", "ar")

    def __init__(self, analysis_dir: str = "output", output_dir: Optional[str] = None,
                 events_path: Optional[str] = "data/market_events.csv", verbose: bool = True):
        """
        Initialize chart generator.

        Args:
            analysis_dir: Directory holding the pipeline artifacts
            output_dir: Directory to save charts (default: <analysis_dir>/figures)
            events_path: Optional market-event table overlaid on the long-run plot
            verbose: Print progress
        """
        self.analysis_dir = Path(analysis_dir)
        self.output_dir = Path(output_dir) if output_dir else self.analysis_dir / "figures"
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.events_path = Path(events_path) if events_path else None
        self.verbose = verbose
        self.written: List[Path] = []

    def _saved(self, path: Path) -> None:
        self.written.append(path)
        if self.verbose:
            print(f"   ✓ Saved: {path}")

    def _artifact(self, name: str) -> Path:
        return self.analysis_dir / name

    def create_returns_chart(self) -> None:
        path = self._artifact("returns.csv")
        if path.exists():
            self._saved(plot_returns(load_csv(path), self.output_dir / "returns.svg"))

    def create_coefficient_chart(self) -> None:
        path = self._artifact("tvar_fit.csv")
        if not path.exists():
            return
        frame = load_csv(path)
        whole_sample = None
        static = self._artifact("ar_static.csv")
        if static.exists():
            whole_sample = load_csv(static)["estimate"].to_numpy()[1:]
        self._saved(plot_coefficient_paths(frame, self.output_dir / "tvar_coefficients.svg", whole_sample))

    def create_window_chart(self) -> None:
        path = self._artifact("smoother_weights.csv")
        if path.exists():
            self._saved(plot_smoother_weights(load_csv(path), self.output_dir / "smoother_weights.svg"))

    def create_surface_chart(self) -> None:
        path = self._artifact("interim_surface.csv")
        if path.exists():
            self._saved(emit_plot(path, SURFACE_LONG_FORMAT, self.output_dir / "interim_surface.svg",
                                  title="Time-varying impulse responses"))

    def create_longrun_chart(self) -> None:
        path = self._artifact("longrun_multiplier.csv")
        if not path.exists():
            return
        frame = load_csv(path)
        hp = self._artifact("hp_decomposition.csv")
        if hp.exists():
            frame["trend"] = load_csv(hp)["trend"].to_numpy()
        events = None
        if self.events_path is not None and self.events_path.exists():
            events = load_csv(self.events_path)
        self._saved(emit_plot(frame, LINE_WITH_BAND, self.output_dir / "longrun_multiplier.svg",
                              title="Time-varying long-run multiplier", events=events))

    def create_spectrum_charts(self) -> None:
        manifest_path = self._artifact("manifest.json")
        factors = {}
        if manifest_path.exists():
            with open(manifest_path) as handle:
                spectra = json.load(handle).get("results", {}).get("spectral", {}).get("spectra", {})
            factors = {key: tuple(value["ci_factor"]) for key, value in spectra.items()}
        for path in sorted(self.analysis_dir.glob("spectrum_*.csv")):
            key = path.stem[len("spectrum_"):]
            self._saved(emit_plot(path, SPECTRUM_PANEL, self.output_dir / f"{path.stem}.svg",
                                  title=key.replace("_", " "), ci_factor=factors.get(key)))

    def generate_all_charts(self) -> List[Path]:
        """
        Generate all charts whose artifacts exist.

        Returns:
            Paths of the written figures
        """
        if self.verbose:
            print("=" * 70)
            print("📊 GENERATING CHARTS")
            print("=" * 70 + "\n")

        self.create_returns_chart()
        self.create_coefficient_chart()
        self.create_window_chart()
        self.create_surface_chart()
        self.create_longrun_chart()
        self.create_spectrum_charts()

        if self.verbose:
            print("\n" + "=" * 70)
            print(f"✅ CHART GENERATION COMPLETE ({len(self.written)} files)")
            print("=" * 70)
        return self.written


def main():
    """Main execution function."""
    analysis_dir = sys.argv[1] if len(sys.argv) > 1 else "output"
    print("🚀 Time-Varying Market Efficiency - Chart Generation\n")
    try:
        generator = EfficiencyChartGenerator(analysis_dir)
        generator.generate_all_charts()
    except EfficiencyError as e:
        print(f"\n❌ Error during chart generation: {e}")
        sys.exit(e.exit_code)
    print(f"\n✨ All charts saved to: {generator.output_dir}/")


if __name__ == "__main__":
    main()
