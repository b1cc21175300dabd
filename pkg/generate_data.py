#!/usr/bin/env python
"""
Generate a Synthetic Monthly Price Index

Run this script to create a 600-month index whose log returns follow a
TV-AR(2) with slowly drifting coefficients, so the pipeline can run without
the historical price file.
Output: data/synthetic_monthly.csv

Usage:
    python generate_data.py [n_months] [seed]
"""

import sys
from pathlib import Path

# Add src to path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root / "src"))

from data_generator import generate_sample_dataset


if __name__ == "__main__":
    print("🚀 Time-Varying Market Efficiency - Synthetic Data Generator\n")

    n_months = int(sys.argv[1]) if len(sys.argv) > 1 else 600
    seed = int(sys.argv[2]) if len(sys.argv) > 2 else 7

    try:
        df = generate_sample_dataset(
            n_months=n_months,
            output_path="data/synthetic_monthly.csv",
            random_seed=seed,
        )

        print(f"✓ {len(df)} monthly prices, {df['Date'].iloc[0]} to {df['Date'].iloc[-1]}")
        print("\n✅ Dataset generation completed successfully!")
        print("\nNext steps:")
        print("1. Run the pipeline: python run_pipeline.py run --input data/synthetic_monthly.csv")
        print("2. Inspect output/manifest.json and output/figures/")

    except Exception as e:
        print(f"\n❌ Error generating dataset: {e}")
        sys.exit(1)
