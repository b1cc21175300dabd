"""
Time-Varying Market Efficiency - reusable modules for TV-AR estimation and analysis
"""

__version__ = "0.1.0"

# Modules are imported by bare name from the scripts (src/ is put on sys.path):
# from data_loader import load_prices, log_returns
# from tvar import build_stacked, solve_stacked
# from efficiency import multiplier_path
