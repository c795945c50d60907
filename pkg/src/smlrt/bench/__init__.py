from .config import BenchConfig
from .metrics import compute_mape, compute_rmse
from .options import run_options
from .report import BenchReport, emit_report
from .stencil import run_stencil

__all__ = [
    "BenchConfig",
    "BenchReport",
    "compute_rmse",
    "compute_mape",
    "emit_report",
    "run_stencil",
    "run_options",
]
