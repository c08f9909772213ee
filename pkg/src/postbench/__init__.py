"""postbench: three from-scratch regressors benchmarked on Facebook post metrics."""

from .anfis import AnfisRegressor
from .bench import EvalReport, RunConfig, emit_report, mse, run_experiment
from .data import Dataset, SplitSpec, build_dataset, load_raw, summary_stats
from .esn import EchoStateRegressor
from .linalg import ridge_solve, spectral_radius
from .rng import Rng
from .svr import SupportVectorRegressor, check_kkt

__version__ = "0.1.0"

__all__ = [
    "AnfisRegressor",
    "Dataset",
    "EchoStateRegressor",
    "EvalReport",
    "Rng",
    "RunConfig",
    "SplitSpec",
    "SupportVectorRegressor",
    "build_dataset",
    "check_kkt",
    "emit_report",
    "load_raw",
    "mse",
    "ridge_solve",
    "run_experiment",
    "spectral_radius",
    "summary_stats",
    "__version__",
]
