"""LS-SVM regression tuned by particle swarm optimization, for next-day close
forecasting from technical indicators."""
from ._backend import NAME as BACKEND
from .errors import LssvmPsoError
from .evaluate import ExperimentConfig, EvalReport, run_experiment
from .indicators import IndicatorParams, PriceBar, compute_all
from .kernels import KernelSpec
from .lssvm import LssvmHyperparams, LssvmModel, fit, predict
from .pipeline import OhlcvSeries, build_features, load_csv, split_70_30
from .pso import Dimension, PsoConfig, SearchSpace, optimize

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Dimension", "EvalReport", "ExperimentConfig", "IndicatorParams", "KernelSpec",
    "LssvmHyperparams", "LssvmModel", "LssvmPsoError", "OhlcvSeries", "PriceBar", "PsoConfig",
    "SearchSpace", "build_features", "compute_all", "fit", "load_csv", "optimize", "predict",
    "run_experiment", "split_70_30",
]
