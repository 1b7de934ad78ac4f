"""Two-stage discrimination remover (2SDR) for fairness-aware linear learning."""

from ._backend import BACKEND, HAS_COMPILED
from .datamodel import Dataset, SplitPlan, load_csv, load_schema, split
from .estimators import fit_logistic, fit_ols, fit_ridge_classifier, predict
from .linalg import Rng
from .metrics import FairnessReport, report
from .twostage import (
    SecondStageSpec,
    TwoStageOptions,
    fit_2sdr,
    fit_baseline,
    predict_2sdr,
    predict_baseline,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "HAS_COMPILED",
    "Dataset",
    "FairnessReport",
    "Rng",
    "SecondStageSpec",
    "SplitPlan",
    "TwoStageOptions",
    "fit_2sdr",
    "fit_baseline",
    "fit_logistic",
    "fit_ols",
    "fit_ridge_classifier",
    "load_csv",
    "load_schema",
    "predict",
    "predict_2sdr",
    "predict_baseline",
    "report",
    "split",
    "__version__",
]
