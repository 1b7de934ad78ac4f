"""Two-stage discrimination remover.

First stage: regress the non-sensitive attributes ``X`` on the sensitive
attributes ``S`` (plus an intercept column by default) and keep the residual
``U``. Second stage: fit a linear learner on ``[U | Z]``. Test rows are
residualized with the coefficients learned on training rows.

For binary sensitive attributes two extra steps apply by default: attributes
that are constant inside either group are dropped, and residuals are rescaled
per group so every group has the pooled residual standard deviation.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .datamodel import Dataset, DataError, group_keys
from .estimators import (
    DEFAULT_ALPHA_GRID,
    LinearModel,
    Predictions,
    fit_logistic,
    fit_ols,
    fit_ridge_classifier,
    predict,
)
from .linalg import Rng, solve_least_squares

ZERO_VARIANCE_TOL = 1e-12


class TwoStageError(ValueError):
    pass


@dataclass(frozen=True)
class SecondStageSpec:
    kind: str = "ols"
    alpha_grid: tuple[float, ...] = DEFAULT_ALPHA_GRID
    folds: int = 10
    max_iter: int = 100
    tol: float = 1e-8

    def __post_init__(self):
        if self.kind not in ("ols", "ridge", "logistic"):
            raise TwoStageError(f"unknown second stage {self.kind!r}")


@dataclass(frozen=True)
class TwoStageOptions:
    """``None`` for the binary-only steps means "on iff some s is binary"."""

    first_stage_intercept: bool = True
    variance_correction: bool | None = None
    zero_variance_filter: bool | None = None


@dataclass(frozen=True, eq=False)
class FirstStageModel:
    coef: np.ndarray  # rows: sensitive columns, then intercept when present
    retained_mask: np.ndarray
    intercept: bool
    sensitive_kind: str
    group_columns: tuple[int, ...] = ()
    variance_factors: dict[int, np.ndarray] | None = None

    def __post_init__(self):
        if self.coef.shape[1] != int(self.retained_mask.sum()):
            raise TwoStageError("coefficient columns do not match retained attributes")
        if self.variance_factors is not None:
            for f in self.variance_factors.values():
                if not np.all(np.isfinite(f)) or np.any(f <= 0):
                    raise TwoStageError("variance factors must be finite and positive")

    @property
    def n_retained(self) -> int:
        return int(self.retained_mask.sum())


@dataclass(frozen=True, eq=False)
class TwoStagePredictor:
    first_stage: FirstStageModel
    second_stage: LinearModel
    uses_explanatory: bool
    z_names: tuple[str, ...] = ()

    def __post_init__(self):
        if self.second_stage.n_features != self.first_stage.n_retained + len(self.z_names):
            raise TwoStageError("second stage width must equal retained X + Z columns")


@dataclass(frozen=True, eq=False)
class BaselinePredictor:
    """Second-stage learner fit on ``[S | X | Z]`` directly, no residualization.

    With ``uses_sensitive=False`` the sensitive columns are left out.
    """

    model: LinearModel
    n_s: int
    n_x: int
    uses_sensitive: bool = True
    z_names: tuple[str, ...] = ()


def _sensitive_kind(ds_kinds: tuple[str, ...]) -> str:
    kinds = set(ds_kinds)
    if kinds == {"binary"}:
        return "binary"
    if kinds == {"numeric"}:
        return "numeric"
    return "mixed"


def filter_zero_variance(S_bin, X, tol: float = ZERO_VARIANCE_TOL) -> np.ndarray:
    """Mask of X columns whose variance is >= ``tol`` inside every group.

    Groups are the distinct rows of the binary sensitive columns ``S_bin``.
    """
    S_bin = np.asarray(S_bin, dtype=np.float64)
    if S_bin.ndim == 1:
        S_bin = S_bin[:, None]
    X = np.asarray(X, dtype=np.float64)
    keys = S_bin.astype(np.int64) @ (1 << np.arange(S_bin.shape[1], dtype=np.int64))
    groups = np.unique(keys)
    for j in range(S_bin.shape[1]):
        if np.unique(S_bin[:, j]).size < 2:
            raise TwoStageError("both groups of every binary sensitive column must be non-empty")
    keep = np.ones(X.shape[1], dtype=bool)
    for g in groups:
        rows = keys == g
        keep &= X[rows].var(axis=0) >= tol
    if not keep.any():
        raise TwoStageError("every attribute has zero variance within some group")
    return keep


def _design(S: np.ndarray, intercept: bool) -> np.ndarray:
    return np.hstack([S, np.ones((S.shape[0], 1))]) if intercept else S


def _raw_residuals(model: FirstStageModel, S, X) -> np.ndarray:
    return X[:, model.retained_mask] - _design(S, model.intercept) @ model.coef


def fit_first_stage(
    S_train, X_train, s_kinds, options: TwoStageOptions = TwoStageOptions()
) -> FirstStageModel:
    S = np.asarray(S_train, dtype=np.float64)
    X = np.asarray(X_train, dtype=np.float64)
    n, d_s = S.shape
    if len(s_kinds) != d_s:
        raise TwoStageError("s_kinds must tag every sensitive column")
    if n <= d_s + 1:
        raise TwoStageError(f"first stage needs more than {d_s + 1} rows, got {n}")
    binary = tuple(i for i, k in enumerate(s_kinds) if k == "binary")
    use_filter = options.zero_variance_filter
    use_filter = bool(binary) if use_filter is None else use_filter
    use_vc = options.variance_correction
    use_vc = bool(binary) if use_vc is None else use_vc
    if (use_filter or use_vc) and not binary:
        raise TwoStageError("zero-variance filter and variance correction need a binary s")

    mask = filter_zero_variance(S[:, binary], X) if use_filter else np.ones(X.shape[1], bool)
    coef = solve_least_squares(_design(S, options.first_stage_intercept), X[:, mask])
    model = FirstStageModel(
        coef=coef, retained_mask=mask, intercept=options.first_stage_intercept,
        sensitive_kind=_sensitive_kind(tuple(s_kinds)), group_columns=binary,
    )
    if not use_vc:
        return model
    U = _raw_residuals(model, S, X)
    pooled = U.std(axis=0)
    keys = _keys(S, binary)
    factors = {}
    for g in np.unique(keys):
        sd = U[keys == g].std(axis=0)
        if np.any(sd <= np.sqrt(ZERO_VARIANCE_TOL)):
            raise TwoStageError(f"residuals are degenerate within sensitive group {int(g)}")
        factors[int(g)] = pooled / sd
    return replace(model, variance_factors=factors)


def _keys(S: np.ndarray, cols: tuple[int, ...]) -> np.ndarray:
    bits = S[:, list(cols)].astype(np.int64)
    return bits @ (1 << np.arange(len(cols), dtype=np.int64))


def residualize(model: FirstStageModel, S, X) -> np.ndarray:
    S = np.asarray(S, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    d_s = model.coef.shape[0] - (1 if model.intercept else 0)
    if S.ndim != 2 or S.shape[1] != d_s:
        raise TwoStageError(f"expected {d_s} sensitive columns, got shape {S.shape}")
    if X.ndim != 2 or X.shape[1] != model.retained_mask.shape[0]:
        raise TwoStageError(
            f"expected {model.retained_mask.shape[0]} attributes, got shape {X.shape}"
        )
    if S.shape[0] != X.shape[0]:
        raise TwoStageError("S and X have different row counts")
    U = _raw_residuals(model, S, X)
    if model.variance_factors is not None:
        keys = _keys(S, model.group_columns)
        for g in np.unique(keys):
            f = model.variance_factors.get(int(g))
            if f is None:
                raise TwoStageError(f"sensitive group {int(g)} was not seen in training")
            U[keys == g] *= f
    return U


def _fit_second(spec: SecondStageSpec, F, y, task, names, rng) -> LinearModel:
    if spec.kind == "ols":
        return fit_ols(F, y, names)
    if task != "classification":
        raise TwoStageError(f"second stage {spec.kind!r} needs a classification task")
    if spec.kind == "ridge":
        return fit_ridge_classifier(F, y, spec.alpha_grid, spec.folds, rng, names)
    return fit_logistic(F, y, spec.max_iter, spec.tol, names)


def fit_2sdr(
    train: Dataset,
    second_stage: SecondStageSpec | str = "ols",
    options: TwoStageOptions = TwoStageOptions(),
    rng: Rng | None = None,
) -> TwoStagePredictor:
    if isinstance(second_stage, str):
        second_stage = SecondStageSpec(second_stage)
    if train.S.shape[1] == 0:
        raise TwoStageError("two-stage fit needs at least one sensitive attribute")
    first = fit_first_stage(train.S, train.X, train.s_kinds, options)
    U = residualize(first, train.S, train.X)
    F = np.hstack([U, train.Z])
    names = tuple(n for n, k in zip(train.x_names, first.retained_mask) if k) + train.z_names
    model = _fit_second(second_stage, F, train.y, train.task, names,
                        rng if rng is not None else Rng(0))
    uses_z = any(nm != "intercept" for nm in train.z_names)
    return TwoStagePredictor(first, model, uses_z, train.z_names)


def predict_2sdr(p: TwoStagePredictor, test: Dataset) -> Predictions:
    if test.z_names != p.z_names:
        raise TwoStageError("test explanatory columns do not match training")
    U = residualize(p.first_stage, test.S, test.X)
    return predict(p.second_stage, np.hstack([U, test.Z]))


def _baseline_features(ds: Dataset, uses_sensitive: bool) -> np.ndarray:
    blocks = [ds.S, ds.X, ds.Z] if uses_sensitive else [ds.X, ds.Z]
    return np.hstack(blocks)


def fit_baseline(
    train: Dataset,
    second_stage: SecondStageSpec | str = "ols",
    rng: Rng | None = None,
    uses_sensitive: bool = True,
) -> BaselinePredictor:
    if isinstance(second_stage, str):
        second_stage = SecondStageSpec(second_stage)
    F = _baseline_features(train, uses_sensitive)
    names = (train.s_names if uses_sensitive else ()) + train.x_names + train.z_names
    model = _fit_second(second_stage, F, train.y, train.task, names,
                        rng if rng is not None else Rng(0))
    return BaselinePredictor(model, train.S.shape[1], train.X.shape[1], uses_sensitive,
                             train.z_names)


def predict_baseline(p: BaselinePredictor, test: Dataset) -> Predictions:
    if (test.X.shape[1] != p.n_x or test.z_names != p.z_names
            or (p.uses_sensitive and test.S.shape[1] != p.n_s)):
        raise TwoStageError("test columns do not match training")
    return predict(p.model, _baseline_features(test, p.uses_sensitive))


__all__ = [
    "BaselinePredictor",
    "DataError",
    "FirstStageModel",
    "SecondStageSpec",
    "TwoStageError",
    "TwoStageOptions",
    "TwoStagePredictor",
    "filter_zero_variance",
    "fit_2sdr",
    "fit_baseline",
    "fit_first_stage",
    "group_keys",
    "predict_2sdr",
    "predict_baseline",
    "residualize",
]
