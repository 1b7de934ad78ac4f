"""Linear second-stage learners.

All models take an explicit feature matrix; the intercept is an all-ones
column supplied by the caller and is never penalized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .datamodel import fold_sizes
from .linalg import LinalgError, Rng, solve_least_squares, solve_normal_equations

DEFAULT_ALPHA_GRID = tuple(float(a) for a in np.logspace(-3, 3, 13))
WEIGHT_FLOOR = 1e-10


class EstimatorError(ValueError):
    pass


class ConvergenceError(EstimatorError):
    def __init__(self, msg: str, last_weights: np.ndarray):
        super().__init__(msg)
        self.last_weights = last_weights


@dataclass(frozen=True, eq=False)
class LinearModel:
    weights: np.ndarray
    feature_names: tuple[str, ...]
    task: str
    link: str
    chosen_alpha: float | None = None
    cv_scores: tuple[float, ...] | None = None
    train_accuracy: float | None = None
    converged: bool = True
    separated: bool = False
    n_iter: int = 0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.link == "identity") != (self.task == "regression"):
            raise EstimatorError("identity link is used exactly for regression")
        if len(self.feature_names) != self.weights.shape[0]:
            raise EstimatorError("feature_names and weights differ in length")

    @property
    def n_features(self) -> int:
        return int(self.weights.shape[0])


@dataclass(frozen=True, eq=False)
class Predictions:
    scores: np.ndarray
    classes: np.ndarray | None = None


def _names(p: int, names) -> tuple[str, ...]:
    return tuple(names) if names is not None else tuple(f"f{i}" for i in range(p))


def _check_labels(labels) -> np.ndarray:
    y = np.asarray(labels, dtype=np.float64).ravel()
    if not np.all(np.isin(y, (0.0, 1.0))):
        raise EstimatorError("labels must be 0 or 1")
    if np.unique(y).size < 2:
        raise EstimatorError("both classes must be present")
    return y


def fit_ols(features, targets, feature_names=None) -> LinearModel:
    F = np.asarray(features, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64).ravel()
    if F.shape[0] == 0:
        raise EstimatorError("no rows to fit")
    w = solve_least_squares(F, y)
    return LinearModel(w, _names(F.shape[1], feature_names), "regression", "identity")


def intercept_columns(F: np.ndarray) -> np.ndarray:
    """Boolean mask of all-ones columns."""
    return np.all(F == 1.0, axis=0)


def _ridge_solve(G, b, alpha, penalty):
    w, _ = solve_normal_equations(G + alpha * np.diag(penalty), b)
    return w


def fit_ridge_classifier(
    features,
    labels,
    alpha_grid=DEFAULT_ALPHA_GRID,
    folds: int = 10,
    rng: Rng | None = None,
    feature_names=None,
    intercept_index: int | None = None,
) -> LinearModel:
    """Ridge regression on +-1 labels with the penalty chosen by k-fold CV.

    The CV score is mean fold accuracy; ties go to the largest alpha. The
    model is then refit on all rows with the chosen alpha.
    """
    F = np.asarray(features, dtype=np.float64)
    y01 = _check_labels(labels)
    n, p = F.shape
    grid = [float(a) for a in alpha_grid]
    if not grid or any(a < 0 for a in grid):
        raise EstimatorError("alpha_grid must be non-empty and non-negative")
    if folds < 2:
        raise EstimatorError("folds must be >= 2")
    t = 2.0 * y01 - 1.0
    penalty = np.ones(p)
    if intercept_index is not None:
        penalty[intercept_index] = 0.0
    else:
        penalty[intercept_columns(F)] = 0.0

    G_all = F.T @ F
    b_all = F.T @ t
    rng = rng if rng is not None else Rng(0)
    order = rng.permutation(n)
    bounds = np.cumsum([0] + fold_sizes(n, folds))
    acc = np.zeros((len(grid), folds))
    for k in range(folds):
        test = order[bounds[k]:bounds[k + 1]]
        Ft = F[test]
        G = G_all - Ft.T @ Ft
        b = b_all - Ft.T @ t[test]
        for i, alpha in enumerate(grid):
            w = _ridge_solve(G, b, alpha, penalty)
            acc[i, k] = np.mean((Ft @ w > 0.0) == (y01[test] == 1.0))
    mean_acc = acc.mean(axis=1)
    best = mean_acc.max()
    chosen = max(a for a, m in zip(grid, mean_acc) if m >= best - 1e-12)
    w = _ridge_solve(G_all, b_all, chosen, penalty)
    train_acc = float(np.mean((F @ w > 0.0) == (y01 == 1.0)))
    return LinearModel(
        w, _names(p, feature_names), "classification", "sign",
        chosen_alpha=chosen, cv_scores=tuple(float(m) for m in mean_acc),
        train_accuracy=train_acc,
    )


def _log_likelihood(eta: np.ndarray, y: np.ndarray) -> float:
    # sum y*eta - log(1 + e^eta), overflow-safe
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def sigmoid(eta: np.ndarray) -> np.ndarray:
    out = np.empty_like(eta, dtype=np.float64)
    pos = eta >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    e = np.exp(eta[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def logistic_gradient(features, labels, weights) -> np.ndarray:
    """Gradient of the mean Bernoulli log-likelihood."""
    F = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    return F.T @ (y - sigmoid(F @ weights)) / F.shape[0]


def logistic_log_likelihood(features, labels, weights) -> float:
    F = np.asarray(features, dtype=np.float64)
    return _log_likelihood(F @ weights, np.asarray(labels, dtype=np.float64)) / F.shape[0]


def fit_logistic(
    features,
    labels,
    max_iter: int = 100,
    tol: float = 1e-8,
    feature_names=None,
    max_halvings: int = 40,
) -> LinearModel:
    """Logistic regression by iteratively reweighted least squares.

    Works on columns scaled by their max-abs value; convergence is declared
    when the mean log-likelihood gradient in those scaled coordinates has
    inf-norm <= ``tol``. Steps are halved while the likelihood would drop.
    """
    F = np.asarray(features, dtype=np.float64)
    y = _check_labels(labels)
    n, p = F.shape
    scale = np.abs(F).max(axis=0)
    scale[scale == 0] = 1.0
    Fs = F / scale
    beta = np.zeros(p)
    eta = Fs @ beta
    ll = _log_likelihood(eta, y)
    history = [ll]
    converged = separated = False
    it = 0
    for it in range(1, max_iter + 1):
        mu = sigmoid(eta)
        grad = Fs.T @ (y - mu) / n
        if np.max(np.abs(grad)) <= tol:
            converged = True
            it -= 1
            break
        W = np.maximum(mu * (1.0 - mu), WEIGHT_FLOOR)
        H = (Fs * W[:, None]).T @ Fs / n
        step, _ = solve_normal_equations(H, grad)
        t = 1.0
        for _ in range(max_halvings):
            cand = beta + t * step
            eta_c = Fs @ cand
            ll_c = _log_likelihood(eta_c, y)
            if ll_c >= ll:
                break
            t *= 0.5
        else:
            raise ConvergenceError("step-halving exhausted without likelihood increase", beta / scale)
        beta, eta, ll = cand, eta_c, ll_c
        history.append(ll)
        if np.max(np.abs(beta)) > 1e8 or (ll > -1e-10 * n and np.all((eta > 0) == (y == 1))):
            separated = True
            break
    else:
        mu = sigmoid(eta)
        grad = Fs.T @ (y - mu) / n
        if np.max(np.abs(grad)) <= tol:
            converged = True
        elif np.all((eta > 0) == (y == 1)):
            separated = True
        else:
            raise ConvergenceError(
                f"IRLS did not converge in {max_iter} iterations", beta / scale
            )
    # a strictly separating fit means no finite maximizer exists
    separated = separated or bool(np.all((eta > 0) == (y == 1)) and np.all(eta != 0))
    w = beta / scale
    train_acc = float(np.mean((sigmoid(F @ w) > 0.5) == (y == 1.0)))
    return LinearModel(
        w, _names(p, feature_names), "classification", "sigmoid",
        train_accuracy=train_acc, converged=converged or separated,
        separated=separated, n_iter=it, extra={"log_likelihood": history},
    )


def predict(model: LinearModel, features) -> Predictions:
    F = np.asarray(features, dtype=np.float64)
    if F.ndim != 2 or F.shape[1] != model.n_features:
        raise EstimatorError(
            f"model expects {model.n_features} features, got shape {F.shape}"
        )
    raw = F @ model.weights
    if model.link == "identity":
        return Predictions(raw)
    if model.link == "sign":
        return Predictions(raw, (raw > 0.0).astype(np.float64))
    prob = sigmoid(raw)
    return Predictions(prob, (prob > 0.5).astype(np.float64))


__all__ = [
    "ConvergenceError",
    "DEFAULT_ALPHA_GRID",
    "EstimatorError",
    "LinalgError",
    "LinearModel",
    "Predictions",
    "fit_logistic",
    "fit_ols",
    "fit_ridge_classifier",
    "logistic_gradient",
    "logistic_log_likelihood",
    "predict",
    "sigmoid",
]
