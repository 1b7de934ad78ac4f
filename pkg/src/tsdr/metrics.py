"""Fairness and accuracy measures.

Covariances use the 1/n convention throughout, which makes the identity
``|cov(s, y_hat)| = p1 * (1 - p1) * MD`` exact for a binary ``s``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import _backend


class MetricError(ValueError):
    pass


def _groups(values, s) -> tuple[np.ndarray, np.ndarray]:
    v = np.asarray(values, dtype=np.float64).ravel()
    s = np.asarray(s, dtype=np.float64).ravel()
    if v.shape != s.shape:
        raise MetricError(f"length mismatch: {v.shape[0]} predictions, {s.shape[0]} groups")
    if not np.all(np.isin(s, (0.0, 1.0))):
        raise MetricError("sensitive column must be binary 0/1")
    g1, g0 = v[s == 1.0], v[s == 0.0]
    if g1.size == 0 or g0.size == 0:
        raise MetricError("both sensitive groups must be non-empty")
    return g1, g0


def p_percent_rule(y_hat, s) -> float:
    """min of the two ratios of group positive rates.

    Both rates zero gives 1.0; exactly one zero gives 0.0.
    """
    g1, g0 = _groups(y_hat, s)
    r1, r0 = float(np.mean(g1 == 1.0)), float(np.mean(g0 == 1.0))
    if r1 == 0.0 and r0 == 0.0:
        return 1.0
    if r1 == 0.0 or r0 == 0.0:
        return 0.0
    return min(r1 / r0, r0 / r1)


def mean_distance(y_hat, s) -> float:
    g1, g0 = _groups(y_hat, s)
    return abs(float(g1.mean()) - float(g0.mean()))


def auc_vs_sensitive(y_hat, s, tie_mode: str = "strict") -> float:
    """Fraction of (s=1, s=0) pairs where the s=1 prediction is larger.

    ``tie_mode="half"`` credits ties with 0.5.
    """
    if tie_mode not in ("strict", "half"):
        raise MetricError(f"tie_mode must be 'strict' or 'half', got {tie_mode!r}")
    g1, g0 = _groups(y_hat, s)
    greater, ties = _backend.auc_counts(g1, g0)
    total = greater + (0.5 * ties if tie_mode == "half" else 0.0)
    return total / (g1.size * g0.size)


def covariance(a, b) -> float:
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    return float(np.mean((a - a.mean()) * (b - b.mean())))


def correlation_coefficient(y_hat, s) -> float:
    a = np.asarray(y_hat, dtype=np.float64).ravel()
    b = np.asarray(s, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise MetricError("length mismatch")
    va, vb = covariance(a, a), covariance(b, b)
    if va <= 0.0 or vb <= 0.0:
        raise MetricError("correlation undefined: an input has zero variance")
    return float(np.clip(covariance(a, b) / np.sqrt(va * vb), -1.0, 1.0))


def _pair(a, b):
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise MetricError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    if a.size == 0:
        raise MetricError("empty input")
    return a, b


def rmse(y_hat, y) -> float:
    a, b = _pair(y_hat, y)
    return float(np.sqrt(np.mean((a - b) ** 2)))


def accuracy(y_hat_class, y) -> float:
    a, b = _pair(y_hat_class, y)
    return float(np.mean(a == b))


@dataclass
class FairnessReport:
    p_percent: float | None = None
    mean_distance: float | None = None
    auc_vs_sensitive: float | None = None
    corr_coefficient: float | None = None
    rmse: float | None = None
    accuracy: float | None = None
    group_counts: dict[str, int] | None = None
    per_attribute: dict[str, dict[str, float]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "FairnessReport":
        return cls(**d)


def report(task: str, predictions, dataset, tie_mode: str = "strict") -> FairnessReport:
    """Metrics appropriate to the task and to each sensitive column's kind.

    The top-level fields take the first binary and the first numeric sensitive
    column; every column's values are kept in ``per_attribute``.
    """
    scores = predictions.scores
    classes = predictions.classes
    out = FairnessReport()
    if task == "classification":
        if classes is None:
            raise MetricError("classification report needs class predictions")
        out.accuracy = accuracy(classes, dataset.y)
        fair_target = classes
    else:
        out.rmse = rmse(scores, dataset.y)
        fair_target = scores
    for j, (name, kind) in enumerate(zip(dataset.s_names, dataset.s_kinds)):
        s = dataset.S[:, j]
        vals: dict[str, float] = {}
        if kind == "binary":
            counts = {"s=1": int(np.sum(s == 1.0)), "s=0": int(np.sum(s == 0.0))}
            if task == "classification":
                vals["p_percent"] = p_percent_rule(classes, s)
            else:
                vals["mean_distance"] = mean_distance(scores, s)
                vals["auc_vs_sensitive"] = auc_vs_sensitive(scores, s, tie_mode)
            if out.group_counts is None:
                out.group_counts = counts
                out.p_percent = vals.get("p_percent")
                out.mean_distance = vals.get("mean_distance")
                out.auc_vs_sensitive = vals.get("auc_vs_sensitive")
        else:
            try:
                vals["corr_coefficient"] = correlation_coefficient(fair_target, s)
            except MetricError:
                vals["corr_coefficient"] = float("nan")
            if out.corr_coefficient is None:
                out.corr_coefficient = vals["corr_coefficient"]
        out.per_attribute[name] = vals
    return out
