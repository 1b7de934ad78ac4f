"""JSON documents for fitted predictors and metric reports.

Floats are written with Python's shortest round-trip repr, so loading a
dumped document reproduces every weight bit-for-bit. Non-finite values use
the ``NaN`` / ``Infinity`` tokens that Python's ``json`` module accepts.

Predictor layout::

    {"format": "tsdr-predictor", "version": 1, "kind": "2sdr" | "baseline", ...}

``kind == "2sdr"`` carries ``first_stage`` (coef rows = sensitive columns then
intercept, retained_mask, variance_factors keyed by group code) and
``second_stage``; ``kind == "baseline"`` carries ``model`` plus block widths.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .estimators import LinearModel
from .metrics import FairnessReport
from .twostage import BaselinePredictor, FirstStageModel, TwoStagePredictor

FORMAT = "tsdr-predictor"
VERSION = 1


class SerializationError(ValueError):
    pass


def _floats(a) -> list:
    return np.asarray(a, dtype=np.float64).tolist()


def linear_model_to_dict(m: LinearModel) -> dict:
    return {
        "weights": _floats(m.weights),
        "feature_names": list(m.feature_names),
        "task": m.task,
        "link": m.link,
        "chosen_alpha": m.chosen_alpha,
        "cv_scores": None if m.cv_scores is None else list(m.cv_scores),
        "train_accuracy": m.train_accuracy,
        "converged": m.converged,
        "separated": m.separated,
        "n_iter": m.n_iter,
    }


def linear_model_from_dict(d: dict) -> LinearModel:
    return LinearModel(
        weights=np.asarray(d["weights"], dtype=np.float64),
        feature_names=tuple(d["feature_names"]),
        task=d["task"],
        link=d["link"],
        chosen_alpha=d.get("chosen_alpha"),
        cv_scores=None if d.get("cv_scores") is None else tuple(d["cv_scores"]),
        train_accuracy=d.get("train_accuracy"),
        converged=d.get("converged", True),
        separated=d.get("separated", False),
        n_iter=d.get("n_iter", 0),
    )


def first_stage_to_dict(f: FirstStageModel) -> dict:
    return {
        "coef": _floats(f.coef),
        "retained_mask": [bool(v) for v in f.retained_mask],
        "intercept": f.intercept,
        "sensitive_kind": f.sensitive_kind,
        "group_columns": list(f.group_columns),
        "variance_factors": None if f.variance_factors is None else {
            str(g): _floats(v) for g, v in sorted(f.variance_factors.items())
        },
    }


def first_stage_from_dict(d: dict) -> FirstStageModel:
    n_rows = len(d["coef"])
    n_ret = sum(d["retained_mask"])
    coef = np.asarray(d["coef"], dtype=np.float64).reshape(n_rows, n_ret)
    vf = d.get("variance_factors")
    return FirstStageModel(
        coef=coef,
        retained_mask=np.asarray(d["retained_mask"], dtype=bool),
        intercept=bool(d["intercept"]),
        sensitive_kind=d["sensitive_kind"],
        group_columns=tuple(int(c) for c in d.get("group_columns", ())),
        variance_factors=None if vf is None else {
            int(g): np.asarray(v, dtype=np.float64) for g, v in vf.items()
        },
    )


def predictor_to_dict(p: TwoStagePredictor | BaselinePredictor) -> dict:
    head = {"format": FORMAT, "version": VERSION}
    if isinstance(p, TwoStagePredictor):
        return {
            **head, "kind": "2sdr",
            "first_stage": first_stage_to_dict(p.first_stage),
            "second_stage": linear_model_to_dict(p.second_stage),
            "uses_explanatory": p.uses_explanatory,
            "z_names": list(p.z_names),
        }
    if isinstance(p, BaselinePredictor):
        return {
            **head, "kind": "baseline",
            "model": linear_model_to_dict(p.model),
            "n_s": p.n_s, "n_x": p.n_x,
            "uses_sensitive": p.uses_sensitive,
            "z_names": list(p.z_names),
        }
    raise SerializationError(f"cannot serialize {type(p).__name__}")


def predictor_from_dict(d: dict) -> TwoStagePredictor | BaselinePredictor:
    if d.get("format") != FORMAT:
        raise SerializationError(f"not a predictor document (format={d.get('format')!r})")
    if d.get("version") != VERSION:
        raise SerializationError(f"unsupported predictor version {d.get('version')!r}")
    try:
        if d["kind"] == "2sdr":
            return TwoStagePredictor(
                first_stage=first_stage_from_dict(d["first_stage"]),
                second_stage=linear_model_from_dict(d["second_stage"]),
                uses_explanatory=bool(d["uses_explanatory"]),
                z_names=tuple(d["z_names"]),
            )
        if d["kind"] == "baseline":
            return BaselinePredictor(
                model=linear_model_from_dict(d["model"]),
                n_s=int(d["n_s"]), n_x=int(d["n_x"]),
                uses_sensitive=bool(d["uses_sensitive"]),
                z_names=tuple(d["z_names"]),
            )
    except KeyError as exc:
        raise SerializationError(f"predictor document lacks field {exc}") from exc
    raise SerializationError(f"unknown predictor kind {d.get('kind')!r}")


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def save_predictor(p, path: str | Path) -> None:
    Path(path).write_text(dumps(predictor_to_dict(p)), encoding="utf-8")


def load_predictor(path: str | Path):
    return predictor_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def report_to_json(r: FairnessReport) -> str:
    return dumps(r.to_dict())


def report_from_json(text: str) -> FairnessReport:
    return FairnessReport.from_dict(json.loads(text))
