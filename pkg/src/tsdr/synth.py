"""Synthetic linear-confounding data and parameter sweeps.

The generator draws ``(eta, s)`` jointly normal, then

    x = s @ beta_s + eta
    y = x @ beta_x + z @ beta_z + eps

with ``z ~ N(0, sigma_z)`` and ``eps ~ N(0, sigma_eps**2)``. Matrix
parameters are covariance matrices; ``sigma_eps`` is a standard deviation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .datamodel import Dataset, SplitPlan, split_indices
from .linalg import NotPositiveDefiniteError, Rng, cholesky, derive_seed, sample_mvn
from .metrics import correlation_coefficient, rmse
from .twostage import TwoStageOptions, fit_2sdr, fit_baseline, predict_2sdr, predict_baseline

AXES = ("n", "d_x", "sigma_eta_s", "std_s")
ALGORITHMS = ("ols", "2sdr")


class SynthError(ValueError):
    pass


def _full(shape, value):
    return np.full(shape, float(value))


@dataclass(frozen=True, eq=False)
class SynthConfig:
    d_x: int = 5
    d_z: int = 5
    d_s: int = 1
    n: int = 1000
    train_fraction: float = 2.0 / 3.0
    sigma_eps: float = 3.0
    sigma_eta: np.ndarray | None = None
    sigma_z: np.ndarray | None = None
    sigma_s: np.ndarray | None = None
    sigma_eta_s: np.ndarray | None = None
    beta_x: np.ndarray | None = None
    beta_z: np.ndarray | None = None
    beta_s: np.ndarray | None = None

    def __post_init__(self):
        dx, dz, ds = self.d_x, self.d_z, self.d_s
        defaults = {
            "sigma_eta": np.eye(dx),
            "sigma_z": np.eye(dz),
            "sigma_s": np.eye(ds),
            "sigma_eta_s": _full((dx, ds), 0.3),
            "beta_x": _full(dx, 0.5),
            "beta_z": _full(dz, 0.5),
            "beta_s": _full((ds, dx), 0.2),
        }
        for name, default in defaults.items():
            val = getattr(self, name)
            arr = default if val is None else np.asarray(val, dtype=np.float64)
            if arr.shape != default.shape:
                raise SynthError(f"{name} has shape {arr.shape}, expected {default.shape}")
            object.__setattr__(self, name, arr)
        if self.sigma_eps <= 0:
            raise SynthError("sigma_eps must be positive")
        if not 0 < self.train_fraction < 1:
            raise SynthError("train_fraction must lie in (0, 1)")
        try:
            cholesky(self.joint_covariance())
        except NotPositiveDefiniteError as exc:
            raise SynthError(f"(eta, s) covariance is not positive definite: {exc}") from exc
        try:
            cholesky(self.sigma_z)
        except NotPositiveDefiniteError as exc:
            raise SynthError(f"sigma_z is not positive definite: {exc}") from exc

    def joint_covariance(self) -> np.ndarray:
        return np.block([
            [self.sigma_eta, self.sigma_eta_s],
            [self.sigma_eta_s.T, self.sigma_s],
        ])

    def with_axis(self, axis: str, value) -> "SynthConfig":
        """Copy with one sweep parameter changed; other defaults are rebuilt to fit."""
        if axis == "n":
            return replace(self, n=int(value))
        if axis == "d_x":
            d = int(value)
            eta_s = float(self.sigma_eta_s.flat[0]) if self.sigma_eta_s.size else 0.3
            return SynthConfig(
                d_x=d, d_z=self.d_z, d_s=self.d_s, n=self.n,
                train_fraction=self.train_fraction, sigma_eps=self.sigma_eps,
                sigma_z=self.sigma_z, sigma_s=self.sigma_s, beta_z=self.beta_z,
                sigma_eta=np.eye(d) * float(self.sigma_eta[0, 0]),
                sigma_eta_s=_full((d, self.d_s), eta_s),
                beta_x=_full(d, float(self.beta_x[0])),
                beta_s=_full((self.d_s, d), float(self.beta_s.flat[0])),
            )
        if axis == "sigma_eta_s":
            return replace(self, sigma_eta_s=_full(self.sigma_eta_s.shape, value))
        if axis == "std_s":
            return replace(self, sigma_s=np.eye(self.d_s) * float(value) ** 2)
        raise SynthError(f"unknown sweep axis {axis!r}")


def generate(cfg: SynthConfig, rng: Rng) -> Dataset:
    joint = sample_mvn(np.zeros(cfg.d_x + cfg.d_s), cfg.joint_covariance(), cfg.n, rng)
    eta, s = joint[:, : cfg.d_x], joint[:, cfg.d_x :]
    z = sample_mvn(np.zeros(cfg.d_z), cfg.sigma_z, cfg.n, rng)
    eps = cfg.sigma_eps * rng.normal(cfg.n)
    x = s @ cfg.beta_s + eta
    y = x @ cfg.beta_x + z @ cfg.beta_z + eps
    return Dataset(
        S=s, X=x, Z=z, y=y,
        s_names=tuple(f"s{i}" for i in range(cfg.d_s)),
        x_names=tuple(f"x{i}" for i in range(cfg.d_x)),
        z_names=tuple(f"z{i}" for i in range(cfg.d_z)),
        task="regression",
        s_kinds=("numeric",) * cfg.d_s,
        x_kinds=("numeric",) * cfg.d_x,
        name="synth",
    )


def evaluate_run(cfg: SynthConfig, seed: int) -> dict[str, dict[str, float]]:
    """Generate, split, fit both algorithms; CC(s, y_hat) and RMSE on the test rows."""
    ds = generate(cfg, Rng(derive_seed(seed, 0)))
    plan = SplitPlan("holdout", cfg.train_fraction, seed=derive_seed(seed, 1))
    (tr, te), = split_indices(ds.n, plan)
    train, test = ds.take(tr), ds.take(te)
    s = test.S[:, 0]
    base = predict_baseline(fit_baseline(train, "ols", uses_sensitive=False), test).scores
    two = predict_2sdr(fit_2sdr(train, "ols", TwoStageOptions()), test).scores
    return {
        "ols": {"cc": correlation_coefficient(base, s), "rmse": rmse(base, test.y)},
        "2sdr": {"cc": correlation_coefficient(two, s), "rmse": rmse(two, test.y)},
    }


@dataclass
class SweepResult:
    axis: str
    values: list
    runs: int
    cells: list[dict] = field(default_factory=list)
    invalid: dict = field(default_factory=dict)
    base_n: int | None = None

    def summary(self) -> list[dict]:
        """Rows of (axis, value, algorithm, metric, mean, stderr, runs, status)."""
        rows = []
        for v in self.values:
            for alg in ALGORITHMS:
                for metric in ("abs_cc", "cc", "rmse"):
                    if v in self.invalid:
                        rows.append(dict(axis=self.axis, value=v, algorithm=alg, metric=metric,
                                         mean=math.nan, stderr=math.nan, runs=0,
                                         status="invalid"))
                        continue
                    key = "cc" if metric == "abs_cc" else metric
                    xs = np.array([c[key] for c in self.cells
                                   if c["value"] == v and c["algorithm"] == alg])
                    if metric == "abs_cc":
                        xs = np.abs(xs)
                    se = float(xs.std(ddof=1) / math.sqrt(xs.size)) if xs.size > 1 else math.nan
                    rows.append(dict(axis=self.axis, value=v, algorithm=alg, metric=metric,
                                     mean=float(xs.mean()), stderr=se, runs=int(xs.size),
                                     status="ok"))
        return rows

    def mean(self, value, algorithm: str, metric: str) -> float:
        for r in self.summary():
            if r["value"] == value and r["algorithm"] == algorithm and r["metric"] == metric:
                return r["mean"]
        raise KeyError((value, algorithm, metric))

    def write_csv(self, target) -> None:
        """Write the summary to a path or an open text stream."""
        if isinstance(target, (str, Path)):
            with open(target, "w", newline="", encoding="utf-8") as fh:
                self.write_csv(fh)
            return
        cols = ["axis", "value", "algorithm", "metric", "mean", "stderr", "runs", "status"]
        w = csv.DictWriter(target, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in self.summary():
            w.writerow({k: (repr(r[k]) if isinstance(r[k], float) else r[k]) for k in cols})


def sweep(
    cfg_base: SynthConfig,
    axis: str,
    values: Sequence,
    runs: int,
    seed: int = 0,
) -> SweepResult:
    """Average CC and RMSE of OLS and 2SDR over ``runs`` draws per axis value.

    Run ``r`` at value index ``i`` uses seed ``derive_seed(seed, i, r)``, so any
    single cell can be recomputed on its own.
    """
    if axis not in AXES:
        raise SynthError(f"unknown sweep axis {axis!r}; choose from {AXES}")
    if not values:
        raise SynthError("sweep needs at least one value")
    values = list(values)
    result = SweepResult(axis, values, runs, base_n=cfg_base.n)
    for i, v in enumerate(values):
        try:
            cfg = cfg_base.with_axis(axis, v)
        except SynthError as exc:
            result.invalid[v] = str(exc)
            continue
        for r in range(runs):
            out = evaluate_run(cfg, derive_seed(seed, i, r))
            for alg in ALGORITHMS:
                result.cells.append(dict(value=v, run=r, algorithm=alg, **out[alg]))
    return result


FIG1_GRID = {
    "n": [100, 300, 1000, 3000, 10000],
    "d_x": [1, 2, 5, 8, 10],
    "sigma_eta_s": [0.0, 0.1, 0.2, 0.3, 0.4],
    "std_s": [0.75, 1.0, 1.5, 2.0, 3.0],
}
