import os
from pathlib import Path

import numpy as np
import pytest

from tsdr.datamodel import Dataset, builtin_schema_path, load_csv, load_schema

REPO = Path(__file__).resolve().parents[1]


def dataset_dir() -> Path:
    env = os.environ.get("TSDR_DATA_DIR")
    return Path(env) if env else REPO / "data"


def have_files(name: str) -> bool:
    schema = load_schema(builtin_schema_path(name))
    return all((dataset_dir() / f).exists() for f in schema.files)


def load_builtin(name: str, overrides: dict | None = None) -> Dataset:
    schema = load_schema(builtin_schema_path(name)).with_overrides(overrides or {})
    return load_csv([dataset_dir() / f for f in schema.files], schema)


def needs(name: str):
    return pytest.mark.skipif(
        not have_files(name), reason=f"{name} files not in {dataset_dir()}"
    )


def make_dataset(rng, n=200, d_s=1, d_x=4, d_z=0, binary=True, task="regression",
                 coupling=0.8, intercept=True):
    """Small random dataset with X correlated to S."""
    if binary:
        S = (rng.uniform(size=(n, d_s)) < 0.4).astype(float)
    else:
        S = rng.normal(size=(n, d_s))
    X = S @ rng.normal(scale=coupling, size=(d_s, d_x)) + rng.normal(size=(n, d_x))
    Z = rng.normal(size=(n, d_z))
    if intercept:
        Z = np.hstack([Z, np.ones((n, 1))])
    w = rng.normal(size=d_x)
    score = X @ w + rng.normal(size=n)
    y = (score > np.median(score)).astype(float) if task == "classification" else score
    return Dataset(
        S=S, X=X, Z=Z, y=y,
        s_names=tuple(f"s{i}" for i in range(d_s)),
        x_names=tuple(f"x{i}" for i in range(d_x)),
        z_names=tuple(f"z{i}" for i in range(d_z)) + (("intercept",) if intercept else ()),
        task=task,
        s_kinds=("binary" if binary else "numeric",) * d_s,
        x_kinds=("numeric",) * d_x,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# --- acceptance ledger ------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one status line per acceptance criterion for the run summary."""

    def record(criterion: str, ok: bool | None, detail: str) -> None:
        status = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
        line = f"{status} {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
