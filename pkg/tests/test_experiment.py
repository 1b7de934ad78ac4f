import json

import numpy as np
import pytest
import yaml

from tsdr import experiment as ex
from tsdr.experiment import (
    DatasetMissingError,
    ExperimentError,
    ExperimentSpec,
    apply_overrides,
    check_value,
    load_spec,
    reproduce,
    run,
    run_to_dir,
)

SYNTH = {"name": "toy", "dataset": "synth", "synth": {"n": 300},
         "split": {"kind": "holdout", "train_fraction": 0.5, "repeats": 3}, "seed": 5}


def spec(**kw):
    return ExperimentSpec.from_dict({**SYNTH, **kw})


def test_spec_validation():
    with pytest.raises(ExperimentError, match=r"^\[spec\]"):
        spec(algorithms=["svm"])
    with pytest.raises(ExperimentError, match=r"^\[spec\]"):
        spec(tie_mode="loose")
    with pytest.raises(ExperimentError, match=r"^\[spec\]"):
        spec(second_stage={"kind": "boost"})
    with pytest.raises(ExperimentError, match=r"^\[spec\]"):
        ExperimentSpec.from_dict({"bogus": 1})
    with pytest.raises(ExperimentError, match=r"^\[spec\]"):
        spec(preprocessing={"nope": True})


def test_spec_file_round_trip(tmp_path):
    s = spec(preprocessing={"drop_correlated": 0.4})
    p = tmp_path / "s.yaml"
    p.write_text(yaml.safe_dump(s.to_dict()))
    assert load_spec(p) == s
    with pytest.raises(ExperimentError, match=r"^\[spec\]"):
        load_spec(tmp_path / "missing.yaml")


def test_overrides():
    s = apply_overrides(spec(), seed=9, tie_mode="half", first_stage_intercept=False,
                        quantile_transform=True, drop_correlated=None)
    assert s.seed == 9 and s.tie_mode == "half" and not s.first_stage_intercept
    assert s.preprocessing.quantile_transform and s.preprocessing.drop_correlated is None
    assert apply_overrides(spec(), seed=None) == spec()


def test_run_shapes_and_aggregate():
    r = run(spec())
    assert len(r.splits) == 3
    assert all(s["n_train"] == 150 and s["n_test"] == 150 for s in r.splits)
    agg = r.aggregate["2sdr"]["rmse"]
    xs = np.array([s["metrics"]["2sdr"]["rmse"] for s in r.splits])
    assert agg["mean"] == pytest.approx(xs.mean())
    assert agg["stderr"] == pytest.approx(xs.std(ddof=1) / np.sqrt(3))
    assert agg["runs"] == 3
    assert "abs_corr_coefficient" in r.aggregate["ols"]


def test_run_is_deterministic_bytes(tmp_path):
    s = spec(save_predictors=True)
    run_to_dir(s, tmp_path / "a")
    run_to_dir(s, tmp_path / "b")
    names = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    assert len(names) == 2 + 6
    for n in names:
        assert (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes()
    report = json.loads((tmp_path / "a" / "report.json").read_text())
    assert report["spec"]["name"] == "toy" and "version" in report


def test_failed_run_writes_nothing(tmp_path):
    s = spec(preprocessing={"quantile_transform": True})
    with pytest.raises(ExperimentError, match=r"^\[preprocess\]"):
        run_to_dir(s, tmp_path / "out")
    assert not (tmp_path / "out").exists()
    assert not any(tmp_path.iterdir())


def test_stage_tags():
    with pytest.raises(ExperimentError, match=r"^\[ingest\]"):
        run(spec(synth={"sigma_eps": -1}))
    with pytest.raises(ExperimentError, match=r"^\[fit\]"):
        run(spec(second_stage={"kind": "ridge"}))
    with pytest.raises(ExperimentError, match=r"^\[preprocess\]"):
        run(spec(explanatory=["nope"]))
    with pytest.raises(ExperimentError, match=r"^\[split\]"):
        run(spec(split={"kind": "kfold", "k": 1000}))


def test_missing_dataset_message(tmp_path):
    s = ExperimentSpec(name="g", dataset="german")
    with pytest.raises(DatasetMissingError) as e:
        run(s, tmp_path)
    msg = str(e.value)
    assert msg.startswith("[ingest]") and "german.data" in msg
    assert "1000 rows" in msg and "archive.ics.uci.edu" in msg


def test_reproduce_without_data_is_actionable(tmp_path):
    with pytest.raises(DatasetMissingError, match="rows"):
        reproduce("t5", tmp_path)


def test_data_dir_env(monkeypatch, tmp_path):
    monkeypatch.setenv("TSDR_DATA_DIR", str(tmp_path))
    assert ex.data_dir() == tmp_path
    assert ex.data_dir("x") == ex.Path("x")


def test_check_value():
    assert check_value(0.81, {"published": 0.83, "tol": 0.02})
    assert not check_value(0.80, {"published": 0.83, "tol": 0.02})
    assert check_value(0.2, {"max": 0.3}) and not check_value(0.31, {"max": 0.3})
    assert check_value(0.5, {"range": [0.4, 0.6], "min": 0.45})
    assert not check_value(float("nan"), {"min": 0.0})


def test_canned_specs_parse():
    for t in ex.TABLE_IDS:
        table = ex.load_table(t)
        if t == "fig1":
            assert {s["axis"] for s in table["sweeps"]} == {"n", "d_x", "sigma_eta_s", "std_s"}
            continue
        names = set()
        for d in table["experiments"]:
            names.add(ExperimentSpec.from_dict(d).name)
        for p in table["published"]:
            assert p["experiment"] in names


def test_reproduce_fig1_small():
    comp = reproduce("fig1", runs=3)
    assert set(comp.sweeps) == {"n", "d_x", "sigma_eta_s", "std_s"}
    assert any("rmse gap" in r["experiment"] for r in comp.rows)
    assert all(r["status"] in ("PASS", "FAIL") for r in comp.rows)
