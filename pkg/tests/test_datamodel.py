import textwrap

import numpy as np
import pytest
import yaml
from hypothesis import given, settings, strategies as st

from tsdr.datamodel import (
    DataError,
    Schema,
    SchemaError,
    SplitPlan,
    UnseenCategoryError,
    binarize_threshold,
    continuous_only,
    default_quantile_attrs,
    drop_correlated_with_target,
    expand_dummies,
    fold_sizes,
    holdout_size,
    learn_categories,
    load_csv,
    load_schema,
    quantile_transform_apply,
    quantile_transform_fit,
    resample_balance,
    split,
    split_indices,
)
from tsdr.linalg import Rng

from conftest import make_dataset

SCHEMA = {
    "name": "toy",
    "task": "classification",
    "missing_markers": ["?"],
    "columns": [
        {"name": "sex", "role": "sensitive", "kind": "binary", "positive": ["F"]},
        {"name": "age", "role": "nonsensitive", "kind": "numeric"},
        {"name": "job", "role": "nonsensitive", "kind": "categorical"},
        {"name": "hours", "role": "explanatory", "kind": "numeric"},
        {"name": "note", "role": "ignore"},
        {"name": "y", "role": "target", "kind": "binary"},
    ],
}


def write_csv(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(textwrap.dedent(text).lstrip())
    return p


def toy_schema(**changes):
    return Schema.from_dict({**SCHEMA, **changes})


# --- ingestion --------------------------------------------------------------


def test_load_csv_blocks(tmp_path):
    p = write_csv(tmp_path, """
        sex,age,job,hours,note,y
        F,30,a,40,x,1
        M,40,b,35,?,0
        F,50,a,20,z,1
    """)
    ds = load_csv(p, toy_schema())
    assert ds.n == 3
    assert ds.S[:, 0].tolist() == [1.0, 0.0, 1.0]
    assert ds.x_names == ("age", "job=a", "job=b")
    assert ds.X.tolist() == [[30, 1, 0], [40, 0, 1], [50, 1, 0]]
    assert ds.z_names == ("hours", "intercept")
    assert ds.Z[:, 1].tolist() == [1.0, 1.0, 1.0]
    assert ds.y.tolist() == [1.0, 0.0, 1.0]
    assert ds.x_sources == ("age", "job", "job")


def test_missing_marker_drops_row(tmp_path):
    p = write_csv(tmp_path, """
        sex,age,job,hours,note,y
        F,30,a,40,x,1
        M,?,b,35,x,0
        F,50,a,20,x,1
    """)
    assert load_csv(p, toy_schema()).n == 2


def test_parse_error_reports_row_and_column(tmp_path):
    p = write_csv(tmp_path, """
        sex,age,job,hours,note,y
        F,30,a,40,x,1
        M,old,b,35,x,0
    """)
    with pytest.raises(DataError, match=r"row 3, column 'age'"):
        load_csv(p, toy_schema())


def test_unknown_schema_column(tmp_path):
    p = write_csv(tmp_path, """
        sex,age,y
        F,30,1
        M,20,0
    """)
    with pytest.raises(SchemaError, match="job"):
        load_csv(p, toy_schema())


def test_empty_after_drop(tmp_path):
    p = write_csv(tmp_path, """
        sex,age,job,hours,note,y
        F,?,a,40,x,1
    """)
    with pytest.raises(DataError, match="empty"):
        load_csv(p, toy_schema())


def test_filters_and_threshold(tmp_path):
    p = write_csv(tmp_path, """
        sex,age,job,hours,note,y
        F,20,a,40,x,1
        M,30,b,35,x,0
        F,40,a,20,x,1
        M,50,b,20,x,0
    """)
    sc = toy_schema(filters=[{"column": "hours", "op": ">=", "value": 30}])
    sc = sc.with_overrides({"age": {"role": "sensitive", "binarize_threshold": 25, "positive_when": "<"}})
    ds = load_csv(p, sc)
    assert ds.n == 2
    assert ds.s_names == ("sex", "age")
    assert ds.S.tolist() == [[1, 1], [0, 0]]


def test_load_is_deterministic(tmp_path):
    p = write_csv(tmp_path, """
        sex,age,job,hours,note,y
        F,30,a,40,x,1
        M,40,b,35,x,0
    """)
    a, b = load_csv(p, toy_schema()), load_csv(p, toy_schema())
    assert np.array_equal(a.X, b.X) and a.x_names == b.x_names


def test_schema_validation():
    with pytest.raises(SchemaError):
        toy_schema(columns=[c for c in SCHEMA["columns"] if c["role"] != "target"])
    with pytest.raises(SchemaError):
        Schema.from_dict({**SCHEMA, "columns": [{"name": "a", "role": "weird"}]})
    with pytest.raises(SchemaError):
        Schema.from_dict({**SCHEMA, "columns": [
            {"name": "a", "role": "nonsensitive", "kind": "categorical", "binarize_threshold": 1}]})
    with pytest.raises(SchemaError):
        toy_schema().with_overrides({"nope": {"role": "ignore"}})


def test_schema_file_round_trip(tmp_path):
    p = tmp_path / "s.yaml"
    p.write_text(yaml.safe_dump(SCHEMA))
    assert load_schema(p) == toy_schema()


# --- column transforms ------------------------------------------------------


def test_expand_dummies_examples():
    assert expand_dummies(["a", "b", "a"], ["a", "b"]).tolist() == [[1, 0], [0, 1], [1, 0]]
    assert expand_dummies(["q", "q"], ["q"]).tolist() == [[1], [1]]
    with pytest.raises(UnseenCategoryError):
        expand_dummies(["a", "c"], ["a", "b"], "col")


@settings(max_examples=50, deadline=None)
@given(st.lists(st.sampled_from("abcde"), min_size=1, max_size=40))
def test_dummy_rows_sum_to_one(values):
    cats = learn_categories(values)
    assert cats == list(dict.fromkeys(values))
    m = expand_dummies(values, cats)
    assert np.all(m.sum(axis=1) == 1.0)


def test_binarize_examples():
    assert binarize_threshold([1, 2, 3], 2, ">=").tolist() == [0, 1, 1]
    assert binarize_threshold([24, 25, 26], 25, "<").tolist() == [1, 0, 0]
    assert binarize_threshold([24, 25, 26], 25, "<=").tolist() == [1, 1, 0]
    with pytest.raises(DataError):
        binarize_threshold([1], float("nan"))


# --- splits -----------------------------------------------------------------


def test_fold_and_holdout_sizes():
    assert fold_sizes(9, 3) == [3, 3, 3]
    assert fold_sizes(10, 3) == [4, 3, 3]
    assert holdout_size(1000, 2 / 3) == 667
    assert holdout_size(3, 2 / 3) == 2
    with pytest.raises(DataError):
        fold_sizes(2, 3)


def test_kfold_partitions_rows():
    pairs = split_indices(23, SplitPlan("kfold", k=5, seed=3))
    tests = np.concatenate([te for _, te in pairs])
    assert sorted(tests.tolist()) == list(range(23))
    for tr, te in pairs:
        assert set(tr).isdisjoint(te) and len(tr) + len(te) == 23


def test_holdout_repeats_and_determinism():
    plan = SplitPlan("holdout", 2 / 3, seed=11, repeats=3)
    a = split_indices(30, plan)
    b = split_indices(30, plan)
    assert len(a) == 3
    assert all(np.array_equal(x[0], y[0]) for x, y in zip(a, b))
    assert not np.array_equal(a[0][0], a[1][0])
    one = split_indices(30, SplitPlan("holdout", 2 / 3, seed=12))
    assert np.array_equal(one[0][0], a[1][0])  # repeat r reseeds as seed + r


def test_stratified_split_balances_classes():
    y = np.array([1.0] * 30 + [0.0] * 70)
    for tr, te in split_indices(100, SplitPlan("kfold", k=5, seed=0, stratify_on_target=True), y):
        assert y[te].sum() == 6


def test_split_plan_validation():
    for bad in (dict(kind="holdout", train_fraction=1.0), dict(kind="kfold", k=1),
                dict(kind="other"), dict(repeats=0)):
        with pytest.raises(DataError):
            SplitPlan(**bad)


def test_split_datasets(rng):
    ds = make_dataset(rng, n=30)
    (tr, te), = split(ds, SplitPlan("holdout", 2 / 3, seed=1))
    assert tr.n == 20 and te.n == 10


# --- quantile transform -----------------------------------------------------


def qt_dataset(x_by_group):
    from tsdr.datamodel import Dataset

    s = np.concatenate([[g] * len(v) for g, v in x_by_group.items()]).astype(float)
    x = np.concatenate(list(x_by_group.values())).astype(float)
    n = len(s)
    return Dataset(S=s[:, None], X=x[:, None], Z=np.ones((n, 1)), y=np.zeros(n),
                   s_names=("s",), x_names=("x",), z_names=("intercept",),
                   task="regression", s_kinds=("binary",), x_kinds=("numeric",))


def test_quantile_examples():
    ds = qt_dataset({1: [10, 20, 30], 0: [5, 5, 5]})
    out = quantile_transform_apply(quantile_transform_fit(ds, [0]), ds)
    assert out.X[:, 0].tolist() == [0.0, 1 / 3, 2 / 3, 0.0, 0.0, 0.0]


def test_quantile_unseen_values_and_empty_group():
    train = qt_dataset({1: [10, 20, 30, 40], 0: [1, 2]})
    test = qt_dataset({1: [25, 100, 0], 0: [1.5]})
    out = quantile_transform_apply(quantile_transform_fit(train, [0]), test)
    assert out.X[:, 0].tolist() == [0.5, 1.0, 0.0, 0.5]
    with pytest.raises(DataError):
        quantile_transform_fit(qt_dataset({1: [1, 2, 3]}), [0])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 6)), min_size=2, max_size=60))
def test_quantile_matches_sort_oracle(rows):
    groups = {0: [v for g, v in rows if g == 0], 1: [v for g, v in rows if g == 1]}
    if not groups[0] or not groups[1]:
        return
    ds = qt_dataset(groups)
    out = quantile_transform_apply(quantile_transform_fit(ds, [0]), ds).X[:, 0]
    i = 0
    for g in (0, 1):
        vals = sorted(groups[g])
        m = len(vals)
        for v in groups[g]:
            below = next((k for k, w in enumerate(vals) if w >= v), m)
            assert out[i] == below / m
            i += 1
        # transformed multiset lies on the grid {0, 1/m, ...}
        assert np.all(out[i - m:i] * m == np.round(out[i - m:i] * m))


def test_default_quantile_attrs(rng):
    ds = make_dataset(rng, n=50, d_x=3)
    X = ds.X.copy()
    X[:, 1] = (X[:, 1] > 0).astype(float)
    assert default_quantile_attrs(ds.with_x(X)) == [0, 2]


# --- resampling and dropping ------------------------------------------------


def test_resample_balance_counts(rng):
    ds = make_dataset(rng, n=8, task="classification")
    y = np.array([1, 1, 0, 0, 0, 0, 0, 0], dtype=float)
    from dataclasses import replace

    ds = replace(ds, y=y)
    out = resample_balance(ds, Rng(0))
    assert out.n == 12 and out.y.sum() == 6
    again = resample_balance(ds, Rng(0))
    assert np.array_equal(out.X, again.X)
    even = replace(ds, y=np.array([1, 0] * 4, dtype=float))
    assert resample_balance(even, Rng(1)).n == 8
    with pytest.raises(DataError):
        resample_balance(replace(ds, y=np.ones(8)), Rng(0))


def test_drop_correlated(rng):
    ds = make_dataset(rng, n=2000, d_x=3)
    X = ds.X.copy()
    X[:, 1] = ds.y
    X[:, 2] = rng.normal(size=2000)
    out = drop_correlated_with_target(ds.with_x(X), 0.3)
    assert "x1" not in out.x_names and "x2" in out.x_names
    with pytest.raises(DataError):
        drop_correlated_with_target(ds.with_x(np.column_stack([ds.y, ds.y])), 0.3)


def test_continuous_only_and_move_to_explanatory(rng):
    ds = make_dataset(rng, n=20, d_x=3)
    ds = ds.with_x(ds.X, kinds=("numeric", "binary", "numeric"))
    assert continuous_only(ds).x_names == ("x0", "x2")
    moved = ds.move_to_explanatory(["x2"])
    assert moved.x_names == ("x0", "x1")
    assert moved.z_names == ("x2", "intercept")
    assert np.array_equal(moved.Z[:, 0], ds.X[:, 2])
    with pytest.raises(DataError):
        ds.move_to_explanatory(["nope"])
