"""Datasets, schema-driven CSV ingestion and the preprocessing transforms.

A :class:`Dataset` holds four aligned blocks: sensitive attributes ``S``,
non-sensitive attributes ``X``, explanatory attributes ``Z`` (with an
all-ones ``intercept`` column by default) and the target ``y``. Everything is
immutable; transforms return new datasets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Literal, Sequence

import numpy as np
import pandas as pd
import yaml

from . import _backend
from .linalg import Rng

ROLES = ("sensitive", "nonsensitive", "explanatory", "target", "ignore")
KINDS = ("numeric", "binary", "categorical")
COMPARATORS = (">=", "<=", ">", "<")
INTERCEPT = "intercept"


class DataError(ValueError):
    """Invalid data, schema or transform input."""


class SchemaError(DataError):
    pass


class UnseenCategoryError(DataError):
    def __init__(self, value, column: str | None = None):
        self.value = value
        where = f" in column {column!r}" if column else ""
        super().__init__(f"category {value!r}{where} was not seen in training data")


# ---------------------------------------------------------------------------
# Schema
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ColumnSpec:
    """How one input column maps into the dataset blocks.

    ``positive`` lists the raw strings that mean 1 for a string-valued binary
    column. ``category_map`` summarizes raw categories before dummy expansion
    and ``drop_first`` removes the first-seen category's dummy (reference
    level).
    """

    name: str
    role: str
    kind: str = "numeric"
    binarize_threshold: float | None = None
    positive_when: str = ">="
    missing_marker: str | None = None
    positive: tuple[str, ...] | None = None
    category_map: dict[str, str] | None = None
    categories: tuple[str, ...] | None = None
    drop_first: bool = False

    def __post_init__(self):
        if self.role not in ROLES:
            raise SchemaError(f"column {self.name!r}: unknown role {self.role!r}")
        if self.kind not in KINDS:
            raise SchemaError(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.binarize_threshold is not None and self.kind != "numeric":
            raise SchemaError(
                f"column {self.name!r}: binarize_threshold needs kind=numeric"
            )
        if self.positive_when not in COMPARATORS:
            raise SchemaError(
                f"column {self.name!r}: positive_when must be one of {COMPARATORS}"
            )

    @property
    def is_binary_output(self) -> bool:
        return self.kind == "binary" or self.binarize_threshold is not None

    @classmethod
    def from_dict(cls, d: dict) -> "ColumnSpec":
        d = dict(d)
        for key in ("positive", "categories"):
            if d.get(key) is not None:
                d[key] = tuple(str(v) for v in d[key])
        if d.get("category_map") is not None:
            d["category_map"] = {str(k): str(v) for k, v in d["category_map"].items()}
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise SchemaError(f"column {d.get('name')!r}: unknown fields {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class RowFilter:
    column: str
    op: str
    value: object

    _OPS = ("==", "!=", "<=", ">=", "<", ">", "in", "not_in")

    def __post_init__(self):
        if self.op not in self._OPS:
            raise SchemaError(f"filter on {self.column!r}: unknown op {self.op!r}")

    def mask(self, raw: pd.Series) -> np.ndarray:
        op, v = self.op, self.value
        if op in ("in", "not_in"):
            hit = raw.isin([str(x) for x in v]).to_numpy()
            return hit if op == "in" else ~hit
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            x = pd.to_numeric(raw, errors="coerce").to_numpy(dtype=float)
            with np.errstate(invalid="ignore"):
                res = {
                    "==": x == v, "!=": x != v, "<=": x <= v,
                    ">=": x >= v, "<": x < v, ">": x > v,
                }[op]
            return res & ~np.isnan(x) if op != "!=" else res | np.isnan(x)
        s = raw.to_numpy(dtype=object)
        if op == "==":
            return s == str(v)
        if op == "!=":
            return s != str(v)
        raise SchemaError(f"filter on {self.column!r}: op {op!r} needs a numeric value")


@dataclass(frozen=True)
class Schema:
    """Everything needed to turn raw files into a :class:`Dataset`."""

    name: str
    task: str
    columns: tuple[ColumnSpec, ...]
    files: tuple[str, ...] = ()
    delimiter: str = ","
    header: bool = True
    column_names: tuple[str, ...] | None = None
    skiprows: tuple[int, ...] = ()
    skipinitialspace: bool = False
    comment: str | None = None
    missing_markers: tuple[str, ...] = ()
    filters: tuple[RowFilter, ...] = ()
    intercept: bool = True
    source: str = ""
    expected_rows: int | None = None
    expected_attributes: int | None = None

    def __post_init__(self):
        if self.task not in ("regression", "classification"):
            raise SchemaError(f"schema {self.name!r}: unknown task {self.task!r}")
        targets = [c for c in self.columns if c.role == "target"]
        if len(targets) != 1:
            raise SchemaError(
                f"schema {self.name!r}: exactly one target column required, got {len(targets)}"
            )
        names = [c.name for c in self.columns]
        dup = {n for n in names if names.count(n) > 1}
        if dup:
            raise SchemaError(f"schema {self.name!r}: duplicate columns {sorted(dup)}")

    @property
    def target(self) -> ColumnSpec:
        return next(c for c in self.columns if c.role == "target")

    def column(self, name: str) -> ColumnSpec:
        for c in self.columns:
            if c.name == name:
                return c
        raise SchemaError(f"schema {self.name!r} has no column {name!r}")

    def with_overrides(self, overrides: dict[str, dict]) -> "Schema":
        """Copy with per-column field overrides, e.g. ``{"age": {"role": "sensitive"}}``."""
        cols = []
        known = {c.name for c in self.columns}
        for name in overrides:
            if name not in known:
                raise SchemaError(f"override for unknown column {name!r}")
        for c in self.columns:
            o = overrides.get(c.name)
            if o:
                d = {k: getattr(c, k) for k in c.__dataclass_fields__}
                d.update(o)
                c = ColumnSpec.from_dict(d)
            cols.append(c)
        return replace(self, columns=tuple(cols))

    @classmethod
    def from_dict(cls, d: dict) -> "Schema":
        d = dict(d)
        d["columns"] = tuple(ColumnSpec.from_dict(c) for c in d["columns"])
        d["filters"] = tuple(RowFilter(**f) for f in d.get("filters", ()))
        for key in ("files", "column_names", "missing_markers"):
            if d.get(key) is not None:
                d[key] = tuple(str(v) for v in d[key])
        d["skiprows"] = tuple(int(v) for v in d.get("skiprows", ()))
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise SchemaError(f"unknown schema fields {sorted(unknown)}")
        return cls(**d)


def load_schema(path: str | Path) -> Schema:
    with open(path, encoding="utf-8") as fh:
        return Schema.from_dict(yaml.safe_load(fh))


def builtin_schema_path(name: str) -> Path:
    p = Path(__file__).parent / "data" / "schemas" / f"{name}.yaml"
    if not p.exists():
        raise SchemaError(f"no built-in schema named {name!r}")
    return p


# ---------------------------------------------------------------------------
# Dataset
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Dataset:
    """Column-partitioned data table.

    ``s_kinds``/``x_kinds`` tag each column ``"binary"`` or ``"numeric"``;
    ``x_sources`` names the raw column each X column came from (dummies share
    a source).
    """

    S: np.ndarray
    X: np.ndarray
    Z: np.ndarray
    y: np.ndarray
    s_names: tuple[str, ...]
    x_names: tuple[str, ...]
    z_names: tuple[str, ...]
    task: str
    s_kinds: tuple[str, ...]
    x_kinds: tuple[str, ...]
    y_name: str = "y"
    x_sources: tuple[str, ...] = ()
    name: str = ""

    def __post_init__(self):
        n = self.y.shape[0]
        if n < 1:
            raise DataError("dataset is empty")
        for label, block, names in (
            ("S", self.S, self.s_names),
            ("X", self.X, self.x_names),
            ("Z", self.Z, self.z_names),
        ):
            if block.ndim != 2 or block.shape[0] != n:
                raise DataError(f"block {label} has shape {block.shape}, expected ({n}, k)")
            if block.shape[1] != len(names):
                raise DataError(f"block {label} has {block.shape[1]} columns but {len(names)} names")
        if len(self.s_kinds) != self.S.shape[1] or len(self.x_kinds) != self.X.shape[1]:
            raise DataError("column kind tags do not match block widths")
        if self.task == "classification" and not np.all(np.isin(self.y, (0.0, 1.0))):
            raise DataError("classification targets must be exactly 0 or 1")
        if not self.x_sources:
            object.__setattr__(self, "x_sources", self.x_names)

    @property
    def n(self) -> int:
        return int(self.y.shape[0])

    @property
    def binary_sensitive(self) -> list[int]:
        return [i for i, k in enumerate(self.s_kinds) if k == "binary"]

    def take(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        return replace(
            self, S=self.S[rows], X=self.X[rows], Z=self.Z[rows], y=self.y[rows]
        )

    def with_x(self, X: np.ndarray, names=None, kinds=None, sources=None) -> "Dataset":
        return replace(
            self,
            X=X,
            x_names=tuple(names) if names is not None else self.x_names,
            x_kinds=tuple(kinds) if kinds is not None else self.x_kinds,
            x_sources=tuple(sources) if sources is not None else self.x_sources,
        )

    def select_x(self, keep) -> "Dataset":
        keep = np.asarray(keep)
        if keep.dtype == bool:
            keep = np.flatnonzero(keep)
        if keep.size == 0:
            raise DataError("no non-sensitive attributes left")
        pick = lambda t: tuple(t[i] for i in keep)  # noqa: E731
        return self.with_x(
            self.X[:, keep], pick(self.x_names), pick(self.x_kinds), pick(self.x_sources)
        )

    def move_to_explanatory(self, sources: Iterable[str]) -> "Dataset":
        """Move every X column derived from ``sources`` into Z (before the intercept)."""
        sources = list(sources)
        missing = [s for s in sources if s not in self.x_sources and s not in self.x_names]
        if missing:
            raise DataError(f"explanatory attributes not in X: {missing}")
        move = [i for i, (nm, src) in enumerate(zip(self.x_names, self.x_sources))
                if src in sources or nm in sources]
        stay = [i for i in range(self.X.shape[1]) if i not in move]
        has_icpt = len(self.z_names) > 0 and self.z_names[-1] == INTERCEPT
        z_head = self.Z[:, :-1] if has_icpt else self.Z
        z_head_names = self.z_names[:-1] if has_icpt else self.z_names
        Z = np.hstack([z_head, self.X[:, move]] + ([self.Z[:, -1:]] if has_icpt else []))
        z_names = z_head_names + tuple(self.x_names[i] for i in move) + (
            (INTERCEPT,) if has_icpt else ()
        )
        ds = self.select_x(stay)
        return replace(ds, Z=Z, z_names=z_names)


# ---------------------------------------------------------------------------
# Column transforms
# ---------------------------------------------------------------------------


def learn_categories(values: Sequence) -> list:
    """Distinct values in order of first appearance."""
    return list(dict.fromkeys(values))


def expand_dummies(values: Sequence, categories: Sequence, column: str | None = None) -> np.ndarray:
    """One-hot indicator matrix with one column per category."""
    index = {c: j for j, c in enumerate(categories)}
    out = np.zeros((len(values), len(categories)), dtype=np.float64)
    for i, v in enumerate(values):
        j = index.get(v)
        if j is None:
            raise UnseenCategoryError(v, column)
        out[i, j] = 1.0
    return out


def binarize_threshold(values, cut: float, positive_when: str = ">=") -> np.ndarray:
    """Elementwise 0/1 indicator of ``values <positive_when> cut``."""
    if not math.isfinite(cut):
        raise DataError("binarization cut must be finite")
    v = np.asarray(values, dtype=np.float64)
    ops = {">=": np.greater_equal, "<=": np.less_equal, ">": np.greater, "<": np.less}
    try:
        op = ops[positive_when]
    except KeyError:
        raise DataError(f"positive_when must be one of {COMPARATORS}") from None
    return op(v, cut).astype(np.float64)


def _parse_numeric(raw: pd.Series, column: str, rows: np.ndarray) -> np.ndarray:
    vals = pd.to_numeric(raw, errors="coerce").to_numpy(dtype=np.float64)
    bad = ~np.isfinite(vals)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise DataError(
            f"cannot parse {raw.iloc[i]!r} as a number at row {rows[i]}, column {column!r}"
        )
    return vals


def _read_frames(paths: Sequence[Path], schema: Schema) -> tuple[pd.DataFrame, np.ndarray]:
    frames, rownums = [], []
    for path in paths:
        if not Path(path).exists():
            raise FileNotFoundError(f"data file not found: {path}")
        df = pd.read_csv(
            path,
            sep=schema.delimiter,
            header=0 if schema.header else None,
            names=list(schema.column_names) if schema.column_names else None,
            skiprows=list(schema.skiprows) or None,
            skipinitialspace=schema.skipinitialspace,
            comment=schema.comment,
            skip_blank_lines=True,
            dtype=str,
            keep_default_na=False,
            na_filter=False,
            engine="python" if len(schema.delimiter) > 1 else "c",
        )
        # file row numbers, 1-based, counting the header line
        offset = (1 if schema.header else 0) + len(schema.skiprows)
        rownums.append(np.arange(len(df)) + 1 + offset)
        frames.append(df)
    df = pd.concat(frames, ignore_index=True) if len(frames) > 1 else frames[0]
    return df, np.concatenate(rownums)


def load_csv(paths: str | Path | Sequence[str | Path], schema: Schema) -> Dataset:
    """Read one or more delimited files and assemble a :class:`Dataset`.

    Rows with a missing marker in any used column are dropped, row filters are
    applied, categorical columns are expanded into dummies (categories learned
    from the loaded rows in first-appearance order) and numeric columns with a
    threshold are binarized.
    """
    if isinstance(paths, (str, Path)):
        paths = [paths]
    df, rownums = _read_frames([Path(p) for p in paths], schema)
    header = set(df.columns)
    for c in schema.columns:
        if c.name not in header:
            raise SchemaError(f"schema column {c.name!r} not found in file header")
    for f in schema.filters:
        if f.column not in header:
            raise SchemaError(f"filter column {f.column!r} not found in file header")

    used = [c for c in schema.columns if c.role != "ignore"]
    keep = np.ones(len(df), dtype=bool)
    for c in used:
        markers = set(schema.missing_markers)
        if c.missing_marker is not None:
            markers.add(c.missing_marker)
        if markers:
            keep &= ~df[c.name].isin(markers).to_numpy()
    for f in schema.filters:
        keep &= f.mask(df[f.column])
    df = df.loc[keep].reset_index(drop=True)
    rownums = rownums[keep]
    if len(df) == 0:
        raise DataError(f"dataset {schema.name!r} is empty after dropping rows")

    blocks: dict[str, list] = {"sensitive": [], "nonsensitive": [], "explanatory": []}
    y = None
    for c in used:
        raw = df[c.name]
        cols, names, kinds = _encode_column(c, raw, rownums)
        if c.role == "target":
            if cols.shape[1] != 1:
                raise SchemaError(f"target {c.name!r} must encode to a single column")
            y = cols[:, 0]
            continue
        blocks[c.role].append((cols, names, kinds, c.name))

    def assemble(role):
        parts = blocks[role]
        if not parts:
            return np.zeros((len(df), 0)), (), (), ()
        mat = np.hstack([p[0] for p in parts])
        names = tuple(n for p in parts for n in p[1])
        kinds = tuple(k for p in parts for k in p[2])
        sources = tuple(p[3] for p in parts for _ in p[1])
        return mat, names, kinds, sources

    S, s_names, s_kinds, _ = assemble("sensitive")
    X, x_names, x_kinds, x_sources = assemble("nonsensitive")
    Z, z_names, _, _ = assemble("explanatory")
    if schema.intercept:
        Z = np.hstack([Z, np.ones((len(df), 1))])
        z_names = z_names + (INTERCEPT,)
    if schema.task == "classification" and not np.all(np.isin(y, (0.0, 1.0))):
        raise DataError(f"target {schema.target.name!r} is not 0/1 for a classification task")
    return Dataset(
        S=S, X=X, Z=Z, y=y,
        s_names=s_names, x_names=x_names, z_names=z_names,
        task=schema.task, s_kinds=s_kinds, x_kinds=x_kinds,
        y_name=schema.target.name, x_sources=x_sources, name=schema.name,
    )


def _encode_column(c: ColumnSpec, raw: pd.Series, rownums: np.ndarray):
    if c.kind == "numeric":
        vals = _parse_numeric(raw, c.name, rownums)
        if c.binarize_threshold is not None:
            return binarize_threshold(vals, c.binarize_threshold, c.positive_when)[:, None], (c.name,), ("binary",)
        return vals[:, None], (c.name,), ("numeric",)
    strs = raw.to_numpy(dtype=object)
    if c.kind == "binary":
        if c.positive is not None:
            return np.isin(strs, c.positive).astype(np.float64)[:, None], (c.name,), ("binary",)
        vals = _parse_numeric(raw, c.name, rownums)
        if not np.all(np.isin(vals, (0.0, 1.0))):
            raise DataError(f"binary column {c.name!r} has values other than 0/1; set 'positive'")
        return vals[:, None], (c.name,), ("binary",)
    if c.category_map:
        strs = np.array([c.category_map.get(v, v) for v in strs], dtype=object)
    cats = list(c.categories) if c.categories else learn_categories(strs)
    mat = expand_dummies(strs, cats, c.name)
    names = [f"{c.name}={v}" for v in cats]
    if c.drop_first:
        mat, names = mat[:, 1:], names[1:]
    return mat, tuple(names), ("binary",) * len(names)


# ---------------------------------------------------------------------------
# Splitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SplitPlan:
    kind: Literal["holdout", "kfold"] = "holdout"
    train_fraction: float = 2.0 / 3.0
    k: int = 10
    seed: int = 0
    stratify_on_target: bool = False
    repeats: int = 1

    def __post_init__(self):
        if self.kind not in ("holdout", "kfold"):
            raise DataError(f"unknown split kind {self.kind!r}")
        if self.kind == "holdout" and not 0.0 < self.train_fraction < 1.0:
            raise DataError("train_fraction must lie in (0, 1)")
        if self.kind == "kfold" and self.k < 2:
            raise DataError("k-fold needs k >= 2")
        if self.repeats < 1:
            raise DataError("repeats must be >= 1")


def holdout_size(n: int, fraction: float) -> int:
    return min(n - 1, max(1, math.ceil(n * fraction - 1e-9)))


def fold_sizes(n: int, k: int) -> list[int]:
    """Near-equal fold sizes; the first ``n % k`` folds get one extra row."""
    if k > n:
        raise DataError(f"cannot make {k} folds from {n} rows")
    base, rem = divmod(n, k)
    return [base + 1 if i < rem else base for i in range(k)]


def _order(y: np.ndarray, rng: Rng, stratify: bool) -> np.ndarray:
    perm = rng.permutation(len(y))
    if not stratify:
        return perm
    # interleave classes so contiguous chunks are stratified
    labels = y[perm]
    pos = np.empty(len(y))
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        pos[idx] = (np.arange(len(idx)) + 0.5) / len(idx)
    return perm[np.argsort(pos, kind="stable")]


def split_indices(n: int, plan: SplitPlan, y: np.ndarray | None = None) -> list[tuple[np.ndarray, np.ndarray]]:
    """Row index pairs ``(train, test)`` for every repeat (and fold)."""
    if plan.kind == "holdout" and n < 2:
        raise DataError("holdout split needs at least 2 rows")
    if plan.kind == "kfold" and plan.k > n:
        raise DataError(f"cannot make {plan.k} folds from {n} rows")
    y = np.zeros(n) if y is None else np.asarray(y)
    out = []
    for r in range(plan.repeats):
        order = _order(y, Rng(plan.seed + r), plan.stratify_on_target)
        if plan.kind == "holdout":
            m = holdout_size(n, plan.train_fraction)
            out.append((np.sort(order[:m]), np.sort(order[m:])))
        else:
            bounds = np.cumsum([0] + fold_sizes(n, plan.k))
            for i in range(plan.k):
                test = order[bounds[i]:bounds[i + 1]]
                train = np.concatenate([order[:bounds[i]], order[bounds[i + 1]:]])
                out.append((np.sort(train), np.sort(test)))
    return out


def split(ds: Dataset, plan: SplitPlan) -> list[tuple[Dataset, Dataset]]:
    return [(ds.take(tr), ds.take(te)) for tr, te in split_indices(ds.n, plan, ds.y)]


# ---------------------------------------------------------------------------
# Group-wise quantile (ordinal) transform
# ---------------------------------------------------------------------------


def group_keys(ds: Dataset) -> np.ndarray:
    """Integer group code per row from the binary sensitive columns."""
    idx = ds.binary_sensitive
    if not idx:
        raise DataError("grouping needs at least one binary sensitive attribute")
    bits = ds.S[:, idx].astype(np.int64)
    weights = 1 << np.arange(len(idx), dtype=np.int64)
    return bits @ weights


@dataclass(frozen=True, eq=False)
class RankMaps:
    """Sorted training values per (group, attribute)."""

    attrs: tuple[int, ...]
    tables: dict[int, tuple[np.ndarray, ...]] = field(default_factory=dict)

    def groups(self) -> list[int]:
        return sorted(self.tables)


def default_quantile_attrs(ds: Dataset) -> list[int]:
    """Indices of X columns that take more than two distinct values."""
    return [j for j in range(ds.X.shape[1]) if np.unique(ds.X[:, j]).size > 2]


def quantile_transform_fit(train: Dataset, attrs: Sequence[int] | None = None) -> RankMaps:
    attrs = tuple(default_quantile_attrs(train) if attrs is None else attrs)
    for a in attrs:
        if not 0 <= a < train.X.shape[1]:
            raise DataError(f"attribute index {a} out of range")
    keys = group_keys(train)
    tables = {}
    for g in np.unique(keys):
        rows = keys == g
        tables[int(g)] = tuple(np.sort(train.X[rows, a]) for a in attrs)
    for i in train.binary_sensitive:
        if np.unique(train.S[:, i]).size < 2:
            raise DataError(
                f"sensitive group of {train.s_names[i]!r} is empty in the training data"
            )
    return RankMaps(attrs=attrs, tables=tables)


def quantile_transform_apply(maps: RankMaps, ds: Dataset) -> Dataset:
    """Replace each selected attribute by its within-group strict-below rank fraction."""
    keys = group_keys(ds)
    X = ds.X.copy()
    for g in np.unique(keys):
        table = maps.tables.get(int(g))
        if table is None:
            raise DataError(f"sensitive group {int(g)} was empty when the transform was fit")
        rows = np.flatnonzero(keys == g)
        for a, ref in zip(maps.attrs, table):
            counts = _backend.strict_below_counts(ref, X[rows, a])
            X[rows, a] = counts / ref.shape[0]
    kinds = list(ds.x_kinds)
    for a in maps.attrs:
        kinds[a] = "numeric"
    return ds.with_x(X, kinds=kinds)


# ---------------------------------------------------------------------------
# Resampling and attribute dropping
# ---------------------------------------------------------------------------


def resample_balance(train: Dataset, rng: Rng) -> Dataset:
    """Oversample the minority class with replacement until classes are equal."""
    if train.task != "classification":
        raise DataError("resampling needs a classification task")
    pos = np.flatnonzero(train.y == 1.0)
    neg = np.flatnonzero(train.y == 0.0)
    if pos.size == 0 or neg.size == 0:
        raise DataError("resampling needs both classes present")
    minority, majority = (pos, neg) if pos.size < neg.size else (neg, pos)
    extra = minority[rng.integers(minority.size, majority.size - minority.size)]
    rows = np.concatenate([pos, neg, extra])
    rows = rows[rng.permutation(rows.size)]
    return train.take(rows)


def pearson(a: np.ndarray, b: np.ndarray) -> float:
    a = a - a.mean()
    b = b - b.mean()
    denom = math.sqrt(float(a @ a) * float(b @ b))
    return float(a @ b) / denom if denom > 0 else 0.0


def drop_correlated_with_target(ds: Dataset, threshold: float) -> Dataset:
    """Remove X columns whose |Pearson correlation| with y exceeds ``threshold``."""
    if not 0.0 < threshold <= 1.0:
        raise DataError("threshold must lie in (0, 1]")
    keep = [j for j in range(ds.X.shape[1]) if abs(pearson(ds.X[:, j], ds.y)) <= threshold]
    if not keep:
        raise DataError("every attribute is correlated with the target above the threshold")
    return ds.select_x(keep)


def continuous_only(ds: Dataset) -> Dataset:
    """Keep only X columns that are not binary indicators."""
    keep = [j for j, k in enumerate(ds.x_kinds) if k == "numeric"]
    return ds.select_x(keep)
