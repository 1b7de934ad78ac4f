"""Golden shapes of the built-in schemas on the real dataset files."""

import numpy as np
import pytest

from tsdr.twostage import filter_zero_variance

from conftest import have_files, load_builtin

GOLDEN = {
    # name: (rows, X columns, s=1 rows, mean y, dropped by the zero-variance filter)
    "adult": (45222, 49, 14695, 0.247844, ["occupation=Armed-Forces"]),
    "german": (1000, 47, 190, 0.3, ["purpose=A410"]),
    "compas": (6172, 12, 1175, 0.45512, []),
}


@pytest.mark.dataset
@pytest.mark.parametrize("name", sorted(GOLDEN))
def test_golden_shapes(name):
    if not have_files(name):
        pytest.skip(f"{name} files not available")
    rows, d_x, s1, ymean, dropped = GOLDEN[name]
    ds = load_builtin(name)
    assert ds.n == rows and ds.X.shape[1] == d_x
    assert int(ds.S[:, 0].sum()) == s1
    assert ds.y.mean() == pytest.approx(ymean, abs=5e-7)
    keep = filter_zero_variance(ds.S[:, :1], ds.X)
    assert [n for n, k in zip(ds.x_names, keep) if not k] == dropped
    assert np.all(np.isfinite(ds.X))


@pytest.mark.dataset
@pytest.mark.parametrize("name", ["communities", "lsac"])
def test_unverified_schemas_load_when_present(name):
    if not have_files(name):
        pytest.skip(f"{name} files not available")
    ds = load_builtin(name)
    assert ds.n > 0 and ds.S.shape[1] == 1
