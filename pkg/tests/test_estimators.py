import numpy as np
import pytest
from scipy.optimize import minimize

from tsdr.estimators import (
    ConvergenceError,
    EstimatorError,
    fit_logistic,
    fit_ols,
    fit_ridge_classifier,
    logistic_gradient,
    logistic_log_likelihood,
    predict,
)
from tsdr.linalg import Rng

from test_linalg import gauss_solve


def with_intercept(F):
    return np.hstack([F, np.ones((F.shape[0], 1))])


def labels_for(F, rng, noise=1.0):
    w = rng.normal(size=F.shape[1])
    return (F @ w + noise * rng.normal(size=F.shape[0]) > 0).astype(float)


# --- OLS --------------------------------------------------------------------


def test_ols_matches_gaussian_elimination(rng):
    F = with_intercept(rng.normal(size=(60, 3)))
    y = rng.normal(size=60)
    m = fit_ols(F, y)
    assert np.allclose(m.weights, gauss_solve(F.T @ F, F.T @ y), rtol=1e-10, atol=1e-12)
    assert m.link == "identity" and m.feature_names == ("f0", "f1", "f2", "f3")
    assert np.allclose(predict(m, F).scores, F @ m.weights)
    assert predict(m, F).classes is None


def test_predict_shape_check(rng):
    m = fit_ols(rng.normal(size=(10, 2)), rng.normal(size=10))
    with pytest.raises(EstimatorError):
        predict(m, np.ones((3, 3)))


# --- ridge ------------------------------------------------------------------


def test_ridge_alpha_zero_is_ols_on_signed_labels(rng):
    F = with_intercept(rng.normal(size=(80, 4)))
    y = labels_for(F, rng)
    m = fit_ridge_classifier(F, y, alpha_grid=[0.0], folds=4)
    ols = fit_ols(F, 2 * y - 1)
    assert np.abs(m.weights - ols.weights).max() <= 1e-8
    assert m.chosen_alpha == 0.0


def test_ridge_matches_closed_form_with_free_intercept(rng):
    F = with_intercept(rng.normal(size=(70, 3)))
    y = labels_for(F, rng)
    t = 2 * y - 1
    alpha = 5.0
    P = np.diag([1.0, 1.0, 1.0, 0.0])
    ref = gauss_solve(F.T @ F + alpha * P, F.T @ t)
    m = fit_ridge_classifier(F, y, alpha_grid=[alpha], folds=5)
    assert np.allclose(m.weights, ref, atol=1e-10)


def test_ridge_intercept_not_shrunk(rng):
    F = with_intercept(rng.normal(size=(200, 3)))
    y = (rng.uniform(size=200) < 0.8).astype(float)
    m = fit_ridge_classifier(F, y, alpha_grid=[1e9], folds=5)
    assert np.abs(m.weights[:3]).max() < 1e-5
    assert m.weights[3] == pytest.approx(np.mean(2 * y - 1), abs=1e-5)


def test_ridge_cv_ties_take_largest_alpha(rng):
    # far-apart classes: every alpha in the grid classifies every fold perfectly
    x = np.concatenate([rng.normal(-10, 0.1, 50), rng.normal(10, 0.1, 50)])
    y = np.concatenate([np.zeros(50), np.ones(50)])
    F = with_intercept(x[:, None])
    m = fit_ridge_classifier(F, y, alpha_grid=[0.01, 0.1, 1.0, 10.0], folds=5)
    assert set(m.cv_scores) == {1.0}
    assert m.chosen_alpha == 10.0


def test_ridge_cv_is_seeded(rng):
    F = with_intercept(rng.normal(size=(90, 5)))
    y = labels_for(F, rng, noise=3.0)
    a = fit_ridge_classifier(F, y, rng=Rng(3))
    b = fit_ridge_classifier(F, y, rng=Rng(3))
    assert a.cv_scores == b.cv_scores and np.array_equal(a.weights, b.weights)
    assert len(a.cv_scores) == 13


def test_ridge_rejects_bad_inputs(rng):
    F = rng.normal(size=(20, 2))
    with pytest.raises(EstimatorError):
        fit_ridge_classifier(F, np.full(20, 2.0))
    with pytest.raises(EstimatorError):
        fit_ridge_classifier(F, np.ones(20))
    with pytest.raises(EstimatorError):
        fit_ridge_classifier(F, labels_for(F, rng), alpha_grid=[-1.0])
    with pytest.raises(EstimatorError):
        fit_ridge_classifier(F, labels_for(F, rng), folds=1)


# --- logistic ---------------------------------------------------------------


def test_logistic_gradient_finite_differences(rng):
    F = with_intercept(rng.normal(size=(50, 3)))
    y = labels_for(F, rng)
    w = rng.normal(size=4)
    g = logistic_gradient(F, y, w)
    h = 1e-6
    for j in range(4):
        e = np.zeros(4)
        e[j] = h
        fd = (logistic_log_likelihood(F, y, w + e) - logistic_log_likelihood(F, y, w - e)) / (2 * h)
        assert abs(fd - g[j]) <= 1e-4


def test_logistic_matches_scipy_optimum(rng):
    F = with_intercept(rng.normal(size=(300, 4)) * [1, 10, 0.1, 3])
    y = labels_for(F, rng, noise=4.0)
    m = fit_logistic(F, y)
    assert m.converged and not m.separated

    def nll(w):
        return -logistic_log_likelihood(F, y, w)

    def grad(w):
        return -logistic_gradient(F, y, w)

    ref = minimize(nll, np.zeros(5), jac=grad, method="BFGS", options={"gtol": 1e-12, "maxiter": 10000})
    assert nll(m.weights) <= ref.fun + 1e-9
    assert np.allclose(m.weights, ref.x, rtol=1e-4, atol=1e-5)
    ll = m.extra["log_likelihood"]
    assert all(b >= a for a, b in zip(ll, ll[1:]))


def test_logistic_predictions(rng):
    F = with_intercept(rng.normal(size=(100, 2)))
    y = labels_for(F, rng)
    m = fit_logistic(F, y)
    p = predict(m, F)
    assert np.all((p.scores > 0) & (p.scores < 1))
    assert np.array_equal(p.classes, (p.scores > 0.5).astype(float))


def test_logistic_flags_separation():
    x = np.array([-3.0, -2.0, -1.0, 1.0, 2.0, 3.0])
    F = with_intercept(x[:, None])
    y = (x > 0).astype(float)
    m = fit_logistic(F, y)
    assert m.separated
    assert np.array_equal(predict(m, F).classes, y)


def test_logistic_iteration_cap_raises(rng):
    F = with_intercept(rng.normal(size=(200, 3)))
    y = labels_for(F, rng, noise=2.0)
    with pytest.raises(ConvergenceError) as e:
        fit_logistic(F, y, max_iter=1)
    assert e.value.last_weights.shape == (4,)
