import numpy as np
import pandas as pd
import pytest
from scipy.stats import norm, spearmanr

from loadscope.diagnostics import reliability_curve
from loadscope.gbdt.ensemble import fit_ensemble
from loadscope.gbdt.gaussian import fit_gaussian, predict_gaussian
from loadscope.gbdt.tree import HyperParams
from loadscope.util.testing import assert_array_equal

PARAMS = HyperParams(n_trees=150, learning_rate=0.1, max_depth=3,
                     min_samples_leaf=20, early_stopping_rounds=10)


def _noisy(seed, n, scale):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-3, 3, size=n)
    y = 10 * np.sin(x) + scale(x) * rng.normal(size=n)
    return pd.DataFrame({'x': x}), y


def test_mean_matches_plain_ensemble(regression_data):
    params = HyperParams(n_trees=20)
    g = fit_gaussian(*regression_data, params=params, seed=4, folds=3)
    e = fit_ensemble(*regression_data, params=params, seed=4)
    mu, _ = predict_gaussian(g, regression_data.X)
    assert_array_equal(mu, e.predict(regression_data.X))


def test_homoscedastic_noise_level():
    X, y = _noisy(0, 2500, lambda x: 5.0)
    Xv, yv = _noisy(1, 500, lambda x: 5.0)
    g = fit_gaussian(X, y, Xv, yv, params=PARAMS, seed=0, folds=3)
    _, sigma = g.predict(Xv)
    assert 4.0 <= np.median(sigma) <= 6.0


def test_noise_free_target_hits_floor():
    x = np.concatenate([np.linspace(-2, -1, 100), np.linspace(1, 2, 100)])
    X = pd.DataFrame({'x': x})
    y = 10.0 * (x > 0)
    params = HyperParams(n_trees=3, learning_rate=1.0, max_depth=1,
                         min_samples_leaf=1, l2_leaf_reg=0.0)
    g = fit_gaussian(X, y, params=params, folds=4)
    _, sigma = g.predict(X)
    assert g.variance_floor == pytest.approx((1e-3 * 5.0) ** 2)
    assert sigma == pytest.approx(np.full(200, np.sqrt(g.variance_floor)),
                                  rel=1e-6)


@pytest.mark.slow
def test_heteroscedastic_sigma_tracks_noise():
    X, y = _noisy(2, 4000, lambda x: 1 + np.abs(x))
    Xv, yv = _noisy(3, 800, lambda x: 1 + np.abs(x))
    g = fit_gaussian(X, y, Xv, yv, params=PARAMS, seed=1, folds=3)
    _, sigma = g.predict(Xv)
    rho, _ = spearmanr(sigma, np.abs(Xv['x']))
    assert rho > 0.8


@pytest.mark.slow
def test_heteroscedastic_intervals_are_calibrated():
    X, y = _noisy(4, 5000, lambda x: 1 + np.abs(x))
    Xv, yv = _noisy(5, 1000, lambda x: 1 + np.abs(x))
    Xt, yt = _noisy(6, 5000, lambda x: 1 + np.abs(x))
    g = fit_gaussian(X, y, Xv, yv, params=PARAMS, seed=2, folds=5)
    mu, sigma = g.predict(Xt)
    z = (yt - mu) / sigma
    coverage = np.mean(np.abs(z) <= norm.ppf(0.95))
    assert 0.87 <= coverage <= 0.93
    curve = reliability_curve(norm.cdf(z))
    assert np.abs(curve['empirical'] - curve['nominal']).max() < 0.05


def test_sigma_is_positive(regression_data):
    g = fit_gaussian(*regression_data, params=HyperParams(n_trees=10),
                     folds=2)
    _, sigma = g.predict(regression_data.X)
    assert (sigma >= np.sqrt(g.variance_floor) * (1 - 1e-12)).all()
