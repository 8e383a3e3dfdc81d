import numpy as np
import pandas as pd
import pytest

from loadscope.causality import (
    causal_frame, causal_profile, daily_demand, dml_effect, granger_test,
    pooled_effect,)
from loadscope.data import DailyFeatureSeries
from loadscope.exc import (
    ConstantSeries, DegenerateTreatment, Misaligned, TooFew, TooShort,)
from loadscope.gbdt.tree import HyperParams

FAST = HyperParams(n_trees=60, learning_rate=0.1, max_depth=3,
                   min_samples_leaf=10)


def _days(n, start='2021-01-01'):
    return pd.date_range(start, periods=n, freq='D')


def _lagged_pair(n=500, coef=0.8, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=n)
    y = np.empty(n)
    y[0] = rng.normal()
    y[1:] = coef * x[:-1] + 0.5 * rng.normal(size=n - 1)
    days = _days(n)
    return pd.Series(x, index=days), pd.Series(y, index=days)


def test_granger_finds_planted_lag():
    x, y = _lagged_pair()
    result = granger_test(x, y, max_lag=5)
    assert not result.differenced
    assert result.x_to_y.p_value < 1e-6
    assert result.relation in ('x_to_y', 'both')
    assert result.x_to_y.n == 500 - 5


def test_granger_independent_series():
    rng = np.random.default_rng(1)
    x = pd.Series(rng.normal(size=400), index=_days(400))
    y = pd.Series(rng.normal(size=400), index=_days(400))
    result = granger_test(x, y, max_lag=4)
    assert result.x_to_y.p_value > 1e-3
    assert 1 <= result.x_to_y.lag <= 4


def test_granger_accepts_daily_feature_series():
    x, y = _lagged_pair(300, seed=2)
    a = granger_test(DailyFeatureSeries('x', x), y, max_lag=3)
    b = granger_test(x, y, max_lag=3)
    assert a == b


def test_granger_differences_random_walks():
    rng = np.random.default_rng(3)
    x = pd.Series(np.cumsum(rng.normal(size=500)), index=_days(500))
    y = pd.Series(np.cumsum(rng.normal(size=500)), index=_days(500))
    assert granger_test(x, y, max_lag=3).differenced


def test_granger_uses_common_days():
    x, y = _lagged_pair(300, seed=4)
    shifted = x.copy()
    shifted.index = shifted.index + pd.Timedelta(days=290)
    with pytest.raises(TooShort):
        granger_test(shifted, y, max_lag=2)


def test_granger_perfect_collinearity():
    x, _ = _lagged_pair(200, seed=5)
    result = granger_test(x, 2 * x + 1, max_lag=3)
    assert result.relation == 'both'
    assert result.x_to_y.p_value == 0.0


def test_granger_errors():
    x, y = _lagged_pair(69)
    with pytest.raises(TooShort):
        granger_test(x, y, max_lag=7)
    with pytest.raises(TooShort):
        granger_test(x, y, max_lag=0)
    with pytest.raises(ConstantSeries):
        granger_test(x, pd.Series(3.0, index=x.index), max_lag=2)


def test_granger_rows():
    x, y = _lagged_pair(200, seed=6)
    rows = granger_test(x, y, max_lag=3).rows('driver', 'north')
    assert [r['direction'] for r in rows] == ['x_to_y', 'y_to_x']
    assert all(r['feature'] == 'driver' and r['region'] == 'north'
               for r in rows)


def _ar1(rng, n, phi=0.5):
    e = rng.normal(size=n)
    out = np.empty(n)
    out[0] = e[0] / np.sqrt(1 - phi ** 2)
    for t in range(1, n):
        out[t] = phi * out[t - 1] + e[t]
    return out


@pytest.mark.slow
def test_granger_size_on_independent_ar1_pairs():
    rng = np.random.default_rng(100)
    days = _days(500)
    rejections = 0
    for _ in range(200):
        x = pd.Series(_ar1(rng, 500), index=days)
        y = pd.Series(_ar1(rng, 500), index=days)
        rejections += granger_test(x, y, max_lag=5).x_to_y.p_value < 0.05
    assert 0.02 <= rejections / 200 <= 0.09


@pytest.mark.slow
def test_granger_power_on_planted_lag():
    rng = np.random.default_rng(101)
    days = _days(500)
    detected = 0
    for _ in range(200):
        x = _ar1(rng, 500)
        y = np.empty(500)
        y[0] = rng.normal()
        y[1:] = 0.8 * x[:-1] + rng.normal(size=499)
        result = granger_test(pd.Series(x, index=days),
                              pd.Series(y, index=days), max_lag=5)
        detected += result.x_to_y.p_value < 1e-3
    assert detected >= 195


def _partially_linear(n=600, delta=2.0, seed=7):
    rng = np.random.default_rng(seed)
    X = pd.DataFrame(rng.normal(size=(n, 2)), columns=['a', 'b'])
    T = np.sin(X['a']).to_numpy() + rng.normal(size=n)
    Y = delta * T + (X['b'] ** 2).to_numpy() + 0.5 * rng.normal(size=n)
    return T, Y, X


@pytest.mark.slow
def test_dml_recovers_effect():
    T, Y, X = _partially_linear()
    result = dml_effect(T, Y, X, params=FAST, seed=1)
    assert result.delta == pytest.approx(2.0, abs=0.2)
    assert result.se > 0
    assert result.ci_lo < result.delta < result.ci_hi
    assert result.ci_hi - result.ci_lo == pytest.approx(2 * 1.959964
                                                        * result.se)
    assert (result.folds, result.n) == (5, 600)


@pytest.mark.slow
def test_dml_recovers_effect_on_large_sample():
    T, Y, X = _partially_linear(n=2000, seed=12)
    result = dml_effect(T, Y, X, folds=5, params=FAST, seed=3)
    assert 1.9 <= result.delta <= 2.1


@pytest.mark.slow
def test_dml_null_effect_coverage():
    covered = 0
    for rep in range(100):
        rng = np.random.default_rng(200 + rep)
        X = pd.DataFrame(rng.normal(size=(400, 2)), columns=['a', 'b'])
        T = np.sin(X['a']).to_numpy() + rng.normal(size=400)
        # a confounds T and Y; T itself has no effect
        Y = (0.5 * np.sin(X['a']) + X['b'] ** 2).to_numpy() \
            + 0.5 * rng.normal(size=400)
        result = dml_effect(T, Y, X, folds=5, params=FAST, seed=rep)
        covered += result.ci_lo <= 0.0 <= result.ci_hi
    assert covered >= 90


@pytest.mark.slow
def test_dml_is_deterministic():
    T, Y, X = _partially_linear(200, seed=8)
    a = dml_effect(T, Y, X, folds=3, params=FAST, seed=4)
    b = dml_effect(T, Y, X, folds=3, params=FAST, seed=4)
    assert a == b


@pytest.mark.slow
def test_dml_parallel_folds_match_serial():
    T, Y, X = _partially_linear(200, seed=9)
    a = dml_effect(T, Y, X, folds=3, params=FAST, seed=4, jobs=1)
    b = dml_effect(T, Y, X, folds=3, params=FAST, seed=4, jobs=2)
    assert a == b


def test_dml_degenerate_treatment():
    rng = np.random.default_rng(10)
    X = pd.DataFrame({'a': rng.integers(0, 2, size=100).astype(float),
                      'b': rng.normal(size=100)})
    T = 3 * X['a'].to_numpy()
    Y = T + rng.normal(size=100)
    with pytest.raises(DegenerateTreatment):
        dml_effect(T, Y, X, folds=2, params=FAST)


def test_dml_errors():
    T, Y, X = _partially_linear(20)
    with pytest.raises(Misaligned):
        dml_effect(T[1:], Y, X)
    with pytest.raises(TooFew):
        dml_effect(T, Y, X, folds=1)
    with pytest.raises(TooFew):
        dml_effect(T[:9], Y[:9], X.iloc[:9], folds=5)


def _profile_inputs(n=160, seed=11):
    rng = np.random.default_rng(seed)
    days = _days(n)
    features = pd.DataFrame({'driver': rng.normal(size=n),
                             'other': rng.normal(size=n)}, index=days)
    demand = pd.Series(1000 + 30 * rng.normal(size=n), index=days)
    demand.iloc[1:] += 50 * features['driver'].to_numpy()[:-1]
    return features, demand


@pytest.mark.slow
def test_causal_profile_rows():
    features, demand = _profile_inputs()
    small = HyperParams(n_trees=20, max_depth=2, min_samples_leaf=5)
    profile = causal_profile(features, demand, 'driver', horizons=(1, 2),
                             folds=2, params=small, seed=0, region='north')
    assert list(profile.columns) == ['feature', 'region', 'horizon', 'delta',
                                     'se', 'ci_lo', 'ci_hi', 'n']
    assert list(profile['horizon']) == [1, 2]
    assert list(profile['n']) == [159, 158]
    assert (profile['region'] == 'north').all()
    assert profile['delta'].iloc[0] > 25


def test_causal_profile_unknown_feature():
    features, demand = _profile_inputs()
    with pytest.raises(Misaligned):
        causal_profile(features, demand, 'missing', horizons=(1,))


def test_pooled_effect():
    profile = pd.DataFrame({
        'feature': 'driver', 'region': 'north', 'horizon': [1, 2],
        'delta': [1.0, 3.0], 'se': [3.0, 4.0], 'ci_lo': 0.0, 'ci_hi': 0.0,
        'n': [100, 99],
    })
    pooled = pooled_effect(profile)
    assert pooled['horizon'] == 'all'
    assert pooled['delta'] == 2.0
    assert pooled['se'] == pytest.approx(np.sqrt(12.5))
    assert pooled['ci_lo'] == pytest.approx(2.0 - 1.959964 * np.sqrt(12.5))
    assert pooled['n'] == 99


def test_daily_demand_and_frame(small_panel):
    demand = daily_demand(small_panel, 'north')
    profiles = small_panel.demand['north'].profiles()
    assert demand.loc['2021-06-01'] \
        == pytest.approx(profiles.loc['2021-06-01'].mean())
    centroid = DailyFeatureSeries('social_01_driver', demand / 1000)
    frame = causal_frame(small_panel, [centroid])
    assert list(frame.columns) == ['social_01_driver', 'econ_gdp',
                                   'econ_inflation', 'econ_unemployment']
    assert not frame.isna().any().any()
