import numpy as np
import pandas as pd
import pytest
from scipy.integrate import quad
from scipy.stats import norm

from loadscope.data import ProbForecastSet
from loadscope.evaluation import (
    ScoreTable, crps_gaussian, crps_mean, evaluate_point, friedman_nemenyi,
    improvement_table, nemenyi_cd, score_forecasts, summarize_scores,
    week_of,)
from loadscope.exc import (
    ConfigurationError, KeyMismatch, Misaligned, NonPositiveSigma,
    TooFewModels, TooFewTasks, ZeroTruth,)


def _days(n):
    return pd.date_range('2022-03-01', periods=n, freq='D')


def _frame(values, n=None):
    values = np.asarray(values, dtype=float)
    if values.ndim == 0:
        values = np.full((n, 24), float(values))
    return pd.DataFrame(values, index=_days(len(values)),
                        columns=list(range(24)))


def _crps_by_integration(mu, sigma, y):
    def integrand(x):
        return (norm.cdf(x, mu, sigma) - float(x >= y)) ** 2

    lo, hi = mu - 12 * sigma, mu + 12 * sigma
    left, _ = quad(integrand, min(lo, y), y, limit=200)
    right, _ = quad(integrand, y, max(hi, y), limit=200)
    return left + right


def test_perfect_forecast():
    truth = _frame(np.random.default_rng(0).uniform(50, 150, (3, 24)))
    scores = evaluate_point(truth, truth)
    assert scores.rmse == 0.0
    assert scores.mape == 0.0


def test_constant_offset():
    scores = evaluate_point(_frame(100.0, 1), _frame(110.0, 1))
    assert scores.rmse == pytest.approx(10.0)
    assert scores.mape == pytest.approx(10.0)


def test_rmse_averages_days():
    truth = _frame(100.0, 2)
    forecast = truth + np.array([[10.0] * 24, [20.0] * 24])
    assert evaluate_point(truth, forecast).rmse == pytest.approx(15.0)


def test_scores_invariant_to_day_order_and_scale():
    rng = np.random.default_rng(1)
    truth = _frame(rng.uniform(80, 120, (5, 24)))
    forecast = truth + rng.normal(size=(5, 24))
    base = evaluate_point(truth, forecast)
    order = [4, 2, 0, 1, 3]
    shuffled = evaluate_point(truth.iloc[order], forecast.iloc[order])
    assert shuffled.rmse == pytest.approx(base.rmse)
    scaled = evaluate_point(truth * 3, forecast * 3)
    assert scaled.rmse == pytest.approx(3 * base.rmse)
    assert scaled.mape == pytest.approx(base.mape)


def test_zero_truth():
    truth = _frame(100.0, 2)
    truth.iloc[1, 5] = 0.0
    with pytest.raises(ZeroTruth) as e:
        evaluate_point(truth, _frame(100.0, 2))
    assert e.value.hour == 5


def test_misaligned_days():
    truth = _frame(100.0, 2)
    forecast = truth.copy()
    forecast.index = forecast.index + pd.Timedelta(days=1)
    with pytest.raises(Misaligned):
        evaluate_point(truth, forecast)


@pytest.mark.parametrize('y,expected', [(0.0, 0.23370), (1.0, 0.60244)])
def test_crps_standard_normal(y, expected):
    assert crps_gaussian(0.0, 1.0, y) == pytest.approx(expected, abs=1e-4)
    assert _crps_by_integration(0.0, 1.0, y) \
        == pytest.approx(expected, abs=1e-4)


def test_crps_matches_integration():
    rng = np.random.default_rng(2)
    for _ in range(100):
        mu = rng.normal(0, 10)
        sigma = rng.uniform(0.5, 5)
        y = mu + rng.normal(0, 2 * sigma)
        assert crps_gaussian(mu, sigma, y) \
            == pytest.approx(_crps_by_integration(mu, sigma, y), abs=1e-5)


def test_crps_point_mass():
    assert crps_gaussian(5.0, 1e-9, 5.0) == pytest.approx(0.0, abs=1e-8)
    with pytest.raises(NonPositiveSigma):
        crps_gaussian([0.0, 1.0], [1.0, 0.0], [0.0, 0.0])


def test_crps_mean_averages_day_hours():
    mu = np.zeros((2, 24))
    sigma = np.ones((2, 24))
    forecast = ProbForecastSet.from_arrays(mu, sigma, _days(2))
    truth = _frame(np.zeros((2, 24)))
    assert crps_mean(forecast, truth) == pytest.approx(0.23370, abs=1e-4)


def test_point_forecast_crps_is_mae():
    truth = _frame(100.0, 2)
    row = score_forecasts('north', 3, 'PF', truth, truth + 4.0)
    assert row['crps_mw'] == pytest.approx(4.0)
    assert row['rmse_mw'] == pytest.approx(4.0)
    assert (row['region'], row['horizon'], row['model']) == ('north', 3, 'PF')


def _score_table():
    rows = []
    for region in ('north', 'south'):
        for horizon in (1, 2, 8, 9):
            for model, base in (('GBM', 100.0), ('GBM-S', 90.0)):
                rows.append({
                    'region': region, 'horizon': horizon, 'model': model,
                    'rmse_mw': base + horizon, 'mape_pct': 1.0,
                    'crps_mw': base + horizon,
                })
    return ScoreTable.from_rows(rows)


def test_score_table_views():
    table = _score_table()
    assert table.models == ['GBM', 'GBM-S']
    tasks = table.tasks('crps_mw')
    assert tasks.shape == (8, 2)
    assert tasks.loc[('south', 8), 'GBM-S'] == 98.0
    summary = summarize_scores(table)
    assert list(summary['model']) == ['GBM', 'GBM-S']
    assert summary.loc[0, 'crps_mw'] == pytest.approx(105.0)


def test_score_table_rejects_duplicates():
    rows = _score_table().frame.to_dict('records')
    with pytest.raises(KeyMismatch):
        ScoreTable.from_rows(rows + rows[:1])
    with pytest.raises(KeyMismatch):
        _score_table().model('LASSO')


def test_score_table_save_is_sorted(tempdir):
    path = _score_table().save(tempdir)
    saved = pd.read_csv(path)
    assert list(saved.columns) == ['region', 'horizon', 'model', 'rmse_mw',
                                   'mape_pct', 'crps_mw']
    assert saved.iloc[0].tolist()[:3] == ['north', 1, 'GBM']


def test_improvement_of_identical_models():
    table = _score_table()
    result = improvement_table(table.model('GBM'), table.model('GBM'))
    assert (result.cells['improvement_pct'] == 0).all()


def test_improvement_cells_and_weeks():
    table = _score_table()
    result = improvement_table(table.model('GBM'), table.model('GBM-S'))
    cells = result.cells.set_index(['region', 'horizon'])
    assert cells.loc[('north', 1), 'improvement_pct'] \
        == pytest.approx(100 * 10 / 101)
    weekly = result.weekly
    assert list(weekly['week']) == ['1-7', '8-14', '1-7', '8-14']
    expected = np.mean([100 * 10 / 108, 100 * 10 / 109])
    row = weekly[(weekly['region'] == 'south') & (weekly['week'] == '8-14')]
    assert row['improvement_pct'].iloc[0] == pytest.approx(expected)


def test_improvement_simple_percentage():
    index = pd.MultiIndex.from_tuples([('north', 1)],
                                      names=['region', 'horizon'])
    base = pd.DataFrame({'crps_mw': [100.0]}, index=index)
    variant = pd.DataFrame({'crps_mw': [94.0]}, index=index)
    result = improvement_table(base, variant)
    assert result.cells['improvement_pct'].iloc[0] == pytest.approx(6.0)


def test_improvement_needs_same_tasks():
    table = _score_table()
    with pytest.raises(KeyMismatch):
        improvement_table(table.model('GBM'), table.model('GBM').iloc[1:])


def test_week_of():
    assert week_of(1) == '1-7'
    assert week_of(14) == '8-14'
    assert week_of(22) == '22-30'
    assert week_of(31) is None


def test_friedman_strict_order():
    scores = pd.DataFrame({'A': [1.0, 2.0, 1.5, 3.0],
                           'B': [2.0, 3.0, 2.5, 4.0],
                           'C': [3.0, 4.0, 3.5, 5.0]})
    result = friedman_nemenyi(scores)
    assert list(result.mean_ranks) == [1.0, 2.0, 3.0]
    assert result.statistic == pytest.approx(8.0)
    assert result.p_value == pytest.approx(0.0183, abs=1e-4)
    assert result.n_tasks == 4


def test_friedman_all_ties():
    scores = pd.DataFrame(np.ones((5, 3)), columns=list('ABC'))
    result = friedman_nemenyi(scores)
    assert result.statistic == 0.0
    assert result.p_value == pytest.approx(1.0)


def test_friedman_invariant_to_monotone_transform():
    rng = np.random.default_rng(3)
    scores = pd.DataFrame(rng.uniform(1, 10, size=(12, 4)),
                          columns=list('ABCD'))
    a = friedman_nemenyi(scores)
    b = friedman_nemenyi(np.log(scores) * 7 + 2)
    assert a.statistic == pytest.approx(b.statistic)
    assert list(a.mean_ranks) == list(b.mean_ranks)


def test_friedman_drops_incomplete_tasks():
    scores = pd.DataFrame({'A': [1.0, 1.0, np.nan], 'B': [2.0, 2.0, 1.0]})
    assert friedman_nemenyi(scores).n_tasks == 2
    with pytest.raises(TooFewTasks):
        friedman_nemenyi(scores.iloc[1:])
    with pytest.raises(TooFewModels):
        friedman_nemenyi(scores[['A']])


def test_critical_difference():
    assert nemenyi_cd(8, 180) == pytest.approx(0.783, abs=1e-3)
    assert np.isnan(nemenyi_cd(11, 50))
    with pytest.raises(ConfigurationError):
        nemenyi_cd(3, 10, alpha=0.01)


def test_ranking_frame():
    scores = pd.DataFrame({'A': [1.0, 2.0], 'B': [2.0, 3.0]})
    frame = friedman_nemenyi(scores).to_frame()
    assert list(frame.columns) == ['model', 'mean_rank', 'chi2_f', 'p_value',
                                   'cd', 'n_tasks', 'alpha']
    assert list(frame['model']) == ['A', 'B']
