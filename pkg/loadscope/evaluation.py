"""Scoring of point and Gaussian forecasts, improvement tables, and
multi-task model rankings
"""

from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Union

import numpy as np
import pandas as pd
from scipy.stats import chi2, norm, rankdata

from loadscope.data import PointForecastSet, ProbForecastSet
from loadscope.exc import (
    ConfigurationError, KeyMismatch, Misaligned, NonPositiveSigma, TooFewModels,
    TooFewTasks, ZeroTruth,)
from loadscope.util import warn
from loadscope.util.io import save_table
from loadscope.util.log import logger
from loadscope.util.typing import Pathy

__all__ = (
    'ImprovementTable',
    'PointScores',
    'RankingResult',
    'ScoreTable',
    'crps_gaussian',
    'crps_mean',
    'evaluate_point',
    'friedman_nemenyi',
    'improvement_table',
    'score_forecasts',
    'summarize_scores',
)

SCORE_COLUMNS = ['region', 'horizon', 'model', 'rmse_mw', 'mape_pct',
                 'crps_mw']
METRICS = ['rmse_mw', 'mape_pct', 'crps_mw']

# (label, first horizon, last horizon)
WEEKS = (
    ('1-7', 1, 7),
    ('8-14', 8, 14),
    ('15-21', 15, 21),
    ('22-30', 22, 30),
)

INV_SQRT_PI = 1 / np.sqrt(np.pi)

# upper quantiles of the studentized range divided by sqrt(2), by number of
# models k = 2..10
NEMENYI_Q = {
    0.05: (1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164),
    0.10: (1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920),
}

Table = Union[pd.DataFrame, np.ndarray, PointForecastSet]


class PointScores(NamedTuple):
    rmse: float
    mape: float


def _values(table: Table) -> pd.DataFrame:
    if isinstance(table, PointForecastSet):
        table = table.values
    if isinstance(table, pd.DataFrame):
        return table
    arr = np.asarray(table, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    return pd.DataFrame(arr)


def _check_aligned(truth: pd.DataFrame, forecast: pd.DataFrame):
    if truth.shape != forecast.shape:
        raise Misaligned(
            f'Truth has shape {truth.shape}, forecasts {forecast.shape}')
    if not truth.index.equals(forecast.index):
        raise Misaligned('Truth and forecasts cover different days')


def evaluate_point(truth: Table, forecast: Table) -> PointScores:
    """RMSE and MAPE of day x 24 point forecasts

    RMSE is computed over the 24 hours of each day and then averaged over
    days. MAPE is the mean absolute percentage error over all day-hours.

    Raises:
        Misaligned: truth and forecasts differ in shape or days
        ZeroTruth: truth is zero at some day-hour
    """
    truth, forecast = _values(truth), _values(forecast)
    _check_aligned(truth, forecast)
    y = truth.to_numpy(dtype=float)
    f = forecast.to_numpy(dtype=float)
    zero = y == 0
    if zero.any():
        i, j = np.argwhere(zero)[0]
        raise ZeroTruth(truth.index[i], truth.columns[j])
    err = f - y
    rmse = float(np.mean(np.sqrt(np.mean(err ** 2, axis=1))))
    mape = float(np.mean(np.abs(err / y)) * 100)
    return PointScores(rmse, mape)


def crps_gaussian(mu, sigma, y):
    """Continuous ranked probability score of a Gaussian forecast

    Closed form ``sigma * (z (2 Phi(z) - 1) + 2 phi(z) - 1/sqrt(pi))`` with
    ``z = (y - mu) / sigma``, elementwise with broadcasting.

    Raises:
        NonPositiveSigma: some sigma is not positive
    """
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    y = np.asarray(y, dtype=float)
    if not (sigma > 0).all():
        raise NonPositiveSigma('sigma must be positive')
    z = (y - mu) / sigma
    score = sigma * (z * (2 * norm.cdf(z) - 1) + 2 * norm.pdf(z)
                     - INV_SQRT_PI)
    if score.ndim == 0:
        return float(score)
    return score


def crps_mean(forecast: ProbForecastSet, truth: Table) -> float:
    """CRPS in MW averaged over all day-hours"""
    truth = _values(truth)
    _check_aligned(truth, forecast.mu)
    return float(np.mean(crps_gaussian(
        forecast.mu.to_numpy(), forecast.sigma.to_numpy(),
        truth.to_numpy(dtype=float))))


def score_forecasts(region: str, horizon: int, model: str, truth: Table,
                    forecast: Union[Table, ProbForecastSet]) -> Dict:
    """One score row of a model on one (region, horizon) task

    A point forecast is a degenerate distribution, so its CRPS reduces to
    the mean absolute error.
    """
    truth = _values(truth)
    if isinstance(forecast, ProbForecastSet):
        point = forecast.mu
        crps = crps_mean(forecast, truth)
    else:
        point = _values(forecast)
        _check_aligned(truth, point)
        crps = float(np.mean(np.abs(point.to_numpy(dtype=float)
                                    - truth.to_numpy(dtype=float))))
    scores = evaluate_point(truth, point)
    return {
        'region': region,
        'horizon': int(horizon),
        'model': model,
        'rmse_mw': scores.rmse,
        'mape_pct': scores.mape,
        'crps_mw': crps,
    }


class ScoreTable:
    """Scores per (region, horizon, model)

    Args:
        frame: table with columns ``region, horizon, model, rmse_mw,
            mape_pct, crps_mw``
    """

    def __init__(self, frame: pd.DataFrame):
        missing = set(SCORE_COLUMNS) - set(frame.columns)
        if missing:
            raise KeyMismatch(f'Score table lacks columns {sorted(missing)}')
        if frame.duplicated(['region', 'horizon', 'model']).any():
            raise KeyMismatch('Score table has duplicate keys')
        self.frame = frame.loc[:, SCORE_COLUMNS].reset_index(drop=True)

    @classmethod
    def from_rows(cls, rows: Iterable[Mapping]) -> 'ScoreTable':
        return cls(pd.DataFrame(list(rows), columns=SCORE_COLUMNS))

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def models(self) -> List[str]:
        """Model names in order of first appearance"""
        return list(pd.unique(self.frame['model']))

    def model(self, name: str) -> pd.DataFrame:
        """Scores of one model indexed by (region, horizon)"""
        rows = self.frame.loc[self.frame['model'] == name]
        if rows.empty:
            raise KeyMismatch(f'No scores for model {name!r}')
        return rows.drop(columns='model').set_index(['region', 'horizon'])

    def tasks(self, metric: str = 'rmse_mw') -> pd.DataFrame:
        """Task x model table of one metric, tasks being (region, horizon)
        """
        wide = self.frame.pivot(index=['region', 'horizon'],
                                columns='model', values=metric)
        return wide.loc[:, self.models]

    def save(self, output_dir: Pathy, name: str = 'scores'):
        ordered = self.frame.sort_values(['region', 'horizon', 'model'],
                                         kind='mergesort')
        return save_table(ordered, output_dir, name)


def summarize_scores(table: ScoreTable) -> pd.DataFrame:
    """Scores averaged over regions and horizons, one row per model"""
    summary = table.frame.groupby('model', sort=False)[METRICS].mean()
    return summary.reset_index()


class ImprovementTable(NamedTuple):
    """Percentage improvements of a variant over a base model

    Attributes:
        cells: one row per (region, horizon) with the two scores and the
            improvement in percent
        weekly: one row per (region, week of horizon) with the mean of the
            per-horizon improvements of that week
    """
    cells: pd.DataFrame
    weekly: pd.DataFrame


def week_of(horizon: int) -> Optional[str]:
    for label, first, last in WEEKS:
        if first <= horizon <= last:
            return label
    return None


def improvement_table(base: pd.DataFrame, variant: pd.DataFrame,
                      metric: str = 'crps_mw') -> ImprovementTable:
    """Improvement ``100 * (base - variant) / base`` per (region, horizon)

    Args:
        base: scores of the base model indexed by (region, horizon), as
            returned by :py:meth:`ScoreTable.model`
        variant: scores of the compared model, same keys
        metric: score column to compare

    Raises:
        KeyMismatch: the two tables have different (region, horizon) keys
    """
    if set(base.index) != set(variant.index):
        raise KeyMismatch('Base and variant cover different tasks')
    b = base[metric]
    v = variant[metric].reindex(b.index)
    with np.errstate(divide='ignore', invalid='ignore'):
        pct = np.where(b.to_numpy() == v.to_numpy(), 0.0,
                       100 * (b.to_numpy() - v.to_numpy()) / b.to_numpy())
    cells = pd.DataFrame({'base': b.to_numpy(), 'variant': v.to_numpy(),
                          'improvement_pct': pct}, index=b.index)
    cells = cells.sort_index().reset_index()
    cells['week'] = cells['horizon'].map(week_of)
    weekly = (cells.dropna(subset=['week'])
              .groupby(['region', 'week'], sort=False)['improvement_pct']
              .mean()
              .reset_index())
    order = {label: i for i, (label, _, _) in enumerate(WEEKS)}
    weekly = (weekly.assign(_order=weekly['week'].map(order))
              .sort_values(['region', '_order'], kind='mergesort')
              .drop(columns='_order')
              .reset_index(drop=True))
    return ImprovementTable(cells.drop(columns='week'), weekly)


class RankingResult(NamedTuple):
    """Friedman test and Nemenyi critical difference of a model ranking

    Attributes:
        mean_ranks: mean rank per model, 1 being best
        statistic: Friedman chi-square statistic
        p_value: p-value with k - 1 degrees of freedom
        cd: critical difference of mean ranks at alpha, NaN when the number
            of models is outside the embedded table
        n_tasks: number of tasks ranked
        alpha: significance level of the critical difference
    """
    mean_ranks: pd.Series
    statistic: float
    p_value: float
    cd: float
    n_tasks: int
    alpha: float

    def to_frame(self) -> pd.DataFrame:
        frame = self.mean_ranks.rename('mean_rank').rename_axis(
            'model').reset_index()
        frame['chi2_f'] = self.statistic
        frame['p_value'] = self.p_value
        frame['cd'] = self.cd
        frame['n_tasks'] = self.n_tasks
        frame['alpha'] = self.alpha
        return frame


def nemenyi_cd(k: int, n: int, alpha: float = 0.05) -> float:
    """Critical difference ``q_alpha * sqrt(k (k + 1) / (6 n))``"""
    if alpha not in NEMENYI_Q:
        raise ConfigurationError(
            f'No Nemenyi quantiles for alpha={alpha}, use one of '
            f'{sorted(NEMENYI_Q)}')
    q = NEMENYI_Q[alpha]
    if not 2 <= k <= len(q) + 1:
        warn(f'No Nemenyi quantile for {k} models, critical difference '
             f'not computed')
        return float('nan')
    return float(q[k - 2] * np.sqrt(k * (k + 1) / (6 * n)))


def friedman_nemenyi(scores: pd.DataFrame, alpha: float = 0.05
                     ) -> RankingResult:
    """Rank models across tasks with the Friedman and Nemenyi tests

    Lower scores are better. Within each task, tied models receive their
    average rank. Tasks with a missing score are dropped.

    Args:
        scores: task x model table of one metric
        alpha: significance level, 0.05 or 0.10

    Raises:
        TooFewModels: fewer than two models
        TooFewTasks: fewer than two complete tasks
    """
    k = scores.shape[1]
    if k < 2:
        raise TooFewModels(f'Ranking needs at least 2 models, got {k}')
    complete = scores.dropna()
    if len(complete) < len(scores):
        logger.info(f'Dropped {len(scores) - len(complete)} tasks with '
                    f'missing scores from the ranking')
    n = len(complete)
    if n < 2:
        raise TooFewTasks(f'Ranking needs at least 2 tasks, got {n}')

    ranks = np.apply_along_axis(rankdata, 1, complete.to_numpy(dtype=float))
    mean_ranks = ranks.mean(axis=0)
    statistic = 12 * n / (k * (k + 1)) * (
        np.sum(mean_ranks ** 2) - k * (k + 1) ** 2 / 4)
    statistic = float(max(statistic, 0.0))
    p_value = float(chi2.sf(statistic, k - 1))
    cd = nemenyi_cd(k, n, alpha)
    logger.debug(f'Friedman chi2={statistic:.4g}, p={p_value:.4g}, '
                 f'CD={cd:.4g} over {n} tasks')
    return RankingResult(pd.Series(mean_ranks, index=complete.columns),
                         statistic, p_value, cd, n, alpha)
