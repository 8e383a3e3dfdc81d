"""Granger causality and double machine learning between daily textual
factors and regional demand
"""

from typing import Dict, List, NamedTuple, Optional, Sequence, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.stats import f as f_dist
from sklearn.model_selection import KFold
from statsmodels.regression.linear_model import OLS
from statsmodels.tools.tools import add_constant
from statsmodels.tsa.stattools import adfuller

from loadscope.data import DailyFeatureSeries
from loadscope.exc import (
    ConstantSeries, DegenerateTreatment, Misaligned, TooFew, TooShort,)
from loadscope.gbdt.ensemble import BoostedTreeRegressor
from loadscope.gbdt.tree import HyperParams
from loadscope.ingestion import AlignedPanel
from loadscope.util.log import logger
from loadscope.util.seeds import task_seed

__all__ = (
    'DMLResult',
    'DirectionTest',
    'GrangerResult',
    'causal_frame',
    'causal_profile',
    'daily_demand',
    'dml_effect',
    'granger_test',
    'pooled_effect',
)

DEFAULT_MAX_LAG = 7
MIN_SPAN_PER_LAG = 10
ADF_ALPHA = 0.05
DML_FOLDS = 5
Z_95 = 1.959964
# treatment residual variance below this share of Var(T) is degenerate
DEGENERATE_SHARE = 0.01
COLLINEAR_TOL = 1e-12

RELATIONS = {
    (True, True): 'both',
    (True, False): 'x_to_y',
    (False, True): 'y_to_x',
    (False, False): 'none',
}

DML_PARAMS = HyperParams(n_trees=200, learning_rate=0.1, max_depth=3,
                         min_samples_leaf=10)

Series = Union[pd.Series, DailyFeatureSeries]


class DirectionTest(NamedTuple):
    """F-test that lags of a cause improve the autoregression of an effect
    """
    lag: int
    f_stat: float
    p_value: float
    n: int


class GrangerResult(NamedTuple):
    """Granger tests in both directions between x and y

    Attributes:
        relation: ``x_to_y``, ``y_to_x``, ``both`` or ``none`` at alpha
        x_to_y: test of lags of x improving the prediction of y
        y_to_x: test of lags of y improving the prediction of x
        differenced: whether both series were first-differenced after
            failing the stationarity pre-check
    """
    relation: str
    x_to_y: DirectionTest
    y_to_x: DirectionTest
    differenced: bool = False

    def rows(self, feature: str, region: str) -> List[Dict]:
        return [
            {'feature': feature, 'region': region, 'direction': direction,
             'lag': test.lag, 'f_stat': test.f_stat,
             'p_value': test.p_value, 'relation': self.relation,
             'differenced': self.differenced}
            for direction, test in (('x_to_y', self.x_to_y),
                                    ('y_to_x', self.y_to_x))
        ]


def _as_series(s: Series) -> pd.Series:
    if isinstance(s, DailyFeatureSeries):
        return s.values
    return s


def _lags(values: np.ndarray, p: int, start: int) -> np.ndarray:
    """Columns ``values[t - 1], ..., values[t - p]`` for t >= start"""
    n = len(values)
    return np.column_stack([values[start - k:n - k] for k in range(1, p + 1)])


def _is_stationary(values: np.ndarray) -> bool:
    return adfuller(values, autolag='AIC')[1] < ADF_ALPHA


def _select_lag(effect: np.ndarray, max_lag: int) -> int:
    """Lag order minimizing the BIC of the restricted autoregression, all
    orders fitted on the same rows"""
    target = effect[max_lag:]
    bics = []
    for p in range(1, max_lag + 1):
        design = add_constant(_lags(effect, p, max_lag), has_constant='add')
        bics.append(OLS(target, design).fit().bic)
    return int(np.argmin(bics)) + 1


def _direction_test(cause: np.ndarray, effect: np.ndarray,
                    max_lag: int) -> DirectionTest:
    p = _select_lag(effect, max_lag)
    target = effect[max_lag:]
    own = _lags(effect, p, max_lag)
    other = _lags(cause, p, max_lag)
    restricted = OLS(target, add_constant(own, has_constant='add')).fit()
    unrestricted = OLS(target, add_constant(np.column_stack([own, other]),
                                            has_constant='add')).fit()
    n = len(target)
    df = n - 2 * p - 1
    ssr_r, ssr_u = restricted.ssr, unrestricted.ssr
    tss = float(np.sum((target - target.mean()) ** 2))
    if ssr_u <= COLLINEAR_TOL * tss:
        if ssr_r <= COLLINEAR_TOL * tss:
            return DirectionTest(p, 0.0, 1.0, n)
        return DirectionTest(p, float('inf'), 0.0, n)
    f_stat = max((ssr_r - ssr_u) / p / (ssr_u / df), 0.0)
    return DirectionTest(p, float(f_stat), float(f_dist.sf(f_stat, p, df)),
                         n)


def granger_test(x: Series, y: Series, max_lag: int = DEFAULT_MAX_LAG,
                 alpha: float = 0.05) -> GrangerResult:
    """Granger-test both directions between two daily series

    The series are aligned on their common days. If either fails an
    augmented Dickey-Fuller test at 5%, both are first-differenced. In
    each direction the lag order is chosen by BIC over the restricted
    autoregression of the effect, and the lags of the cause are tested for
    joint nullity with an F-test.

    Raises:
        TooShort: fewer than ``10 * max_lag`` common days
        ConstantSeries: a series has zero variance
    """
    x, y = _as_series(x), _as_series(y)
    joined = pd.concat([x.rename('x'), y.rename('y')], axis=1,
                       join='inner').dropna()
    n = len(joined)
    if max_lag < 1:
        raise TooShort(f'max_lag must be >= 1, got {max_lag}')
    if n < MIN_SPAN_PER_LAG * max_lag:
        raise TooShort(f'Need at least {MIN_SPAN_PER_LAG * max_lag} common '
                       f'days for max_lag={max_lag}, got {n}')
    xv = joined['x'].to_numpy(dtype=float)
    yv = joined['y'].to_numpy(dtype=float)
    for name, v in (('x', xv), ('y', yv)):
        if not np.std(v) > 0:
            raise ConstantSeries(f'Series {name} is constant')

    corr = np.corrcoef(xv, yv)[0, 1]
    if abs(corr) > 1 - COLLINEAR_TOL:
        # each series is an exact affine image of the other
        perfect = DirectionTest(1, float('inf'), 0.0, n - 1)
        return GrangerResult('both', perfect, perfect)

    differenced = not (_is_stationary(xv) and _is_stationary(yv))
    if differenced:
        logger.debug('Differencing both series after the stationarity check')
        xv, yv = np.diff(xv), np.diff(yv)
        for name, v in (('x', xv), ('y', yv)):
            if not np.std(v) > 0:
                raise ConstantSeries(f'Differenced series {name} is constant')

    x_to_y = _direction_test(xv, yv, max_lag)
    y_to_x = _direction_test(yv, xv, max_lag)
    relation = RELATIONS[(x_to_y.p_value < alpha, y_to_x.p_value < alpha)]
    return GrangerResult(relation, x_to_y, y_to_x, differenced)


class DMLResult(NamedTuple):
    """Partially linear effect of a treatment on an outcome

    Attributes:
        delta: effect estimate
        se: heteroscedasticity-robust standard error
        ci_lo: lower bound of the 95% confidence interval
        ci_hi: upper bound of the 95% confidence interval
        folds: cross-fitting folds
        n: rows used
    """
    delta: float
    se: float
    ci_lo: float
    ci_hi: float
    folds: int
    n: int


def _fit_fold(X: pd.DataFrame, T: np.ndarray, Y: np.ndarray,
              fit_idx: np.ndarray, hold_idx: np.ndarray,
              params: HyperParams, seed: int, fold: int):
    X_fit, X_hold = X.iloc[fit_idx], X.iloc[hold_idx]
    t_model = BoostedTreeRegressor(
        params, random_state=task_seed(seed, 'dml', fold, 'treatment'))
    y_model = BoostedTreeRegressor(
        params, random_state=task_seed(seed, 'dml', fold, 'outcome'))
    t_hat = t_model.fit(X_fit, T[fit_idx]).predict(X_hold)
    y_hat = y_model.fit(X_fit, Y[fit_idx]).predict(X_hold)
    return hold_idx, t_hat, y_hat


def dml_effect(T, Y, X: pd.DataFrame, folds: int = DML_FOLDS,
               params: HyperParams = None, seed: int = 0,
               jobs: int = 1) -> DMLResult:
    """Estimate ``delta`` in ``Y = delta * T + g(X) + e`` by double machine
    learning with cross-fitting

    On each of ``folds`` shuffled folds, boosted-tree nuisance models of
    T and Y given X are fitted on the other folds and used to residualize
    the held-out rows. The pooled residuals give ``delta`` by least
    squares through the origin, with an HC0 standard error.

    Raises:
        Misaligned: T, Y and X differ in length
        TooFew: fewer rows than folds, or fewer than two folds
        DegenerateTreatment: the treatment residual variance is below 1%
            of the treatment variance
    """
    if params is None:
        params = DML_PARAMS
    T = np.asarray(T, dtype=float).ravel()
    Y = np.asarray(Y, dtype=float).ravel()
    if not (len(T) == len(Y) == len(X)):
        raise Misaligned(f'T, Y and X have lengths {len(T)}, {len(Y)} '
                         f'and {len(X)}')
    n = len(T)
    if folds < 2 or n < 2 * folds:
        raise TooFew(f'Cross-fitting with {folds} folds needs at least '
                     f'{2 * folds} rows, got {n}')
    X = X.reset_index(drop=True)

    kf = KFold(n_splits=folds, shuffle=True,
               random_state=task_seed(seed, 'dml', 'split'))
    results = Parallel(n_jobs=jobs)(
        delayed(_fit_fold)(X, T, Y, fit_idx, hold_idx, params, seed, i)
        for i, (fit_idx, hold_idx) in enumerate(kf.split(X)))
    t_hat = np.empty(n)
    y_hat = np.empty(n)
    for hold_idx, t_fold, y_fold in results:
        t_hat[hold_idx] = t_fold
        y_hat[hold_idx] = y_fold

    v = T - t_hat
    u = Y - y_hat
    var_t = T.var()
    if not var_t > 0 or v.var() < DEGENERATE_SHARE * var_t:
        raise DegenerateTreatment(
            'Treatment is almost fully determined by the covariates')
    vv = float(v @ v)
    delta = float(v @ u) / vv
    e = u - delta * v
    se = float(np.sqrt(np.sum(v ** 2 * e ** 2)) / vv)
    return DMLResult(delta, se, delta - Z_95 * se, delta + Z_95 * se,
                     folds, n)


def daily_demand(panel: AlignedPanel, region: str) -> pd.Series:
    """Daily mean demand of a region over its fully observed days"""
    profiles = panel.demand[region].profiles()
    return profiles.mean(axis=1).rename(region)


def causal_frame(panel: AlignedPanel,
                 centroids: Sequence[DailyFeatureSeries] = ()
                 ) -> pd.DataFrame:
    """Daily table of the social factors and economic indicators"""
    columns = {c.name: c.values for c in centroids}
    for name, series in panel.economics.items():
        columns[f'econ_{name}'] = series.values
    return pd.DataFrame(columns).dropna()


def _calendar(target_days: pd.DatetimeIndex) -> pd.DataFrame:
    dow = target_days.dayofweek.to_numpy()
    doy = target_days.dayofyear.to_numpy()
    return pd.DataFrame({
        'target_weekend': (dow >= 5).astype(float),
        'target_dow_sin': np.sin(2 * np.pi * dow / 7),
        'target_dow_cos': np.cos(2 * np.pi * dow / 7),
        'target_doy_sin': np.sin(2 * np.pi * doy / 365.25),
        'target_doy_cos': np.cos(2 * np.pi * doy / 365.25),
    }, index=target_days)


def causal_profile(features: pd.DataFrame, demand: pd.Series, feature: str,
                   horizons: Sequence[int] = range(1, 31),
                   folds: int = DML_FOLDS, params: HyperParams = None,
                   seed: int = 0, jobs: int = 1,
                   region: Optional[str] = None) -> pd.DataFrame:
    """Effect of a daily feature on demand h days later, for each horizon

    For horizon h the outcome is the daily mean demand of day d + h, the
    treatment the feature at day d, and the covariates the remaining
    features at day d, the daily mean demand of day d and the calendar of
    day d + h.

    Args:
        features: daily features, see :py:func:`causal_frame`
        demand: daily mean demand, see :py:func:`daily_demand`
        feature: treatment column of features
        horizons: days ahead
        folds: cross-fitting folds
        params: nuisance model hyperparameters
        seed: global seed; each horizon uses its own derived seed
        jobs: parallel fold fits
        region: label of the rows

    Returns:
        one row per horizon with columns ``feature, region, horizon,
        delta, se, ci_lo, ci_hi, n``
    """
    if feature not in features.columns:
        raise Misaligned(f'Unknown feature {feature!r}')
    rows = []
    for h in horizons:
        outcome = demand.shift(-h, freq='D').rename('outcome')
        joined = pd.concat([features, demand.rename('issue_demand'),
                            outcome], axis=1, join='inner').dropna()
        if joined.empty:
            raise TooShort(f'No overlapping days at horizon {h}')
        target_days = joined.index + pd.Timedelta(days=h)
        calendar = _calendar(target_days)
        calendar.index = joined.index
        X = pd.concat([joined.drop(columns=[feature, 'outcome']), calendar],
                      axis=1)
        result = dml_effect(joined[feature], joined['outcome'], X,
                            folds=folds, params=params,
                            seed=task_seed(seed, feature, region, h),
                            jobs=jobs)
        logger.debug(f'DML {feature} h={h}: delta={result.delta:.4g} '
                     f'(se {result.se:.3g})')
        rows.append({'feature': feature, 'region': region, 'horizon': h,
                     **result._asdict()})
    frame = pd.DataFrame(rows)
    return frame.loc[:, ['feature', 'region', 'horizon', 'delta', 'se',
                         'ci_lo', 'ci_hi', 'n']]


def pooled_effect(profile: pd.DataFrame) -> Dict:
    """Pool a causal profile over horizons

    The pooled delta is the mean of the per-horizon deltas and its
    standard error the root mean square of theirs.
    """
    delta = float(profile['delta'].mean())
    se = float(np.sqrt(np.mean(profile['se'] ** 2)))
    return {
        'feature': profile['feature'].iloc[0],
        'region': profile['region'].iloc[0],
        'horizon': 'all',
        'delta': delta,
        'se': se,
        'ci_lo': delta - Z_95 * se,
        'ci_hi': delta + Z_95 * se,
        'n': int(profile['n'].min()),
    }
