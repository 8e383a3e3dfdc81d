"""Reference forecasters: persistence, smart climatology, their LASSO
combination, and a LASSO regressor on the design matrix
"""

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.linalg import qr

from loadscope.data import CONSTANT_TOL, HOUR_COLUMNS, DesignMatrix
from loadscope.exc import Misaligned, MissingDay, NoHistory, NotConverged
from loadscope.ingestion import AlignedPanel
from loadscope.util import HOURS, as_date, warn
from loadscope.util.log import logger
from loadscope.util.typing import DateRange, Dateish

__all__ = (
    'ClimatologyForecaster',
    'LassoForecaster',
    'LassoModel',
    'PfScfCombiner',
    'climatology_forecast',
    'combine_pf_scf',
    'independent_columns',
    'lasso_fit',
    'persistence_forecast',
    'persistence_forecasts',
)

DEFAULT_LAMBDAS = (1e-4, 1e-3, 1e-2, 1e-1)
LASSO_TOL = 1e-8
LASSO_MAX_ITER = 10000
# |correlation| above which PF and SCF are treated as one regressor
COLLINEAR_TOL = 1 - 1e-10
FORECASTER_TOL = 1e-6
FORECASTER_OBJECTIVE_TOL = 1e-10
# pivots below this share of the largest one mark dependent columns
RANK_TOL = 1e-9


def persistence_forecast(panel: AlignedPanel, region: str, day: Dateish,
                         horizon: int) -> np.ndarray:
    """Persist the 24-hour profile of issue day d to target day d + h

    Raises:
        MissingDay: day d is not fully observed
    """
    day = pd.Timestamp(as_date(day))
    profiles = panel.demand[region].profiles()
    if day not in profiles.index:
        raise MissingDay(day.date())
    return profiles.loc[day].to_numpy(dtype=float)


def persistence_forecasts(panel: AlignedPanel, region: str,
                          days: Sequence[Dateish]) -> pd.DataFrame:
    """Persistence forecasts of many issue days, indexed by issue day"""
    days = pd.DatetimeIndex([pd.Timestamp(as_date(d)) for d in days])
    profiles = panel.demand[region].profiles()
    missing = days[~days.isin(profiles.index)]
    if len(missing):
        raise MissingDay(missing[0].date())
    out = profiles.reindex(days)
    out.columns = HOUR_COLUMNS
    return out


class ClimatologyForecaster:
    """Mean training-range demand per (month, hour)

    Args:
        panel: aligned inputs
        region: demand region
        train_range: days whose demand forms the climatology
    """

    def __init__(self, panel: AlignedPanel, region: str,
                 train_range: DateRange):
        start, end = (pd.Timestamp(as_date(d)) for d in train_range)
        profiles = panel.demand[region].profiles().loc[start:end]
        self.table = profiles.groupby(profiles.index.month).mean()
        self.table.columns = HOUR_COLUMNS

    def forecast(self, target_day: Dateish) -> np.ndarray:
        """Raises:
            NoHistory: the training range lacks the target day's month
        """
        month = pd.Timestamp(as_date(target_day)).month
        if month not in self.table.index:
            raise NoHistory(month)
        return self.table.loc[month].to_numpy(dtype=float)

    def forecasts(self, target_days: pd.DatetimeIndex) -> pd.DataFrame:
        months = target_days.month
        missing = sorted(set(months) - set(self.table.index))
        if missing:
            raise NoHistory(missing[0])
        out = self.table.reindex(months)
        out.index = target_days
        return out


def climatology_forecast(panel: AlignedPanel, region: str,
                         target_day: Dateish,
                         train_range: DateRange) -> np.ndarray:
    """Mean training demand at the target day's month, per hour

    Raises:
        NoHistory: the training range lacks the target day's month
    """
    return ClimatologyForecaster(panel, region, train_range).forecast(
        target_day)


@dataclass(frozen=True, eq=False)
class LassoModel:
    """Linear model fitted by LASSO

    Attributes:
        coef: coefficient per feature
        intercept: intercept
        lam: l1 regularization strength
        objective: objective value after every coordinate-descent sweep
        n_iter: number of sweeps run
    """
    coef: np.ndarray
    intercept: float
    lam: float
    objective: List[float] = field(default_factory=list)
    n_iter: int = 0

    def predict(self, X) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.coef + self.intercept


def soft_threshold(x: float, t: float) -> float:
    return float(np.sign(x) * max(abs(x) - t, 0.0))


def lasso_fit(X, y, lam: float, tol: float = LASSO_TOL,
              max_iter: int = LASSO_MAX_ITER,
              warm_start: np.ndarray = None,
              strict: bool = True,
              objective_tol: float = None) -> LassoModel:
    """Cyclic coordinate descent for the LASSO

    Minimizes ``(1/2n) ||y - X b - b0||^2 + lam ||b||_1`` with an
    unpenalized intercept, working on centered data through covariance
    updates. Converged when the largest coefficient change of a sweep is
    below tol or, when objective_tol is given, when a sweep lowers the
    objective by less than objective_tol relative to its value. With
    ``strict=False`` a fit that runs out of sweeps keeps its last iterate
    and issues a warning instead of raising.

    Raises:
        NotConverged: strict and no convergence within max_iter sweeps
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    n, p = X.shape
    x_mean = X.mean(axis=0)
    y_mean = y.mean()
    Xc = X - x_mean
    yc = y - y_mean
    gram = Xc.T @ Xc / n
    cov = Xc.T @ yc / n
    yy = yc @ yc / n
    beta = (np.zeros(p) if warm_start is None
            else np.array(warm_start, dtype=float))
    g_beta = gram @ beta

    def objective():
        loss = (yy - 2 * cov @ beta + beta @ g_beta) / 2
        return float(max(loss, 0.0) + lam * np.abs(beta).sum())

    history = [objective()]
    for sweep in range(1, max_iter + 1):
        max_change = 0.0
        for j in range(p):
            if gram[j, j] <= 0:
                continue
            old = beta[j]
            rho = cov[j] - g_beta[j] + gram[j, j] * old
            new = soft_threshold(rho, lam) / gram[j, j]
            if new != old:
                g_beta += gram[:, j] * (new - old)
                beta[j] = new
                max_change = max(max_change, abs(new - old))
        history.append(objective())
        stalled = (objective_tol is not None
                   and history[-2] - history[-1]
                   <= objective_tol * max(abs(history[-1]), 1e-300))
        if max_change < tol or stalled:
            intercept = float(y_mean - x_mean @ beta)
            return LassoModel(beta, intercept, lam, history, sweep)
    if strict:
        raise NotConverged(max_iter)
    warn(f'LASSO (lambda {lam:g}) did not converge within {max_iter} '
         f'sweeps; keeping the last iterate')
    return LassoModel(beta, float(y_mean - x_mean @ beta), lam, history,
                      max_iter)


def _standardize_columns(X: np.ndarray) -> Tuple[np.ndarray, np.ndarray,
                                                 np.ndarray]:
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std > CONSTANT_TOL * np.maximum(1, np.abs(mean)), std,
                   np.inf)
    return (X - mean) / std, mean, std


def independent_columns(X: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Indices of a maximal linearly independent set of columns of X

    Chosen by QR with column pivoting and returned in column order.
    All-zero columns are never chosen.
    """
    X = np.asarray(X, dtype=float)
    if X.shape[1] == 0 or not np.any(X):
        return np.arange(0)
    _, r, perm = qr(X, mode='economic', pivoting=True)
    pivots = np.abs(np.diag(r))
    rank = int((pivots > tol * pivots[0]).sum())
    return np.sort(perm[:rank])


def _select_lambda(X, y, lambdas: Sequence[float]) -> float:
    """Pick lambda by fitting on the first half of the rows and scoring on
    the second half"""
    half = len(y) // 2
    scores = []
    for lam in lambdas:
        model = lasso_fit(X[:half], y[:half], lam)
        scores.append(np.mean((model.predict(X[half:]) - y[half:]) ** 2))
    return float(lambdas[int(np.argmin(scores))])


@dataclass(frozen=True)
class PfScfCombiner:
    """Linear combination ``coef_pf * PF + coef_scf * SCF + intercept``"""
    coef_pf: float
    coef_scf: float
    intercept: float
    lam: float

    def predict(self, pf, scf) -> np.ndarray:
        return (self.coef_pf * np.asarray(pf, dtype=float)
                + self.coef_scf * np.asarray(scf, dtype=float)
                + self.intercept)


def combine_pf_scf(pf: pd.DataFrame, scf: pd.DataFrame,
                   truth: pd.DataFrame,
                   lambdas: Sequence[float] = DEFAULT_LAMBDAS
                   ) -> PfScfCombiner:
    """Fit LASSO weights of persistence and climatology on validation days

    All (day, hour) cells are samples. Both regressors and the target are
    standardized for fitting; lambda is chosen on a half split of the
    validation days and the weights are refitted on all of them. When the
    two regressors are perfectly correlated they are fitted as one and the
    weight is split evenly between them.

    Raises:
        Misaligned: the three tables do not share days and hours
    """
    if not (pf.shape == scf.shape == truth.shape
            and pf.index.equals(scf.index) and pf.index.equals(truth.index)):
        raise Misaligned('PF, SCF and truth must share days and hours')
    X = np.column_stack([pf.to_numpy(dtype=float).ravel(),
                         scf.to_numpy(dtype=float).ravel()])
    y = truth.to_numpy(dtype=float).ravel()
    Xs, x_mean, x_std = _standardize_columns(X)
    y_mean, y_std = y.mean(), y.std()
    if not y_std > 0:
        y_std = 1.0
    ys = (y - y_mean) / y_std

    corr = (np.corrcoef(Xs.T)[0, 1]
            if np.isfinite(x_std).all() else 0.0)
    collinear = abs(corr) > COLLINEAR_TOL
    design = Xs[:, :1] if collinear else Xs

    lam = _select_lambda(design, ys, lambdas) if len(lambdas) > 1 \
        else float(lambdas[0])
    model = lasso_fit(design, ys, lam)
    coef_std = np.zeros(2)
    if collinear:
        # PF and SCF carry the same standardized signal
        coef_std[:] = model.coef[0] / 2 * np.array([1.0, np.sign(corr)])
    else:
        coef_std[:] = model.coef
    coef = coef_std * y_std / x_std
    intercept = y_mean + y_std * model.intercept - coef @ x_mean
    logger.debug(f'PF-SCF weights {coef[0]:.4f}, {coef[1]:.4f} '
                 f'(lambda {lam:g})')
    return PfScfCombiner(float(coef[0]), float(coef[1]), float(intercept),
                         lam)


class LassoForecaster:
    """One LASSO model per hour on the standardized design matrix

    Lambda is chosen per hour from a grid by validation MSE. Only a
    linearly independent set of the standardized training columns enters
    the fit, so constant columns and exact linear combinations of other
    columns are ignored.
    """

    def __init__(self, lambdas: Sequence[float] = DEFAULT_LAMBDAS):
        self.lambdas = tuple(lambdas)
        self.models: Dict[int, LassoModel] = {}

    def fit(self, train: DesignMatrix, val: DesignMatrix
            ) -> 'LassoForecaster':
        X = train.X.to_numpy(dtype=float)
        Xs, self.x_mean, self.x_std = _standardize_columns(X)
        self.columns = list(train.X.columns)
        self.keep = independent_columns(Xs)
        if len(self.keep) < len(self.columns):
            logger.debug(
                f'LASSO uses {len(self.keep)} of {len(self.columns)} '
                f'linearly independent columns')
        Xs = Xs[:, self.keep]
        Xv = self._transform(val.X)
        Y = train.Y.to_numpy(dtype=float)
        Yv = val.Y.to_numpy(dtype=float)
        self.y_mean = Y.mean(axis=0)
        self.y_std = np.where(Y.std(axis=0) > 0, Y.std(axis=0), 1.0)
        for hour in range(HOURS):
            ys = (Y[:, hour] - self.y_mean[hour]) / self.y_std[hour]
            yv = (Yv[:, hour] - self.y_mean[hour]) / self.y_std[hour]
            best, best_mse, beta = None, np.inf, None
            # warm starts along a decreasing lambda path
            for lam in sorted(self.lambdas, reverse=True):
                model = lasso_fit(Xs, ys, lam, tol=FORECASTER_TOL,
                                  warm_start=beta, strict=False,
                                  objective_tol=FORECASTER_OBJECTIVE_TOL)
                beta = model.coef
                mse = np.mean((model.predict(Xv) - yv) ** 2)
                if mse < best_mse:
                    best, best_mse = model, mse
            self.models[hour] = best
        return self

    def _transform(self, X: pd.DataFrame) -> np.ndarray:
        if list(X.columns) != self.columns:
            if set(X.columns) != set(self.columns):
                raise Misaligned('Columns differ from the training columns')
            X = X.loc[:, self.columns]
        Z = (X.to_numpy(dtype=float) - self.x_mean) / self.x_std
        return Z[:, self.keep]

    def predict(self, X: pd.DataFrame) -> pd.DataFrame:
        Z = self._transform(X)
        out = np.column_stack([
            self.models[hour].predict(Z) * self.y_std[hour]
            + self.y_mean[hour]
            for hour in range(HOURS)
        ])
        return pd.DataFrame(out, index=X.index, columns=HOUR_COLUMNS)
