from dataclasses import dataclass
from typing import Tuple

import numpy as np
import pandas as pd
from scipy.special import digamma
from sklearn.model_selection import KFold

from loadscope.gbdt.ensemble import Ensemble, as_frame, fit_ensemble
from loadscope.gbdt.tree import HyperParams
from loadscope.util.log import logger
from loadscope.util.seeds import task_seed

__all__ = (
    'GaussianEnsemble',
    'fit_gaussian',
    'predict_gaussian',
)

# variance floor, relative to the training target's standard deviation
FLOOR_SCALE = 1e-3
OOF_FOLDS = 5
# E[log r**2] = log(sigma**2) + digamma(1/2) + log(2) for Gaussian r
LOG_CHI2_CORRECTION = float(np.exp(-(digamma(0.5) + np.log(2))))


@dataclass(frozen=True, eq=False)
class GaussianEnsemble:
    """Conditional Gaussian model of a target

    The mean comes from ``mu``. The mean log squared residual, on the scale
    of the standardized target, comes from ``logvar``. Its exponential
    underestimates the variance by a constant factor for Gaussian
    residuals; the excess over the floor is scaled up accordingly, so the
    predicted variance is never below ``variance_floor``.

    Attributes:
        mu: ensemble of the conditional mean
        logvar: ensemble of the log of the squared standardized residual
        variance_floor: smallest predicted variance, in squared target
            units
    """
    mu: Ensemble
    logvar: Ensemble
    variance_floor: float

    @property
    def target_std(self) -> float:
        return self.mu.target_std

    def predict(self, X: pd.DataFrame) -> Tuple[np.ndarray, np.ndarray]:
        """Predictive mean and standard deviation in target units"""
        mu = self.mu.predict(X)
        floor = self.variance_floor / self.target_std ** 2
        excess = np.maximum(np.exp(self.logvar.predict(X)) - floor, 0.0)
        variance = (floor + LOG_CHI2_CORRECTION * excess) \
            * self.target_std ** 2
        return mu, np.sqrt(variance)


def predict_gaussian(g: GaussianEnsemble,
                     X: pd.DataFrame) -> Tuple[np.ndarray, np.ndarray]:
    return g.predict(X)


def _log_squared(residual: np.ndarray, floor: float) -> np.ndarray:
    return np.log(np.maximum(residual ** 2, floor))


def fit_gaussian(X_train, y_train, X_val=None, y_val=None,
                 params: HyperParams = None, seed: int = 0,
                 folds: int = OOF_FOLDS) -> GaussianEnsemble:
    """Fit a Gaussian ensemble in two stages

    Stage one fits the mean ensemble exactly as :py:func:`fit_ensemble`
    does with the same params and seed. Stage two fits an ensemble to
    ``log(max(r**2, floor))``, where r are out-of-fold residuals of the mean
    model from ``folds``-fold cross-fitting on the training rows, on the
    standardized target scale. The floor is ``(1e-3 * std(y_train))**2``.

    Raises:
        EmptyData: no training rows
    """
    if params is None:
        params = HyperParams()
    X_train = as_frame(X_train)
    y = np.asarray(y_train, dtype=float).ravel()
    mu = fit_ensemble(X_train, y, X_val, y_val, params, seed)
    std = mu.target_std
    floor = FLOOR_SCALE ** 2

    oof = np.empty(len(y))
    folds = min(folds, len(y))
    if folds >= 2:
        kf = KFold(n_splits=folds, shuffle=True,
                   random_state=task_seed(seed, 'oof'))
        for i, (fit_idx, hold_idx) in enumerate(kf.split(X_train)):
            fold_model = fit_ensemble(
                X_train.iloc[fit_idx], y[fit_idx], X_val, y_val, params,
                task_seed(seed, 'oof', i))
            oof[hold_idx] = fold_model.predict(X_train.iloc[hold_idx])
    else:
        oof = mu.predict(X_train)

    z_train = _log_squared((y - oof) / std, floor)
    z_val = None
    if X_val is not None and y_val is not None and len(y_val) > 0:
        yv = np.asarray(y_val, dtype=float).ravel()
        z_val = _log_squared((yv - mu.predict(as_frame(X_val))) / std,
                             floor)
    logvar = fit_ensemble(X_train, z_train, X_val, z_val, params,
                          task_seed(seed, 'logvar'))
    logger.debug(f'Fitted Gaussian ensemble with {mu.n_trees} mean trees '
                 f'and {logvar.n_trees} log-variance trees')
    return GaussianEnsemble(mu, logvar, floor * std ** 2)
