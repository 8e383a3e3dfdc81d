from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.model_selection import train_test_split
from sklearn.utils.validation import check_is_fitted

from loadscope.data import CONSTANT_TOL, Standardizer
from loadscope.exc import ColumnMismatch, EmptyData
from loadscope.gbdt.tree import HyperParams, Tree, fit_tree, presort
from loadscope.util.log import TRACE, logger

__all__ = (
    'BoostedTreeRegressor',
    'Ensemble',
    'fit_ensemble',
    'predict',
)


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Boosted trees on standardized features and a standardized target

    The raw prediction is ``base_score + learning_rate * sum(tree outputs)``
    on the standardized target scale; :py:meth:`predict` maps it back to
    target units.

    Attributes:
        base_score: mean of the standardized training target
        trees: fitted trees, in boosting order
        learning_rate: shrinkage applied to every tree
        feature_names: columns the trees split on, in tree feature order
        input_names: columns expected at prediction time; columns not in
            feature_names were constant during training and are ignored
        standardizer: feature standardizer fitted on the training rows
        target_mean: mean of the training target
        target_std: population standard deviation of the training target
        params: hyperparameters used for fitting
        history: per-stage training and validation MSE (standardized
            scale), including the stages removed by early stopping
    """
    base_score: float
    trees: Tuple[Tree, ...]
    learning_rate: float
    feature_names: Tuple[str, ...]
    input_names: Tuple[str, ...]
    standardizer: Optional[Standardizer]
    target_mean: float
    target_std: float
    params: HyperParams = field(default_factory=HyperParams)
    history: Dict[str, List[float]] = field(default_factory=dict)

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def transform(self, X: pd.DataFrame) -> np.ndarray:
        """Select and standardize the model's features from X

        Raises:
            ColumnMismatch: X's columns differ from the training columns
        """
        if set(X.columns) != set(self.input_names) \
                or len(X.columns) != len(self.input_names):
            missing = sorted(set(self.input_names) - set(X.columns))
            extra = sorted(set(X.columns) - set(self.input_names))
            raise ColumnMismatch(
                f'Columns do not match: missing {missing}, extra {extra}')
        if not self.feature_names:
            return np.zeros((len(X), 0))
        Z = X.loc[:, list(self.feature_names)]
        return self.standardizer.apply(Z).to_numpy()

    def predict_raw(self, Z: np.ndarray) -> np.ndarray:
        """Prediction on the standardized target scale from transformed
        features"""
        out = np.full(len(Z), self.base_score)
        for tree in self.trees:
            out += self.learning_rate * tree.predict(Z)
        return out

    def predict(self, X: pd.DataFrame) -> np.ndarray:
        return self.predict_raw(self.transform(X)) * self.target_std \
            + self.target_mean


def predict(e: Ensemble, X: pd.DataFrame) -> np.ndarray:
    """Predict in target units (MW for demand models)

    Raises:
        ColumnMismatch: X's columns differ from the training columns
    """
    return e.predict(X)


def as_frame(X) -> pd.DataFrame:
    if isinstance(X, pd.DataFrame):
        return X
    X = np.asarray(X, dtype=float)
    return pd.DataFrame(X, columns=[f'x{j}' for j in range(X.shape[1])])


def _drop_constant(X: pd.DataFrame) -> List[str]:
    if len(X) < 2:
        return []
    arr = X.to_numpy(dtype=float)
    scale = np.maximum(1.0, np.abs(arr.mean(axis=0)))
    varying = arr.std(axis=0) > CONSTANT_TOL * scale
    keep = [c for c, v in zip(X.columns, varying) if v]
    dropped = len(X.columns) - len(keep)
    if dropped:
        logger.debug(f'Ignoring {dropped} constant training columns')
    return keep


def fit_ensemble(X_train, y_train, X_val=None, y_val=None,
                 params: HyperParams = None, seed: int = 0) -> Ensemble:
    """Fit a boosted tree ensemble by stagewise fitting on residuals

    Training stops early when the validation MSE has not improved for
    ``params.early_stopping_rounds`` stages, and the returned ensemble is
    truncated to the best stage. Without validation data every stage is
    kept.

    Args:
        X_train: training features, a frame (bound by column name) or array
        y_train: one training target column
        X_val: validation features
        y_val: validation target
        params: hyperparameters, defaults to ``HyperParams()``
        seed: seed of the row and feature sampling

    Raises:
        EmptyData: no training rows
    """
    if params is None:
        params = HyperParams()
    X_train = as_frame(X_train)
    y = np.asarray(y_train, dtype=float).ravel()
    if len(X_train) == 0 or len(y) == 0:
        raise EmptyData('Cannot fit an ensemble to zero rows')
    if len(X_train) != len(y):
        raise EmptyData('Features and target have different lengths')

    target_mean = float(y.mean())
    target_std = float(y.std())
    if not target_std > 0:
        target_std = 1.0
    ys = (y - target_mean) / target_std
    base_score = float(ys.mean())

    keep = _drop_constant(X_train)
    standardizer = (Standardizer.fit(X_train.loc[:, keep])
                    if keep else None)
    e = Ensemble(base_score, (), params.learning_rate, tuple(keep),
                 tuple(X_train.columns), standardizer, target_mean,
                 target_std, params)
    Z = e.transform(X_train)

    has_val = X_val is not None and y_val is not None and len(y_val) > 0
    if has_val:
        Zv = e.transform(as_frame(X_val))
        yv = (np.asarray(y_val, dtype=float).ravel() - target_mean) \
            / target_std

    trees: List[Tree] = []
    pred = np.full(len(ys), base_score)
    train_mse = [float(np.mean((ys - pred) ** 2))]
    val_mse = []
    if has_val:
        val_pred = np.full(len(yv), base_score)
        val_mse.append(float(np.mean((yv - val_pred) ** 2)))
    best, best_mse = 0, val_mse[0] if has_val else None

    if Z.shape[1] and train_mse[0] > 0:
        rng = np.random.default_rng(seed)
        order = presort(Z)
        for stage in range(1, params.n_trees + 1):
            tree = fit_tree(Z, ys - pred, params, rng, order=order)
            trees.append(tree)
            pred += params.learning_rate * tree.predict(Z)
            train_mse.append(float(np.mean((ys - pred) ** 2)))
            if has_val:
                val_pred += params.learning_rate * tree.predict(Zv)
                val_mse.append(float(np.mean((yv - val_pred) ** 2)))
                logger.log(TRACE, f'Stage {stage}: train MSE '
                                  f'{train_mse[-1]:.6g}, '
                                  f'val MSE {val_mse[-1]:.6g}')
                if val_mse[-1] < best_mse:
                    best, best_mse = stage, val_mse[-1]
                elif stage - best >= params.early_stopping_rounds:
                    break
            else:
                best = stage
                logger.log(TRACE, f'Stage {stage}: train MSE '
                                  f'{train_mse[-1]:.6g}')

    history = {'train_mse': train_mse}
    if has_val:
        history['val_mse'] = val_mse
    return Ensemble(base_score, tuple(trees[:best]), params.learning_rate,
                    tuple(keep), tuple(X_train.columns), standardizer,
                    target_mean, target_std, params, history)


class BoostedTreeRegressor(BaseEstimator, RegressorMixin):
    """Scikit-learn style wrapper around :py:func:`fit_ensemble`

    A fraction of the training rows is held out for early stopping.

    Args:
        params: hyperparameters
        holdout: fraction of rows held out for early stopping; 0 disables
        random_state: seed of the holdout split and of the trees
    """

    def __init__(self, params: HyperParams = None, holdout: float = 0.2,
                 random_state: int = 0):
        self.params = params
        self.holdout = holdout
        self.random_state = random_state

    def fit(self, X, y):
        X = as_frame(X)
        y = np.asarray(y, dtype=float).ravel()
        if self.holdout and len(X) >= 10:
            X_fit, X_hold, y_fit, y_hold = train_test_split(
                X, y, test_size=self.holdout,
                random_state=self.random_state)
        else:
            X_fit, y_fit, X_hold, y_hold = X, y, None, None
        self.ensemble_ = fit_ensemble(X_fit, y_fit, X_hold, y_hold,
                                      self.params, seed=self.random_state)
        return self

    def predict(self, X):
        check_is_fitted(self, 'ensemble_')
        return self.ensemble_.predict(as_frame(X))

    @property
    def feature_names(self) -> Sequence[str]:
        check_is_fitted(self, 'ensemble_')
        return self.ensemble_.input_names
