"""Exact path-dependent SHAP values of boosted tree ensembles

Each tree's attributions follow the polynomial-time path recursion over
node covers: the unique features on the path to a leaf are tracked with the
fractions of zero (feature absent) and one (feature present) paths that flow
through them, and a leaf's value is shared among them by the permutation
weights of the path.
"""

from dataclasses import dataclass
from typing import Iterable, List, Tuple, Union

import numpy as np
import pandas as pd

from loadscope.exc import BadFeature, MissingCovers
from loadscope.gbdt.ensemble import Ensemble
from loadscope.gbdt.gaussian import GaussianEnsemble
from loadscope.gbdt.tree import LEAF, Tree

__all__ = (
    'ShapMatrix',
    'average_summaries',
    'dependence_data',
    'expected_value',
    'shap_summary',
    'shap_values',
    'summarize_shap',
    'tree_shap',
)

Model = Union[Ensemble, GaussianEnsemble]


@dataclass
class _PathElement:
    feature: int
    zero: float
    one: float
    weight: float


def _extend(path: List[_PathElement], zero: float, one: float,
            feature: int) -> List[_PathElement]:
    path = [_PathElement(e.feature, e.zero, e.one, e.weight) for e in path]
    path.append(_PathElement(feature, zero, one, 0.0 if path else 1.0))
    depth = len(path) - 1
    for i in range(depth - 1, -1, -1):
        path[i + 1].weight += one * path[i].weight * (i + 1) / (depth + 1)
        path[i].weight = zero * path[i].weight * (depth - i) / (depth + 1)
    return path


def _unwind(path: List[_PathElement], k: int) -> List[_PathElement]:
    depth = len(path) - 1
    one, zero = path[k].one, path[k].zero
    weights = [e.weight for e in path]
    carry = weights[depth]
    for i in range(depth - 1, -1, -1):
        if one != 0:
            previous = weights[i]
            weights[i] = carry * (depth + 1) / ((i + 1) * one)
            carry = previous - weights[i] * zero * (depth - i) / (depth + 1)
        else:
            weights[i] = weights[i] * (depth + 1) / (zero * (depth - i))
    remaining = path[:k] + path[k + 1:]
    return [_PathElement(e.feature, e.zero, e.one, weights[i])
            for i, e in enumerate(remaining)]


def _unwound_sum(path: List[_PathElement], k: int) -> float:
    depth = len(path) - 1
    one, zero = path[k].one, path[k].zero
    carry = path[depth].weight
    total = 0.0
    for i in range(depth - 1, -1, -1):
        if one != 0:
            w = carry * (depth + 1) / ((i + 1) * one)
            total += w
            carry = path[i].weight - w * zero * (depth - i) / (depth + 1)
        else:
            total += path[i].weight * (depth + 1) / (zero * (depth - i))
    return total


def _check_covers(tree: Tree):
    cover = np.asarray(tree.cover, dtype=float)
    if len(cover) != tree.n_nodes or not np.isfinite(cover).all() \
            or not (cover > 0).all():
        raise MissingCovers('Every tree node needs a positive cover count')


def tree_expectation(tree: Tree) -> float:
    """Cover-weighted mean of the leaf values"""
    _check_covers(tree)
    leaves = tree.feature == LEAF
    return float(np.sum(tree.value[leaves] * tree.cover[leaves])
                 / tree.cover[0])


def _tree_phi(tree: Tree, z: np.ndarray, phi: np.ndarray):
    def recurse(node, path, zero, one, feature):
        path = _extend(path, zero, one, feature)
        split = tree.feature[node]
        if split == LEAF:
            for i in range(1, len(path)):
                w = _unwound_sum(path, i)
                phi[path[i].feature] += \
                    w * (path[i].one - path[i].zero) * tree.value[node]
            return
        if z[split] <= tree.threshold[node]:
            hot, cold = tree.left[node], tree.right[node]
        else:
            hot, cold = tree.right[node], tree.left[node]
        incoming_zero, incoming_one = 1.0, 1.0
        for k in range(1, len(path)):
            if path[k].feature == split:
                incoming_zero, incoming_one = path[k].zero, path[k].one
                path = _unwind(path, k)
                break
        cover = tree.cover[node]
        recurse(hot, path, incoming_zero * tree.cover[hot] / cover,
                incoming_one, split)
        recurse(cold, path, incoming_zero * tree.cover[cold] / cover,
                0.0, split)

    recurse(0, [], 1.0, 1.0, LEAF)


def _ensemble(model: Model) -> Ensemble:
    if isinstance(model, GaussianEnsemble):
        return model.mu
    return model


def expected_value(model: Model) -> float:
    """Base value of the attributions, in target units"""
    e = _ensemble(model)
    raw = e.base_score + e.learning_rate * sum(
        tree_expectation(t) for t in e.trees)
    return float(raw * e.target_std + e.target_mean)


def _phi_transformed(e: Ensemble, Z: np.ndarray) -> np.ndarray:
    """Attributions over the model's kept features, in target units"""
    for tree in e.trees:
        _check_covers(tree)
    phi = np.zeros((len(Z), len(e.feature_names)))
    for r in range(len(Z)):
        for tree in e.trees:
            _tree_phi(tree, Z[r], phi[r])
    return phi * e.learning_rate * e.target_std


def _as_rows(e: Ensemble, X) -> pd.DataFrame:
    if isinstance(X, pd.Series):
        return X.to_frame().T
    if isinstance(X, pd.DataFrame):
        return X
    arr = np.asarray(X, dtype=float).reshape(-1, len(e.input_names))
    return pd.DataFrame(arr, columns=list(e.input_names))


def _spread(e: Ensemble, phi: np.ndarray) -> np.ndarray:
    """Place kept-feature attributions into input column order; columns
    constant during training get zero"""
    out = np.zeros((len(phi), len(e.input_names)))
    position = {name: j for j, name in enumerate(e.input_names)}
    for k, name in enumerate(e.feature_names):
        out[:, position[name]] = phi[:, k]
    return out


def tree_shap(model: Model, x) -> Tuple[np.ndarray, float]:
    """SHAP values of one feature row and the base value

    The base value plus the sum of the attributions equals the model's
    prediction for the row.

    Args:
        model: ensemble, or Gaussian ensemble whose mean is explained
        x: one row, bound to the model's input columns by name

    Returns:
        attributions in the order of the model's input columns (in target
        units, MW for demand models) and the base value

    Raises:
        MissingCovers: a tree node lacks its cover count
        ColumnMismatch: x does not carry the model's input columns
    """
    e = _ensemble(model)
    X = _as_rows(e, x)
    phi = _spread(e, _phi_transformed(e, e.transform(X)))
    return phi[0], expected_value(e)


@dataclass(frozen=True, eq=False)
class ShapMatrix:
    """SHAP values of many rows

    Attributes:
        values: one row per sample and one column per input feature, in
            target units
        base: base value shared by all rows
    """
    values: pd.DataFrame
    base: float

    @property
    def features(self) -> List[str]:
        return list(self.values.columns)

    def to_long(self) -> pd.DataFrame:
        """Table with columns ``sample, feature, shap_value``"""
        n, m = self.values.shape
        return pd.DataFrame({
            'sample': np.repeat(np.arange(n), m),
            'feature': np.tile(np.asarray(self.features, dtype=object), n),
            'shap_value': self.values.to_numpy(dtype=float).ravel(),
        })


def shap_values(model: Model, X: pd.DataFrame) -> ShapMatrix:
    e = _ensemble(model)
    X = _as_rows(e, X)
    phi = _spread(e, _phi_transformed(e, e.transform(X)))
    values = pd.DataFrame(phi, index=X.index, columns=list(e.input_names))
    return ShapMatrix(values, expected_value(e))


def _rank(mean_abs: pd.Series) -> pd.DataFrame:
    table = mean_abs.rename('mean_abs_shap').rename_axis(
        'feature').reset_index()
    table = table.sort_values(['mean_abs_shap', 'feature'],
                              ascending=[False, True], kind='mergesort')
    table['rank'] = np.arange(1, len(table) + 1)
    return table.reset_index(drop=True)


def summarize_shap(shap: ShapMatrix) -> pd.DataFrame:
    """Features ranked by mean absolute SHAP value, ties by name

    Returns:
        table with columns ``feature, mean_abs_shap, rank``

    Raises:
        BadFeature: the matrix has no rows
    """
    if shap.values.empty:
        raise BadFeature('Cannot summarize attributions of zero rows')
    return _rank(shap.values.abs().mean(axis=0))


def shap_summary(model: Model, X: pd.DataFrame) -> pd.DataFrame:
    return summarize_shap(shap_values(model, X))


def average_summaries(summaries: Iterable[pd.DataFrame]) -> pd.DataFrame:
    """Average several summaries feature by feature and rank the result"""
    stacked = pd.concat(list(summaries), ignore_index=True)
    return _rank(stacked.groupby('feature')['mean_abs_shap'].mean())


def dependence_data(X: pd.DataFrame, shap: ShapMatrix, feature: str,
                    color: str) -> pd.DataFrame:
    """Feature values, their attributions and a coloring feature per sample

    Returns:
        table with columns ``x, shap, color``, one row per sample

    Raises:
        BadFeature: a feature is unknown or the two features are the same
    """
    if feature == color:
        raise BadFeature('Feature and color feature must differ')
    for name in (feature, color):
        if name not in X.columns or name not in shap.values.columns:
            raise BadFeature(f'Unknown feature {name!r}')
    if len(X) != len(shap.values):
        raise BadFeature('Features and attributions differ in rows')
    return pd.DataFrame({
        'x': X[feature].to_numpy(),
        'shap': shap.values[feature].to_numpy(),
        'color': X[color].to_numpy(),
    }, index=X.index)
