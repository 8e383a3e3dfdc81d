from dataclasses import asdict, dataclass, fields
from typing import Dict, List, Optional

import numpy as np

from loadscope.exc import ConfigurationError, DegenerateData

__all__ = (
    'HyperParams',
    'LEAF',
    'Tree',
    'fit_tree',
    'presort',
)

LEAF = -1
# nodes smaller than 1 / DIRECT_SORT_RATIO of the rows sort their own values
DIRECT_SORT_RATIO = 4


@dataclass(frozen=True)
class HyperParams:
    """Hyperparameters of a boosted tree ensemble"""
    n_trees: int = 500
    learning_rate: float = 0.05
    max_depth: int = 4
    min_samples_leaf: int = 5
    l2_leaf_reg: float = 1.0
    feature_fraction: float = 1.0
    row_subsample: float = 1.0
    early_stopping_rounds: int = 20

    def __post_init__(self):
        if not 0 < self.learning_rate <= 1:
            raise ConfigurationError(
                f'learning_rate must be in (0, 1], got {self.learning_rate}')
        for name in ('feature_fraction', 'row_subsample'):
            value = getattr(self, name)
            if not 0 < value <= 1:
                raise ConfigurationError(
                    f'{name} must be in (0, 1], got {value}')
        for name in ('n_trees', 'min_samples_leaf', 'early_stopping_rounds'):
            if int(getattr(self, name)) < 1:
                raise ConfigurationError(f'{name} must be >= 1')
        if int(self.max_depth) < 0:
            raise ConfigurationError('max_depth must be >= 0')
        if self.l2_leaf_reg < 0:
            raise ConfigurationError('l2_leaf_reg must be >= 0')
        for f in fields(self):
            if f.type is int:
                object.__setattr__(self, f.name, int(getattr(self, f.name)))
            else:
                object.__setattr__(self, f.name,
                                   float(getattr(self, f.name)))

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Dict) -> 'HyperParams':
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigurationError(
                f'Unknown hyperparameters: {sorted(unknown)}')
        return cls(**d)


@dataclass(frozen=True, eq=False)
class Tree:
    """Binary regression tree stored as parallel node arrays

    Node 0 is the root. Internal nodes send rows with
    ``x[feature] <= threshold`` to ``left`` and the rest to ``right``; leaves
    have ``feature == LEAF``. ``cover`` counts the training rows reaching
    each node.
    """
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    cover: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def is_leaf(self, node: int) -> bool:
        return self.feature[node] == LEAF

    @property
    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=int)
        for node in range(self.n_nodes):
            if not self.is_leaf(node):
                depth[self.left[node]] = depth[node] + 1
                depth[self.right[node]] = depth[node] + 1
        return int(depth.max())

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Index of the leaf reached by every row of X"""
        X = np.asarray(X, dtype=float)
        rows = np.arange(len(X))
        node = np.zeros(len(X), dtype=int)
        while True:
            feature = self.feature[node]
            internal = feature != LEAF
            if not internal.any():
                return node
            go_left = X[rows, np.where(internal, feature, 0)] \
                <= self.threshold[node]
            child = np.where(go_left, self.left[node], self.right[node])
            node = np.where(internal, child, node)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_dict(self) -> Dict:
        return {
            'feature': self.feature.tolist(),
            'threshold': self.threshold.tolist(),
            'left': self.left.tolist(),
            'right': self.right.tolist(),
            'value': self.value.tolist(),
            'cover': self.cover.tolist(),
        }

    @classmethod
    def from_dict(cls, d: Dict) -> 'Tree':
        return cls(
            feature=np.asarray(d['feature'], dtype=int),
            threshold=np.asarray(d['threshold'], dtype=float),
            left=np.asarray(d['left'], dtype=int),
            right=np.asarray(d['right'], dtype=int),
            value=np.asarray(d['value'], dtype=float),
            cover=np.asarray(d['cover'], dtype=float),
        )

    @classmethod
    def leaf(cls, value: float, cover: float) -> 'Tree':
        return cls(np.array([LEAF]), np.array([0.0]), np.array([LEAF]),
                   np.array([LEAF]), np.array([float(value)]),
                   np.array([float(cover)]))


def presort(X: np.ndarray) -> np.ndarray:
    """Row order of every column of X, for reuse across trees"""
    return np.argsort(X, axis=0, kind='stable')


class _TreeBuilder:

    def __init__(self, X, g, features, params: HyperParams, order):
        self.X = X
        self.g = g
        self.features = features
        self.params = params
        self.lam = params.l2_leaf_reg
        self.order = order[:, features] if order is not None else None
        self.n = len(X)
        self.nodes: List[list] = []

    def _add(self, value, cover) -> int:
        self.nodes.append([LEAF, 0.0, LEAF, LEAF, value, cover])
        return len(self.nodes) - 1

    def _sorted_rows(self, rows: np.ndarray) -> np.ndarray:
        """Rows of a node, sorted by each sampled feature (features x rows)
        """
        m = len(rows)
        if self.order is None or m * DIRECT_SORT_RATIO < self.n:
            block = self.X[np.ix_(rows, self.features)]
            return rows[np.argsort(block, axis=0, kind='stable')].T
        in_node = np.zeros(self.n, dtype=bool)
        in_node[rows] = True
        sel = in_node[self.order]
        return self.order.T[sel.T].reshape(len(self.features), m)

    def _best_split(self, rows: np.ndarray):
        msl = self.params.min_samples_leaf
        m = len(rows)
        if m < 2 * msl:
            return None
        g = self.g[rows]
        if g.max() == g.min():
            return None
        idx = self._sorted_rows(rows)
        xs = self.X[idx, self.features[:, None]]
        gs = self.g[idx]
        g_left = np.cumsum(gs, axis=1)[:, :-1]
        g_total = g.sum()
        n_left = np.arange(1, m)
        n_right = m - n_left
        gain = (g_left ** 2 / (n_left + self.lam)
                + (g_total - g_left) ** 2 / (n_right + self.lam)
                - g_total ** 2 / (m + self.lam))
        valid = xs[:, :-1] < xs[:, 1:]
        valid &= (n_left >= msl) & (n_right >= msl)
        gain = np.where(valid, gain, -np.inf)
        best = int(np.argmax(gain))
        j, i = divmod(best, m - 1)
        if not gain[j, i] > 0:
            return None
        lo, hi = xs[j, i], xs[j, i + 1]
        threshold = lo + (hi - lo) / 2
        if not lo <= threshold < hi:
            threshold = lo
        return int(self.features[j]), float(threshold)

    def grow(self, rows: np.ndarray, depth: int) -> int:
        m = len(rows)
        value = self.g[rows].sum() / (m + self.lam)
        node = self._add(value, float(m))
        if depth >= self.params.max_depth:
            return node
        split = self._best_split(rows)
        if split is None:
            return node
        feature, threshold = split
        go_left = self.X[rows, feature] <= threshold
        left = self.grow(rows[go_left], depth + 1)
        right = self.grow(rows[~go_left], depth + 1)
        self.nodes[node][:4] = [feature, threshold, left, right]
        return node

    def tree(self) -> Tree:
        arr = list(zip(*self.nodes))
        return Tree(
            feature=np.array(arr[0], dtype=int),
            threshold=np.array(arr[1], dtype=float),
            left=np.array(arr[2], dtype=int),
            right=np.array(arr[3], dtype=int),
            value=np.array(arr[4], dtype=float),
            cover=np.array(arr[5], dtype=float),
        )


def _refit_leaves(tree: Tree, X: np.ndarray, g: np.ndarray,
                  lam: float) -> Tree:
    """Re-estimate leaf values and covers on every row"""
    leaves = tree.apply(X)
    n = tree.n_nodes
    cover = np.bincount(leaves, minlength=n).astype(float)
    total = np.bincount(leaves, weights=g, minlength=n)
    value = tree.value.copy()
    is_leaf = tree.feature == LEAF
    value[is_leaf] = total[is_leaf] / (cover[is_leaf] + lam)
    # children always follow their parent in node order
    for node in range(n - 1, -1, -1):
        if not is_leaf[node]:
            cover[node] = cover[tree.left[node]] + cover[tree.right[node]]
            total[node] = total[tree.left[node]] + total[tree.right[node]]
            value[node] = total[node] / (cover[node] + lam)
    return Tree(tree.feature, tree.threshold, tree.left, tree.right,
                value, cover)


def fit_tree(X: np.ndarray, g: np.ndarray, params: HyperParams,
             rng: np.random.Generator,
             order: Optional[np.ndarray] = None) -> Tree:
    """Fit one regression tree to residuals by exact greedy split search

    The gain of splitting a node with residual sum G over n rows into left
    and right parts is::

        G_L**2 / (n_L + l2) + G_R**2 / (n_R + l2) - G**2 / (n + l2)

    and leaf values are G / (n + l2). Candidate thresholds lie midway
    between consecutive distinct values of each sampled feature. With
    ``row_subsample < 1`` the structure is learned on a subsample and leaf
    values and covers are then re-estimated on every row.

    Args:
        X: features, rows x columns
        g: residuals (targets) of every row
        params: hyperparameters
        rng: random generator for row and feature sampling
        order: optional output of :py:func:`presort` on X

    Raises:
        DegenerateData: X has no rows
    """
    X = np.asarray(X, dtype=float)
    g = np.asarray(g, dtype=float)
    n, p = X.shape
    if n == 0:
        raise DegenerateData('Cannot fit a tree to zero rows')
    if len(g) != n:
        raise DegenerateData('X and targets have different lengths')

    n_features = max(1, int(round(params.feature_fraction * p)))
    if n_features < p:
        features = np.sort(rng.choice(p, size=n_features, replace=False))
    else:
        features = np.arange(p)
    if params.row_subsample < 1:
        size = max(1, int(round(params.row_subsample * n)))
        rows = np.sort(rng.choice(n, size=size, replace=False))
    else:
        rows = np.arange(n)

    builder = _TreeBuilder(X, g, features, params, order)
    builder.grow(rows, 0)
    tree = builder.tree()
    if len(rows) < n:
        tree = _refit_leaves(tree, X, g, params.l2_leaf_reg)
    return tree
