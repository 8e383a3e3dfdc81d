from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.cluster.hierarchy import linkage
from slugify import slugify
from stacklog import stacklog

from loadscope.data import DailyFeatureSeries, Standardizer
from loadscope.exc import BadK, TooFewFeatures, TooFewMerges
from loadscope.ingestion import AlignedPanel
from loadscope.util import as_date
from loadscope.util.log import logger
from loadscope.util.typing import DateRange

__all__ = (
    'ClusterResult',
    'SocialFactors',
    'cluster_textual_features',
    'derive_social_factors',
    'extract_centroids',
    'select_k_elbow',
    'standardize_textual',
    'within_cluster_variance',
)

MIN_FEATURES = 3
MIN_MERGES = 4


def within_cluster_variance(heights: Sequence[float]) -> np.ndarray:
    """Total within-cluster sum of squares as a function of cluster count

    A Ward merge at height h increases the total within-cluster sum of
    squares by h**2 / 2.

    Returns:
        array ``w`` of length n + 1 where ``w[k]`` is the total within-cluster
        sum of squares with k clusters; ``w[0]`` is NaN
    """
    heights = np.asarray(heights, dtype=float)
    n = len(heights) + 1
    increments = heights ** 2 / 2
    w = np.full(n + 1, np.nan)
    # k clusters remain after the first n - k merges
    w[n] = 0.0
    w[1:n] = np.cumsum(increments)[::-1]
    return w


def _union_labels(merges: np.ndarray, n: int, k: int) -> np.ndarray:
    """Labels after replaying the first n - k merges"""
    parent = list(range(2 * n - 1))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for step in range(n - k):
        a, b = int(merges[step, 0]), int(merges[step, 1])
        new = n + step
        parent[find(a)] = new
        parent[find(b)] = new
    roots = [find(i) for i in range(n)]
    # number clusters by first appearance in column order
    relabel: Dict[int, int] = {}
    for r in roots:
        relabel.setdefault(r, len(relabel))
    return np.array([relabel[r] for r in roots])


@dataclass(frozen=True, eq=False)
class ClusterResult:
    """Ward merge sequence over named items

    Attributes:
        items: item (textual feature) names, in input column order
        linkage: scipy linkage matrix; row i merges clusters ``linkage[i,0]``
            and ``linkage[i,1]`` at height ``linkage[i,2]``
    """
    items: Tuple[str, ...]
    linkage: np.ndarray

    @property
    def merges(self) -> List[Tuple[int, int, float]]:
        return [(int(a), int(b), float(h))
                for a, b, h in self.linkage[:, :3]]

    @property
    def heights(self) -> np.ndarray:
        return self.linkage[:, 2].copy()

    @property
    def n_items(self) -> int:
        return len(self.items)

    def assignment(self, k: int) -> np.ndarray:
        """Cluster label of every item when cut at exactly k clusters

        Raises:
            BadK: k is not in [1, number of items]
        """
        if not 1 <= k <= self.n_items:
            raise BadK(f'k must be in [1, {self.n_items}], got {k}')
        return _union_labels(self.linkage, self.n_items, k)

    def members(self, k: int) -> Dict[int, List[str]]:
        labels = self.assignment(k)
        result: Dict[int, List[str]] = {}
        for item, label in zip(self.items, labels):
            result.setdefault(int(label), []).append(item)
        return result


@stacklog(logger.info, 'Clustering textual features')
def cluster_textual_features(table: pd.DataFrame) -> ClusterResult:
    """Agglomerative Ward clustering of standardized daily feature series

    Each column is one item, a vector over the table's days; distances are
    Euclidean.

    Raises:
        TooFewFeatures: fewer than three columns
    """
    if table.shape[1] < MIN_FEATURES:
        raise TooFewFeatures(
            f'Need at least {MIN_FEATURES} features, got {table.shape[1]}')
    points = table.to_numpy(dtype=float).T
    Z = linkage(points, method='ward', metric='euclidean')
    # guard against round-off inversions among (near) zero heights
    Z[:, 2] = np.maximum.accumulate(Z[:, 2])
    return ClusterResult(tuple(map(str, table.columns)), Z)


def select_k_elbow(heights: Sequence[float]) -> int:
    """Elbow of total within-cluster variance versus cluster count

    The elbow is the cluster count with the largest second difference of the
    total within-cluster sum of squares; ties go to the smaller count.

    Raises:
        TooFewMerges: fewer than four merges
    """
    heights = np.asarray(heights, dtype=float)
    if len(heights) < MIN_MERGES:
        raise TooFewMerges(
            f'Need at least {MIN_MERGES} merges, got {len(heights)}')
    w = within_cluster_variance(heights)
    n = len(heights) + 1
    ks = np.arange(2, n)
    curvature = w[ks - 1] - 2 * w[ks] + w[ks + 1]
    return int(ks[int(np.argmax(curvature))])


def _medoid(block: np.ndarray) -> int:
    """Index of the row with least summed squared distance to all rows"""
    sq = (block ** 2).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2 * block @ block.T
    return int(np.argmin(np.maximum(d2, 0).sum(axis=1)))


def extract_centroids(result: ClusterResult, k: int, table: pd.DataFrame,
                      source: Optional[pd.DataFrame] = None
                      ) -> List[DailyFeatureSeries]:
    """Medoid series of each of the k clusters

    Args:
        result: clustering of the columns of table
        k: number of clusters
        table: the table that was clustered; medoids are chosen on it
        source: if given, the returned series are the medoid columns of
            source instead of table, e.g. raw values over every day

    Raises:
        BadK: k is not in [1, number of items]
    """
    labels = result.assignment(k)
    points = table.loc[:, list(result.items)].to_numpy(dtype=float).T
    source = table if source is None else source
    centroids = []
    for label in range(k):
        idx = np.flatnonzero(labels == label)
        medoid = result.items[idx[_medoid(points[idx])]]
        name = f'social_{label + 1:02d}_{slugify(medoid, separator="_")}'
        values = source[medoid].astype(float).rename(name)
        centroids.append(DailyFeatureSeries(name, values))
    return centroids


def standardize_textual(textual: pd.DataFrame,
                        train_range: DateRange) -> pd.DataFrame:
    """Training-range textual table, standardized column by column

    Columns constant over the training range carry no information for
    clustering and are dropped.
    """
    start, end = (pd.Timestamp(as_date(d)) for d in train_range)
    train = textual.loc[start:end]
    std = train.std(axis=0, ddof=0)
    keep = std.index[std > 0]
    dropped = len(train.columns) - len(keep)
    if dropped:
        logger.info(f'Dropped {dropped} constant textual features')
    train = train.loc[:, keep]
    return Standardizer.fit(train).apply(train)


class SocialFactors(NamedTuple):
    result: ClusterResult
    k: int
    centroids: List[DailyFeatureSeries]

    def mapping(self) -> Dict[str, List[str]]:
        """Map each centroid name to the textual features of its cluster"""
        members = self.result.members(self.k)
        return {c.name: members[i] for i, c in enumerate(self.centroids)}


def derive_social_factors(panel: AlignedPanel, train_range: DateRange,
                          k: Union[int, str]) -> SocialFactors:
    """Cluster the panel's textual features and take medoids as factors

    Args:
        panel: aligned inputs
        train_range: days whose textual values are clustered
        k: number of factors, or ``'auto'`` for the elbow
    """
    table = standardize_textual(panel.textual, train_range)
    result = cluster_textual_features(table)
    if k == 'auto':
        k = select_k_elbow(result.heights)
        logger.info(f'Elbow selected {k} social factors')
    k = int(k)
    centroids = extract_centroids(result, k, table, source=panel.textual)
    return SocialFactors(result, k, centroids)
