import datetime
from dataclasses import dataclass, field
from typing import Dict, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from loadscope.exc import (
    ColumnMismatch, ConstantColumn, DataError, EmptyPartition, Leakage,
    Misaligned, NonFinite, NonPositiveSigma,)
from loadscope.util import HOURLY, HOURS, as_date, daily_profiles
from loadscope.util.log import logger
from loadscope.util.typing import DateRange, Dateish

__all__ = (
    'DailyFeatureSeries',
    'DesignMatrix',
    'HourlyDemandSeries',
    'HourlySeries',
    'PointForecastSet',
    'ProbForecastSet',
    'SplitResult',
    'SplitSpec',
    'Standardizer',
    'split_by_dates',
)

HOUR_COLUMNS = list(range(HOURS))
CONSTANT_TOL = 1e-12


def _check_hourly_index(name: str, index: pd.Index):
    if not isinstance(index, pd.DatetimeIndex) or index.tz is None:
        raise Misaligned(f'Series {name!r} must be indexed by UTC timestamps')
    if len(index) > 1:
        steps = index[1:] - index[:-1]
        if not (steps == pd.Timedelta(HOURLY)).all():
            raise Misaligned(
                f'Series {name!r} is not strictly increasing with a '
                f'uniform 1-hour step')


@dataclass(frozen=True, eq=False)
class HourlySeries:
    """A named hourly series on a uniform UTC grid

    Attributes:
        name: region or city the series belongs to
        values: float series indexed by UTC timestamps
    """
    name: str
    values: pd.Series

    def __post_init__(self):
        _check_hourly_index(self.name, self.values.index)
        arr = self.values.to_numpy(dtype=float)
        bad = ~np.isfinite(arr)
        if bad.any():
            raise NonFinite(self.name, int(np.flatnonzero(bad)[0]))

    @property
    def timestamps(self) -> pd.DatetimeIndex:
        return self.values.index

    @property
    def start(self) -> pd.Timestamp:
        return self.values.index[0]

    @property
    def end(self) -> pd.Timestamp:
        return self.values.index[-1]

    def profiles(self) -> pd.DataFrame:
        """Day x hour table of the fully observed days"""
        return daily_profiles(self.values)


@dataclass(frozen=True, eq=False)
class HourlyDemandSeries(HourlySeries):
    """Hourly demand of a region in MW; all values are positive"""

    def __post_init__(self):
        super().__post_init__()
        arr = self.values.to_numpy(dtype=float)
        nonpos = arr <= 0
        if nonpos.any():
            row = int(np.flatnonzero(nonpos)[0])
            raise DataError(
                f'Demand of {self.name!r} is not positive at row {row}')

    @property
    def region(self) -> str:
        return self.name


@dataclass(frozen=True, eq=False)
class DailyFeatureSeries:
    """A named daily real series (an economic indicator or social factor)"""
    name: str
    values: pd.Series

    def __post_init__(self):
        index = self.values.index
        if not isinstance(index, pd.DatetimeIndex) or index.tz is not None:
            raise Misaligned(
                f'Series {self.name!r} must be indexed by calendar dates')
        if len(index) > 1:
            steps = index[1:] - index[:-1]
            if not (steps == pd.Timedelta(days=1)).all():
                raise Misaligned(
                    f'Series {self.name!r} does not have a daily step')
        arr = self.values.to_numpy(dtype=float)
        bad = ~np.isfinite(arr)
        if bad.any():
            raise NonFinite(self.name, int(np.flatnonzero(bad)[0]))

    def as_of(self, day: Dateish) -> float:
        return float(self.values.loc[pd.Timestamp(as_date(day))])


@dataclass(frozen=True)
class SplitSpec:
    """Inclusive, disjoint and ordered train/validation/test date ranges"""
    train: DateRange
    val: DateRange
    test: DateRange

    def __post_init__(self):
        ranges = []
        for which in ('train', 'val', 'test'):
            start, end = getattr(self, which)
            start, end = as_date(start), as_date(end)
            if start > end:
                raise DataError(f'Range {which!r} ends before it starts')
            object.__setattr__(self, which, (start, end))
            ranges.append((start, end))
        for (_, end), (start, _) in zip(ranges[:-1], ranges[1:]):
            if not end < start:
                raise DataError(
                    'Split ranges must be disjoint and ordered '
                    'train < val < test')

    @classmethod
    def from_dict(cls, d: Dict) -> 'SplitSpec':
        return cls(**{
            which: (d[which]['start'], d[which]['end'])
            for which in ('train', 'val', 'test')
        })

    def to_dict(self) -> Dict:
        return {
            which: {'start': str(start), 'end': str(end)}
            for which, (start, end) in self.ranges.items()
        }

    @property
    def ranges(self) -> Dict[str, DateRange]:
        return {'train': self.train, 'val': self.val, 'test': self.test}

    @property
    def start(self) -> datetime.date:
        return self.train[0]

    @property
    def end(self) -> datetime.date:
        return self.test[1]

    def which(self, day: Dateish) -> Optional[str]:
        """Name of the range containing day, or None"""
        day = as_date(day)
        for which, (start, end) in self.ranges.items():
            if start <= day <= end:
                return which
        return None


@dataclass(frozen=True, eq=False)
class Standardizer:
    """Per-column means and population standard deviations

    Fitted on training rows only and applied to every partition. Columns are
    bound by name, so applying to a frame with the same columns in a
    different order is allowed.
    """
    columns: Tuple[str, ...]
    means: np.ndarray
    stds: np.ndarray

    @classmethod
    def fit(cls, matrix: pd.DataFrame) -> 'Standardizer':
        """Fit a Standardizer to a table of named real columns

        Raises:
            DataError: fewer than two rows
            NonFinite: a column holds NaN or inf
            ConstantColumn: a column has zero variance
        """
        if len(matrix) < 2:
            raise DataError('Need at least 2 rows to fit a Standardizer')
        arr = matrix.to_numpy(dtype=float)
        for j, name in enumerate(matrix.columns):
            bad = ~np.isfinite(arr[:, j])
            if bad.any():
                raise NonFinite(name, int(np.flatnonzero(bad)[0]))
        means = arr.mean(axis=0)
        stds = arr.std(axis=0, ddof=0)
        for j, name in enumerate(matrix.columns):
            if not stds[j] > CONSTANT_TOL * max(1.0, abs(means[j])):
                raise ConstantColumn(name)
        return cls(tuple(matrix.columns), means, stds)

    def _align(self, matrix: pd.DataFrame) -> np.ndarray:
        if set(matrix.columns) != set(self.columns) \
                or len(matrix.columns) != len(self.columns):
            missing = sorted(map(str, set(self.columns) - set(matrix.columns)))
            extra = sorted(map(str, set(matrix.columns) - set(self.columns)))
            raise ColumnMismatch(
                f'Columns do not match: missing {missing}, extra {extra}')
        return matrix.loc[:, list(self.columns)].to_numpy(dtype=float)

    def apply(self, matrix: pd.DataFrame) -> pd.DataFrame:
        arr = self._align(matrix)
        return pd.DataFrame((arr - self.means) / self.stds,
                            index=matrix.index, columns=list(self.columns))

    def inverse(self, matrix: pd.DataFrame) -> pd.DataFrame:
        arr = self._align(matrix)
        return pd.DataFrame(arr * self.stds + self.means,
                            index=matrix.index, columns=list(self.columns))

    def to_dict(self) -> Dict:
        return {
            'columns': list(self.columns),
            'means': [float(m) for m in self.means],
            'stds': [float(s) for s in self.stds],
        }

    @classmethod
    def from_dict(cls, d: Dict) -> 'Standardizer':
        return cls(tuple(d['columns']),
                   np.asarray(d['means'], dtype=float),
                   np.asarray(d['stds'], dtype=float))


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """Feature table with 24 hourly targets per issue day

    Attributes:
        region: region the rows describe
        horizon: days between issue day and target day
        X: features indexed by issue day
        Y: demand in MW of the 24 hours of the target day, same index as X
        provenance: per row and source, the latest source date read while
            building the row; used by :py:meth:`assert_no_leakage`
    """
    region: str
    horizon: int
    X: pd.DataFrame
    Y: pd.DataFrame
    provenance: pd.DataFrame = field(default=None)

    def __post_init__(self):
        if not self.X.index.equals(self.Y.index):
            raise Misaligned('Features and targets have different rows')
        if list(self.Y.columns) != HOUR_COLUMNS:
            raise Misaligned('Targets must have one column per hour 0..23')
        if self.provenance is not None \
                and not self.provenance.index.equals(self.X.index):
            raise Misaligned('Provenance and features have different rows')

    @property
    def days(self) -> pd.DatetimeIndex:
        return self.X.index

    @property
    def target_days(self) -> pd.DatetimeIndex:
        return self.X.index + pd.Timedelta(days=self.horizon)

    @property
    def feature_names(self) -> Sequence[str]:
        return list(self.X.columns)

    def __len__(self) -> int:
        return len(self.X)

    def take(self, mask) -> 'DesignMatrix':
        mask = np.asarray(mask, dtype=bool)
        provenance = (self.provenance[mask]
                      if self.provenance is not None else None)
        return DesignMatrix(self.region, self.horizon,
                            self.X[mask], self.Y[mask], provenance)

    def assert_no_leakage(self):
        """Check that no row reads source data dated after its issue day

        Raises:
            Leakage: some row's provenance is later than its issue day
        """
        if self.provenance is None:
            return
        for source in self.provenance.columns:
            dates = pd.to_datetime(self.provenance[source])
            late = (dates > self.X.index).to_numpy()
            if late.any():
                i = int(np.flatnonzero(late)[0])
                raise Leakage(self.X.index[i].date(), source,
                              dates.iloc[i].date())


class SplitResult(NamedTuple):
    train: DesignMatrix
    val: DesignMatrix
    test: DesignMatrix
    n_dropped: int


def split_by_dates(matrix: DesignMatrix, spec: SplitSpec) -> SplitResult:
    """Partition design matrix rows by issue-date membership

    Rows whose issue day lies outside all three ranges are dropped and
    counted.

    Raises:
        EmptyPartition: some range receives no rows
    """
    days = matrix.days
    parts = {}
    covered = np.zeros(len(days), dtype=bool)
    for which, (start, end) in spec.ranges.items():
        mask = np.asarray((days >= pd.Timestamp(start))
                          & (days <= pd.Timestamp(end)))
        if not mask.any():
            raise EmptyPartition(which)
        parts[which] = matrix.take(mask)
        covered |= mask
    n_dropped = int((~covered).sum())
    if n_dropped:
        logger.debug(
            f'Dropped {n_dropped} rows of {matrix.region} h={matrix.horizon} '
            f'outside the split ranges')
    return SplitResult(parts['train'], parts['val'], parts['test'], n_dropped)


def _hour_frame(values, index) -> pd.DataFrame:
    df = pd.DataFrame(np.asarray(values, dtype=float), index=index)
    df.columns = HOUR_COLUMNS
    return df


@dataclass(frozen=True, eq=False)
class PointForecastSet:
    """Point forecasts in MW, one row per target day, one column per hour"""
    values: pd.DataFrame

    def __post_init__(self):
        if list(self.values.columns) != HOUR_COLUMNS:
            raise Misaligned('Forecasts must have one column per hour 0..23')


@dataclass(frozen=True, eq=False)
class ProbForecastSet:
    """Gaussian forecasts: mean and standard deviation in MW per (day, hour)
    """
    mu: pd.DataFrame
    sigma: pd.DataFrame

    def __post_init__(self):
        if not (self.mu.index.equals(self.sigma.index)
                and list(self.mu.columns) == HOUR_COLUMNS
                and list(self.sigma.columns) == HOUR_COLUMNS):
            raise Misaligned('mu and sigma must share days and hours')
        if not (self.sigma.to_numpy() > 0).all():
            raise NonPositiveSigma('sigma must be positive everywhere')

    @classmethod
    def from_arrays(cls, mu, sigma, index) -> 'ProbForecastSet':
        return cls(_hour_frame(mu, index), _hour_frame(sigma, index))

    @property
    def point(self) -> PointForecastSet:
        return PointForecastSet(self.mu)
