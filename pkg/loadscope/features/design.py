from dataclasses import dataclass, replace
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from slugify import slugify

from loadscope.data import DailyFeatureSeries, DesignMatrix, HourlySeries
from loadscope.exc import (
    ConfigurationError, DataError, InsufficientHistory, MissingCentroids,
    NoObservations,)
from loadscope.ingestion import ECONOMIC_INDICATORS, AlignedPanel
from loadscope.util import HOURS, as_date, make_plural_suffix, warn
from loadscope.util.log import logger
from loadscope.util.typing import DateRange, Dateish

__all__ = (
    'BASE_FEATURE_COUNT',
    'FeatureSpec',
    'VARIANTS',
    'build_design_matrix',
    'build_feature_rows',
    'climatological_temperature',
    'climatology_table',
    'holiday_columns',
)

MAX_HORIZON = 30
N_HOLIDAY_DUMMIES = 12
BASE_FEATURE_COUNT = 65
DAYS_PER_WEEK = 7
DAYS_PER_YEAR = 365.25

LAG_COLUMNS = [f'lag_{k:02d}' for k in range(HOURS)]
CALENDAR_COLUMNS = ['weekend', 'dow_sin', 'dow_cos', 'doy_sin', 'doy_cos']
TEMPERATURE_COLUMNS = [f'temp_clim_{k:02d}' for k in range(HOURS)]
ECONOMIC_PREFIX = 'econ_'


@dataclass(frozen=True)
class FeatureSpec:
    """Which feature groups a model variant sees

    Attributes:
        use_economics: add the three economic indicators as of issue day
        use_social: add the social factors (textual cluster centroids) as of
            issue day
        social_k: number of social factors, or ``'auto'`` for the elbow of
            the clustering
        text_smoothing_window: trailing rolling-mean window in days applied
            to social factors; 1 means no smoothing
        only: if given, restrict economic and social columns to these names
            (single-feature ablation)
    """
    use_economics: bool = False
    use_social: bool = False
    social_k: Union[int, str] = 10
    text_smoothing_window: int = 1
    only: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        if self.social_k != 'auto':
            if not isinstance(self.social_k, (int, np.integer)) \
                    or self.social_k < 2:
                raise ConfigurationError(
                    f'social_k must be an integer >= 2 or \'auto\', '
                    f'got {self.social_k!r}')
        if int(self.text_smoothing_window) < 1:
            raise ConfigurationError('text_smoothing_window must be >= 1')
        if self.only is not None:
            object.__setattr__(self, 'only', tuple(self.only))

    def with_only(self, *names: str) -> 'FeatureSpec':
        """Base features plus exactly the named economic/social features"""
        return replace(self, use_economics=True, use_social=True,
                       only=tuple(names))

    def keeps(self, name: str) -> bool:
        return self.only is None or name in self.only


VARIANTS: Dict[str, FeatureSpec] = {
    'GBM': FeatureSpec(use_economics=False, use_social=False),
    'GBM-E': FeatureSpec(use_economics=True, use_social=False),
    'GBM-S': FeatureSpec(use_economics=False, use_social=True),
    'GBM-ES': FeatureSpec(use_economics=True, use_social=True),
}


def holiday_columns(classes: Sequence[str]) -> Dict[str, Optional[str]]:
    """Map the 12 holiday dummy columns to the holiday class each encodes

    Classes are used in sorted order; beyond twelve they are dropped and
    missing slots are padded with dummies that are never active.
    """
    classes = sorted(set(classes))
    if len(classes) > N_HOLIDAY_DUMMIES:
        dropped = classes[N_HOLIDAY_DUMMIES:]
        warn(f'Only {N_HOLIDAY_DUMMIES} holiday classes are encoded; '
             f'dropping {dropped}')
        classes = classes[:N_HOLIDAY_DUMMIES]
    result: Dict[str, Optional[str]] = {}
    for name in classes:
        result[f'holiday_{slugify(name, separator="_")}'] = name
    for j in range(N_HOLIDAY_DUMMIES - len(classes)):
        result[f'holiday_pad_{j + 1:02d}'] = None
    return result


def _in_range(index: pd.DatetimeIndex, date_range: Optional[DateRange]):
    if date_range is None:
        return np.ones(len(index), dtype=bool)
    start, end = map(as_date, date_range)
    days = index.tz_convert('UTC').normalize().tz_localize(None) \
        if index.tz is not None else index
    return np.asarray((days >= pd.Timestamp(start))
                      & (days <= pd.Timestamp(end)))


def climatology_table(temperature: HourlySeries,
                      train_range: Optional[DateRange] = None
                      ) -> pd.DataFrame:
    """Mean temperature per (month, hour) over the training range

    Returns:
        frame indexed by month 1..12 with one column per hour 0..23; cells
        without observations are NaN
    """
    s = temperature.values[_in_range(temperature.values.index, train_range)]
    frame = pd.DataFrame({
        'month': s.index.month, 'hour': s.index.hour, 'value': s.to_numpy(),
    })
    table = frame.groupby(['month', 'hour'])['value'].mean().unstack('hour')
    return table.reindex(index=range(1, 13), columns=range(HOURS))


def climatological_temperature(panel: AlignedPanel, city: str, month: int,
                               hour: int,
                               train_range: Optional[DateRange] = None
                               ) -> float:
    """Mean training-range temperature of city at (month, hour)

    Raises:
        NoObservations: the training range has no temperature at
            (month, hour)
    """
    value = climatology_table(panel.temperature[city], train_range).loc[
        month, hour]
    if not np.isfinite(value):
        raise NoObservations(month, hour)
    return float(value)


def _social_frame(centroids: Sequence[DailyFeatureSeries],
                  window: int) -> Tuple[pd.DataFrame, pd.Series]:
    """Trailing rolling means of the centroids and the last day each
    window reads"""
    frame = pd.DataFrame({c.name: c.values for c in centroids})
    read = pd.Series(frame.index, index=frame.index)
    if window > 1:
        frame = frame.rolling(window, min_periods=window).mean()
        read = pd.to_datetime(
            pd.Series(frame.index.asi8, index=frame.index)
            .rolling(window, min_periods=window).max(), unit='ns')
    return frame, read


def _publication_dates(frame: pd.DataFrame) -> pd.Series:
    """Latest day at or before each row on which some column changed

    Forward-filled indicators change only on publication days, so this is
    the publication date of the values carried into each row.
    """
    changed = frame.ne(frame.shift()).any(axis=1).to_numpy()
    published = pd.Series(frame.index.where(changed), index=frame.index)
    return published.ffill()


def build_feature_rows(panel: AlignedPanel, region: str, horizon: int,
                       spec: FeatureSpec,
                       days: Sequence[Dateish],
                       centroids: Sequence[DailyFeatureSeries] = None,
                       train_range: Optional[DateRange] = None,
                       holiday_classes: Sequence[str] = None,
                       strict: bool = True,
                       ) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """Build the feature rows of the given issue days

    Targets are not needed, so issue days whose target day lies beyond the
    panel can be used for forecasting.

    Args:
        panel: aligned inputs
        region: demand region
        horizon: days between issue day and target day, in [1, 30]
        spec: feature groups to include
        days: issue days
        centroids: social factor series, required if ``spec.use_social``
        train_range: range whose temperatures form the climatology;
            defaults to every panel day
        holiday_classes: holiday classes encoded by the 12 dummies;
            defaults to the classes of the panel
        strict: raise on issue days lacking history; otherwise skip them

    Returns:
        features indexed by issue day, and per-row provenance dates of the
        demand, economics and social sources

    Raises:
        InsufficientHistory: strict and an issue day lacks demand, economic
            or social data
        MissingCentroids: social features requested without centroids
    """
    if not 1 <= horizon <= MAX_HORIZON:
        raise DataError(f'Horizon must be in [1, {MAX_HORIZON}], '
                        f'got {horizon}')
    if spec.use_social and not centroids:
        raise MissingCentroids('Social features need centroid series')
    if holiday_classes is None:
        holiday_classes = panel.holiday_classes()

    days = pd.DatetimeIndex([pd.Timestamp(as_date(d)) for d in days])
    profiles = panel.demand[region].profiles()
    social, social_read = (
        _social_frame(centroids, spec.text_smoothing_window)
        if spec.use_social else (None, None))
    economics = panel.economics_frame() if spec.use_economics else None

    available = days.isin(profiles.index)
    if economics is not None:
        available &= days.isin(economics.dropna().index)
    if social is not None:
        available &= days.isin(social.dropna().index)
    if not available.all():
        missing = days[~available]
        if strict:
            raise InsufficientHistory(missing[0].date())
        logger.debug(
            f'Skipping {len(missing)} issue day'
            f'{make_plural_suffix(missing)} without history for '
            f'{region} h={horizon}')
        days = days[available]

    targets = days + pd.Timedelta(days=horizon)

    parts = []
    lags = profiles.reindex(days).to_numpy()
    parts.append(pd.DataFrame(lags, index=days, columns=LAG_COLUMNS))

    dow = targets.dayofweek.to_numpy()
    doy = targets.dayofyear.to_numpy()
    parts.append(pd.DataFrame({
        'weekend': (dow >= 5).astype(float),
        'dow_sin': np.sin(2 * np.pi * dow / DAYS_PER_WEEK),
        'dow_cos': np.cos(2 * np.pi * dow / DAYS_PER_WEEK),
        'doy_sin': np.sin(2 * np.pi * doy / DAYS_PER_YEAR),
        'doy_cos': np.cos(2 * np.pi * doy / DAYS_PER_YEAR),
    }, index=days))

    region_holidays = panel.holidays_of(region)
    dummies = {}
    for column, name in holiday_columns(holiday_classes).items():
        dummies[column] = np.array([
            float(name is not None and name in region_holidays.get(t, ()))
            for t in targets
        ])
    parts.append(pd.DataFrame(dummies, index=days))

    clim = climatology_table(panel.temperature_for(region), train_range)
    clim_rows = clim.reindex(targets.month).to_numpy()
    if not np.isfinite(clim_rows).all():
        i, k = np.argwhere(~np.isfinite(clim_rows))[0]
        raise NoObservations(int(targets.month[i]), int(k))
    parts.append(
        pd.DataFrame(clim_rows, index=days, columns=TEMPERATURE_COLUMNS))

    # lags are the issue-day profile
    provenance = {
        'demand': profiles.index[profiles.index.get_indexer(days)]}
    if economics is not None:
        econ = economics.reindex(days)
        econ.columns = [f'{ECONOMIC_PREFIX}{c}' for c in econ.columns]
        econ = econ.loc[:, [c for c in econ.columns if spec.keeps(c)]]
        parts.append(econ)
        provenance['economics'] = \
            _publication_dates(economics).reindex(days).to_numpy()
    if social is not None:
        soc = social.reindex(days)
        soc = soc.loc[:, [c for c in soc.columns if spec.keeps(c)]]
        parts.append(soc)
        provenance['social'] = social_read.reindex(days).to_numpy()

    X = pd.concat(parts, axis=1)
    X.index.name = 'issue_day'
    provenance = pd.DataFrame(provenance, index=days)
    provenance.index.name = 'issue_day'
    return X, provenance


def build_design_matrix(panel: AlignedPanel, region: str, horizon: int,
                        spec: FeatureSpec,
                        centroids: Sequence[DailyFeatureSeries] = None,
                        train_range: Optional[DateRange] = None,
                        holiday_classes: Sequence[str] = None,
                        ) -> DesignMatrix:
    """Build the design matrix of a region and horizon

    Every panel day whose history is available and whose target day is
    fully observed becomes a row. The columns are 24 demand lags of the
    issue day, a weekend flag, 12 holiday dummies, sine/cosine of the day
    of week and of the day of year, and 24 climatological temperatures, all
    for the target day: 65 in total. Economic indicators (3) and social
    factors (k) as of the issue day are appended when ``spec`` asks for
    them.

    Raises:
        MissingCentroids: social features requested without centroids
    """
    profiles = panel.demand[region].profiles()
    candidates = profiles.index
    has_target = candidates.isin(
        profiles.index - pd.Timedelta(days=horizon))
    X, provenance = build_feature_rows(
        panel, region, horizon, spec, candidates[has_target],
        centroids=centroids, train_range=train_range,
        holiday_classes=holiday_classes, strict=False)
    Y = profiles.reindex(X.index + pd.Timedelta(days=horizon))
    Y.index = X.index
    Y.columns = list(range(HOURS))
    Y.columns.name = None
    matrix = DesignMatrix(region, horizon, X, Y, provenance)
    matrix.assert_no_leakage()
    logger.debug(f'Built design matrix for {region} h={horizon}: '
                 f'{len(X)} rows, {X.shape[1]} columns')
    return matrix

