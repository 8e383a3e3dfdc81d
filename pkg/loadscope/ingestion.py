import pathlib
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, NamedTuple, Optional, Set, Tuple

import numpy as np
import pandas as pd
from stacklog import stacklog

from loadscope.data import (
    DailyFeatureSeries, HourlyDemandSeries, HourlySeries,)
from loadscope.exc import DataError, GapTooLarge, SchemaError, UnmappedRegion
from loadscope.util import HOURLY, as_date, date_range
from loadscope.util.io import write_csv
from loadscope.util.log import log_counts, logger
from loadscope.util.typing import DateRange, Pathy

__all__ = (
    'AlignedPanel',
    'InputPaths',
    'load_panel',
    'save_panel',
)

ECONOMIC_INDICATORS = ('gdp', 'inflation', 'unemployment')
MAX_GAP_HOURS = 3
TIMESTAMP_FORMAT = '%Y-%m-%dT%H:%M:%SZ'
DATE_FORMAT = '%Y-%m-%d'
ROUNDTRIP_FLOAT_FORMAT = '%.17g'

SCHEMAS = {
    'demand': ('region', 'timestamp_utc', 'demand_mw'),
    'temperature': ('city', 'timestamp_utc', 'temp_c'),
    'text_features': ('date', 'feature', 'value'),
    'econ': ('date',) + ECONOMIC_INDICATORS,
    'holidays': ('region', 'date', 'name'),
}


class InputPaths(NamedTuple):
    demand: Pathy
    temperature: Pathy
    text_features: Pathy
    econ: Pathy
    holidays: Pathy

    @classmethod
    def in_dir(cls, path: Pathy) -> 'InputPaths':
        """The five input files with their default names inside path"""
        path = pathlib.Path(path)
        return cls(*(path.joinpath(f'{name}.csv') for name in cls._fields))


@dataclass(frozen=True, eq=False)
class AlignedPanel:
    """All inputs of a run, aligned to common hourly and daily grids

    Attributes:
        demand: hourly demand per region
        temperature: hourly 2-meter temperature per city
        region_city: representative city of each region
        textual: raw daily textual features, one column per feature, zero
            on days without news
        economics: forward-filled daily economic indicators
        holidays: table of (region, date, name)
        gap_counts: number of interpolated hours per hourly series
        metadata: free-form facts about the panel's origin
    """
    demand: Dict[str, HourlyDemandSeries]
    temperature: Dict[str, HourlySeries]
    region_city: Dict[str, str]
    textual: pd.DataFrame
    economics: Dict[str, DailyFeatureSeries]
    holidays: pd.DataFrame
    gap_counts: Dict[str, int] = field(default_factory=dict)
    metadata: Dict = field(default_factory=dict)

    @property
    def regions(self) -> List[str]:
        return sorted(self.demand)

    def temperature_for(self, region: str) -> HourlySeries:
        try:
            city = self.region_city[region]
        except KeyError:
            raise UnmappedRegion(region) from None
        return self.temperature[city]

    @property
    def days(self) -> pd.DatetimeIndex:
        """Calendar days fully covered by every hourly series"""
        series = [*self.demand.values(), *self.temperature.values()]
        start = max(s.start.ceil('D') for s in series)
        end = min((s.end + HOURLY).floor('D') for s in series)
        return date_range(start, end - pd.Timedelta(days=1))

    def holiday_classes(self) -> List[str]:
        return sorted(set(self.holidays['name']))

    def holidays_of(self, region: str) -> Dict[pd.Timestamp, Set[str]]:
        """Map each holiday date of region to the names observed that day"""
        rows = self.holidays[self.holidays['region'] == region]
        result: Dict[pd.Timestamp, Set[str]] = {}
        for date, name in zip(rows['date'], rows['name']):
            result.setdefault(pd.Timestamp(date), set()).add(name)
        return result

    def economics_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            name: series.values for name, series in self.economics.items()
        })


def _read_table(path: Pathy, kind: str) -> pd.DataFrame:
    expected = SCHEMAS[kind]
    if not pathlib.Path(path).is_file():
        raise DataError(f'Couldn\'t find {kind} input at {path}')
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False,
                         encoding='utf-8')
    except pd.errors.ParserError as e:
        raise SchemaError(path, None, str(e)) from e
    except pd.errors.EmptyDataError:
        raise SchemaError(path, 1, 'missing header row') from None
    if tuple(c.strip() for c in df.columns) != expected:
        raise SchemaError(
            path, 1, f'expected header {",".join(expected)}')
    df.columns = list(expected)
    return df.apply(lambda col: col.str.strip())


def _line_of(i: int) -> int:
    # header is line 1
    return int(i) + 2


def _parse_timestamps(df: pd.DataFrame, col: str, path) -> pd.Series:
    ts = pd.to_datetime(df[col], utc=True, errors='coerce',
                        format='ISO8601')
    bad = ts.isna().to_numpy()
    if bad.any():
        i = np.flatnonzero(bad)[0]
        raise SchemaError(path, _line_of(i), f'bad timestamp {df[col][i]!r}')
    return ts


def _parse_dates(df: pd.DataFrame, col: str, path) -> pd.Series:
    dates = pd.to_datetime(df[col], errors='coerce', format='%Y-%m-%d')
    bad = dates.isna().to_numpy()
    if bad.any():
        i = np.flatnonzero(bad)[0]
        raise SchemaError(path, _line_of(i), f'bad date {df[col][i]!r}')
    return dates


def _parse_numbers(df: pd.DataFrame, col: str, path,
                   allow_missing: bool = False) -> pd.Series:
    raw = df[col]
    missing = (raw == '').to_numpy()
    values = pd.to_numeric(raw.where(~missing), errors='coerce')
    bad = values.isna().to_numpy() & ~missing
    bad |= np.isinf(values.to_numpy(dtype=float))
    if not allow_missing:
        bad |= missing
    if bad.any():
        i = np.flatnonzero(bad)[0]
        raise SchemaError(path, _line_of(i), f'bad number {raw[i]!r}')
    return values.astype(float)


def _fill_short_gaps(name: str, s: pd.Series,
                     max_gap_hours: int) -> Tuple[pd.Series, int]:
    """Reindex to a uniform hourly grid and interpolate short gaps

    Returns:
        the filled series and the number of interpolated hours

    Raises:
        GapTooLarge: a run of missing hours is longer than max_gap_hours
    """
    full = pd.date_range(s.index[0], s.index[-1], freq=HOURLY)
    s = s.reindex(full)
    missing = s.isna().to_numpy()
    if not missing.any():
        return s, 0
    # run-length encode the missing mask
    edges = np.diff(np.concatenate([[0], missing.astype(int), [0]]))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    for start, end in zip(starts, ends):
        if end - start > max_gap_hours:
            raise GapTooLarge(name, full[start], int(end - start))
    filled = s.interpolate(method='linear', limit_area='inside')
    return filled, int(missing.sum())


def _load_hourly(path, kind: str, key: str, value: str,
                 max_gap_hours: int) -> Tuple[Dict[str, pd.Series],
                                               Dict[str, int]]:
    df = _read_table(path, kind)
    ts = _parse_timestamps(df, 'timestamp_utc', path)
    values = _parse_numbers(df, value, path, allow_missing=True)
    frame = pd.DataFrame({key: df[key], 'ts': ts, 'value': values})
    dup = frame.duplicated(subset=[key, 'ts']).to_numpy()
    if dup.any():
        i = np.flatnonzero(dup)[0]
        raise SchemaError(path, _line_of(i), 'duplicate timestamp')
    result, gaps = {}, {}
    for name, group in frame.groupby(key, sort=True):
        s = group.set_index('ts')['value'].sort_index()
        s.index.name = None
        s.name = name
        if s.dropna().empty:
            raise DataError(f'Series {name!r} in {path} has no values')
        s = s.loc[s.first_valid_index():s.last_valid_index()]
        s, n = _fill_short_gaps(name, s, max_gap_hours)
        result[name] = s
        gaps[name] = n
    return result, gaps


def _load_textual(path, days: pd.DatetimeIndex) -> pd.DataFrame:
    df = _read_table(path, 'text_features')
    dates = _parse_dates(df, 'date', path)
    values = _parse_numbers(df, 'value', path)
    frame = pd.DataFrame({'date': dates, 'feature': df['feature'],
                          'value': values})
    dup = frame.duplicated(subset=['date', 'feature']).to_numpy()
    if dup.any():
        i = np.flatnonzero(dup)[0]
        raise SchemaError(path, _line_of(i), 'duplicate (date, feature)')
    wide = frame.pivot(index='date', columns='feature', values='value')
    wide = wide.reindex(index=days).fillna(0.0)
    wide = wide.reindex(columns=sorted(wide.columns))
    wide.index.name = None
    wide.columns.name = None
    return wide


def _load_economics(path, days: pd.DatetimeIndex
                    ) -> Dict[str, DailyFeatureSeries]:
    df = _read_table(path, 'econ')
    dates = _parse_dates(df, 'date', path)
    frame = pd.DataFrame({
        name: _parse_numbers(df, name, path) for name in ECONOMIC_INDICATORS
    })
    frame.index = pd.DatetimeIndex(dates)
    if frame.index.duplicated().any():
        i = np.flatnonzero(frame.index.duplicated())[0]
        raise SchemaError(path, _line_of(i), 'duplicate date')
    frame = frame.sort_index()
    if frame.empty or frame.index[0] > days[0]:
        raise DataError(
            f'Economic indicators in {path} start after {days[0].date()}')
    # each day carries the most recent published value
    grid = frame.index.union(days)
    daily = frame.reindex(grid).ffill().reindex(days)
    return {
        name: DailyFeatureSeries(name, daily[name].rename(name))
        for name in ECONOMIC_INDICATORS
    }


def _load_holidays(path) -> pd.DataFrame:
    df = _read_table(path, 'holidays')
    dates = _parse_dates(df, 'date', path)
    empty = ((df['region'] == '') | (df['name'] == '')).to_numpy()
    if empty.any():
        i = np.flatnonzero(empty)[0]
        raise SchemaError(path, _line_of(i), 'empty region or name')
    holidays = pd.DataFrame({
        'region': df['region'], 'date': dates, 'name': df['name'],
    })
    return (holidays
            .drop_duplicates()
            .sort_values(['region', 'date', 'name'])
            .reset_index(drop=True))


def _check_span(panel: AlignedPanel, span: DateRange):
    days = panel.days
    start, end = map(pd.Timestamp, map(as_date, span))
    if len(days) == 0 or days[0] > start or days[-1] < end:
        raise DataError(
            f'Hourly inputs do not cover {start.date()}..{end.date()}')


@stacklog(logger.info, 'Loading panel')
def load_panel(paths: InputPaths,
               region_city_map: Mapping[str, str],
               max_gap_hours: int = MAX_GAP_HOURS,
               span: Optional[DateRange] = None) -> AlignedPanel:
    """Load and align the five CSV inputs

    Short gaps in hourly series (up to ``max_gap_hours`` consecutive hours)
    are linearly interpolated and counted. Economic indicators are
    forward-filled to daily frequency. Textual features are pivoted to one
    column per feature and days without news are filled with 0.

    Args:
        paths: locations of the five input files
        region_city_map: representative temperature city of each region
        max_gap_hours: longest run of missing hours that is interpolated
        span: if given, inclusive date range that every series must cover

    Raises:
        SchemaError: a file does not conform to its schema
        GapTooLarge: an hourly series has a run of missing hours longer
            than ``max_gap_hours``
        UnmappedRegion: a demand region has no city in region_city_map
    """
    paths = InputPaths(*paths)
    demand, demand_gaps = _load_hourly(
        paths.demand, 'demand', 'region', 'demand_mw', max_gap_hours)
    temperature, temp_gaps = _load_hourly(
        paths.temperature, 'temperature', 'city', 'temp_c', max_gap_hours)

    region_city = {}
    for region in sorted(demand):
        if region not in region_city_map:
            raise UnmappedRegion(region)
        city = region_city_map[region]
        if city not in temperature:
            raise DataError(
                f'City {city!r} of region {region!r} has no temperature')
        region_city[region] = city
    # only the cities in use take part in alignment
    temperature = {c: temperature[c] for c in sorted(set(region_city.values()))}

    skeleton = AlignedPanel(
        demand={r: HourlyDemandSeries(r, s) for r, s in demand.items()},
        temperature={c: HourlySeries(c, s) for c, s in temperature.items()},
        region_city=region_city,
        textual=pd.DataFrame(),
        economics={},
        holidays=pd.DataFrame(columns=['region', 'date', 'name']),
    )
    days = skeleton.days
    if len(days) == 0:
        raise DataError('Hourly inputs share no fully observed day')

    gap_counts = {**demand_gaps, **{f'temp:{c}': temp_gaps[c]
                                    for c in temperature}}
    log_counts('Interpolated hours', gap_counts)

    panel = AlignedPanel(
        demand=skeleton.demand,
        temperature=skeleton.temperature,
        region_city=region_city,
        textual=_load_textual(paths.text_features, days),
        economics=_load_economics(paths.econ, days),
        holidays=_load_holidays(paths.holidays),
        gap_counts=gap_counts,
        metadata={'source': 'csv'},
    )
    if span is not None:
        _check_span(panel, span)
    logger.info(
        f'Loaded {len(panel.regions)} regions, {len(days)} days, '
        f'{panel.textual.shape[1]} textual features')
    return panel


@stacklog(logger.info, 'Saving panel')
def save_panel(panel: AlignedPanel, output_dir: Pathy) -> InputPaths:
    """Write a panel as the five CSV inputs that :py:func:`load_panel` reads
    """
    paths = InputPaths.in_dir(output_dir)

    def hourly_long(series: Mapping[str, HourlySeries], key, value):
        frames = []
        for name in sorted(series):
            s = series[name].values
            frames.append(pd.DataFrame({
                key: name,
                'timestamp_utc': s.index.strftime(TIMESTAMP_FORMAT),
                value: s.to_numpy(dtype=float),
            }))
        return pd.concat(frames, ignore_index=True)

    write_csv(hourly_long(panel.demand, 'region', 'demand_mw'),
              paths.demand, float_format=ROUNDTRIP_FLOAT_FORMAT)
    write_csv(hourly_long(panel.temperature, 'city', 'temp_c'),
              paths.temperature, float_format=ROUNDTRIP_FLOAT_FORMAT)

    textual = panel.textual.copy()
    textual.index = textual.index.strftime(DATE_FORMAT)
    textual = (textual
               .rename_axis(index='date')
               .reset_index()
               .melt(id_vars='date', var_name='feature',
                     value_name='value'))
    write_csv(textual, paths.text_features,
              float_format=ROUNDTRIP_FLOAT_FORMAT)

    econ = panel.economics_frame()
    econ.index = econ.index.strftime(DATE_FORMAT)
    econ = econ.rename_axis(index='date').reset_index()
    write_csv(econ.loc[:, list(SCHEMAS['econ'])], paths.econ,
              float_format=ROUNDTRIP_FLOAT_FORMAT)

    holidays = panel.holidays.copy()
    holidays['date'] = pd.to_datetime(holidays['date']).dt.strftime(
        DATE_FORMAT)
    write_csv(holidays.loc[:, list(SCHEMAS['holidays'])], paths.holidays)
    return paths

