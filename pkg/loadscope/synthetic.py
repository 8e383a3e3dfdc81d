"""Synthetic panels with planted structure

The generated demand of region r at hour k of day t is::

    base_r + daily shape(k) + weekend drop(t) + heating(T_rk(t))
        - holiday dip(t, k) + beta * driver(t - lag) + noise

where ``driver`` is an AR(1) series that also appears, with redundant noisy
copies, in the textual feature table. A second latent ``decoy`` series with
its own copies has no effect on demand, and independent noise columns fill
out the table.
"""

import datetime
from dataclasses import asdict, dataclass
from typing import Dict, List, Tuple

import numpy as np
import pandas as pd
from stacklog import stacklog

from loadscope.data import DailyFeatureSeries, HourlyDemandSeries, HourlySeries
from loadscope.exc import InvalidSpec
from loadscope.ingestion import ECONOMIC_INDICATORS, AlignedPanel
from loadscope.util import HOURLY, HOURS, as_date, date_range
from loadscope.util.log import logger

__all__ = (
    'SyntheticSpec',
    'generate_synthetic_panel',
    'synthetic_holidays',
)

MIN_DAYS = 120
DAYTIME_HOURS = range(7, 21)
HEATING_BASE_C = 15.0


@dataclass(frozen=True)
class SyntheticSpec:
    """Planted-structure parameters of a synthetic panel

    Attributes:
        start: first calendar day
        regions: region names; region i is served by city ``cities[i]``
        cities: temperature city of each region
        base_mw: mean demand of the first region; region i gets
            ``base_mw * (1 + 0.5 i)``
        daily_amp_mw: amplitude of the intraday shape
        weekend_drop_mw: demand reduction on Saturdays and Sundays
        temp_coef_mw: MW per degree below the heating base temperature
        holiday_dip_mw: daytime demand reduction on holidays
        beta_mw: effect of one unit of the textual driver on demand
        lag_days: days between the driver value and its demand effect
        driver_phi: AR(1) coefficient of the driver (and decoy) latent
        noise_mw: standard deviation of the hourly demand noise
        n_driver_copies: noisy copies of the driver in the textual table
        n_decoy_copies: noisy copies of the decoy in the textual table
        n_noise: pure-noise textual columns
        copy_noise: noise standard deviation of the copies, relative to
            the latent's
    """
    start: datetime.date = datetime.date(2021, 1, 1)
    regions: Tuple[str, ...] = ('north', 'south')
    cities: Tuple[str, ...] = ('northton', 'southby')
    base_mw: float = 1000.0
    daily_amp_mw: float = 150.0
    weekend_drop_mw: float = 60.0
    temp_coef_mw: float = 12.0
    holiday_dip_mw: float = 150.0
    beta_mw: float = 50.0
    lag_days: int = 1
    driver_phi: float = 0.5
    noise_mw: float = 20.0
    n_driver_copies: int = 4
    n_decoy_copies: int = 4
    n_noise: int = 4
    copy_noise: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, 'start', as_date(self.start))
        object.__setattr__(self, 'regions', tuple(self.regions))
        object.__setattr__(self, 'cities', tuple(self.cities))
        if not self.regions or len(self.regions) != len(self.cities):
            raise InvalidSpec('Need one city for each of at least one region')
        if len(set(self.cities)) != len(self.cities):
            raise InvalidSpec('Cities must be distinct')
        if self.lag_days < 0:
            raise InvalidSpec('lag_days must be non-negative')
        if not -1 < self.driver_phi < 1:
            raise InvalidSpec('driver_phi must lie in (-1, 1)')
        if min(self.noise_mw, self.copy_noise) < 0:
            raise InvalidSpec('Noise levels must be non-negative')
        if self.n_driver_copies < 0 or self.n_decoy_copies < 0 \
                or self.n_noise < 0:
            raise InvalidSpec('Column counts must be non-negative')
        if self.base_mw <= 0:
            raise InvalidSpec('base_mw must be positive')

    @property
    def region_city(self) -> Dict[str, str]:
        return dict(zip(self.regions, self.cities))

    def to_dict(self) -> Dict:
        d = asdict(self)
        d['start'] = str(self.start)
        d['regions'] = list(self.regions)
        d['cities'] = list(self.cities)
        return d


def _first_monday(year: int, month: int) -> datetime.date:
    d = datetime.date(year, month, 1)
    return d + datetime.timedelta(days=(7 - d.weekday()) % 7)


def synthetic_holidays(start: datetime.date,
                       end: datetime.date) -> List[Tuple[datetime.date, str]]:
    """Holidays between start and end inclusive, sorted by date and name"""
    result = []
    for year in range(start.year, end.year + 1):
        result.append((datetime.date(year, 1, 1), 'new_year'))
        result.append((datetime.date(year, 12, 25), 'christmas'))
        result.append((datetime.date(year, 12, 26), 'boxing_day'))
        for month in (2, 5, 8, 11):
            result.append((_first_monday(year, month), 'bank_holiday'))
    return sorted((d, n) for d, n in result if start <= d <= end)


def _ar1(rng: np.random.Generator, n: int, phi: float,
         sd: float = 1.0) -> np.ndarray:
    """Stationary AR(1) with marginal standard deviation sd"""
    eps = rng.normal(0.0, sd * np.sqrt(1 - phi ** 2), size=n)
    x = np.empty(n)
    x[0] = rng.normal(0.0, sd)
    for i in range(1, n):
        x[i] = phi * x[i - 1] + eps[i]
    return x


def _copies(rng, latent: np.ndarray, prefix: str, n: int,
            noise: float) -> Dict[str, np.ndarray]:
    result = {prefix: latent}
    for j in range(1, n + 1):
        scale = rng.uniform(0.5, 2.0)
        offset = rng.uniform(0.0, 3.0)
        result[f'{prefix}_copy_{j}'] = offset + scale * (
            latent + rng.normal(0.0, noise, size=latent.shape))
    return result


def _temperature(rng, days: pd.DatetimeIndex, offset: float) -> np.ndarray:
    """Day x hour temperatures in degrees C"""
    doy = days.dayofyear.to_numpy()
    seasonal = 11.0 + offset - 7.0 * np.cos(2 * np.pi * (doy - 15) / 365.25)
    anomaly = _ar1(rng, len(days), 0.7, sd=2.0)
    hours = np.arange(HOURS)
    diurnal = -3.0 * np.cos(2 * np.pi * (hours - 3) / HOURS)
    jitter = rng.normal(0.0, 0.5, size=(len(days), HOURS))
    return (seasonal + anomaly)[:, None] + diurnal[None, :] + jitter


def _economics(rng, days: pd.DatetimeIndex) -> pd.DataFrame:
    """Economic indicators forward-filled from their publication dates"""
    month_starts = days[days.day == 1]
    quarter_starts = month_starts[month_starts.month.isin([1, 4, 7, 10])]
    months = month_starts.union(days[:1])
    quarters = quarter_starts.union(days[:1])
    gdp = pd.Series(
        100.0 + np.cumsum(rng.normal(0.5, 0.8, size=len(quarters))),
        index=quarters)
    inflation = pd.Series(
        2.0 + _ar1(rng, len(months), 0.8, sd=0.5), index=months)
    unemployment = pd.Series(
        4.0 + np.cumsum(rng.normal(0.0, 0.05, size=len(months))),
        index=months)
    published = pd.DataFrame({
        'gdp': gdp, 'inflation': inflation, 'unemployment': unemployment,
    })
    return published.ffill().reindex(days, method='ffill')


@stacklog(logger.info, 'Generating synthetic panel')
def generate_synthetic_panel(seed: int, days: int,
                             spec: SyntheticSpec = None) -> AlignedPanel:
    """Generate a panel with a planted textual demand driver

    The result is a pure function of (seed, days, spec). The spec and the
    names of the planted columns are recorded in the panel's metadata.

    Args:
        seed: seed of the random generator
        days: number of calendar days, at least 120
        spec: planted-structure parameters; defaults to ``SyntheticSpec()``

    Raises:
        InvalidSpec: days < 120 or ``spec`` is inconsistent
    """
    if spec is None:
        spec = SyntheticSpec()
    if days < MIN_DAYS:
        raise InvalidSpec(f'Need at least {MIN_DAYS} days, got {days}')

    rng = np.random.default_rng(seed)
    day_index = date_range(
        spec.start, spec.start + datetime.timedelta(days=days - 1))
    end = day_index[-1].date()

    # latents carry lag_days of burn-in before the first day
    driver_full = _ar1(rng, days + spec.lag_days, spec.driver_phi)
    driver = driver_full[spec.lag_days:]
    driver_lagged = driver_full[:days]
    decoy = _ar1(rng, days, spec.driver_phi)
    textual = {
        **_copies(rng, driver, 'driver', spec.n_driver_copies,
                  spec.copy_noise),
        **_copies(rng, decoy, 'decoy', spec.n_decoy_copies,
                  spec.copy_noise),
    }
    for j in range(1, spec.n_noise + 1):
        textual[f'noise_{j}'] = rng.normal(0.0, 1.0, size=days)
    textual = pd.DataFrame(textual, index=day_index)
    textual = textual.reindex(columns=sorted(textual.columns))

    holiday_list = synthetic_holidays(spec.start, end)
    is_holiday = day_index.isin(pd.DatetimeIndex([d for d, _ in holiday_list]))
    weekend = day_index.dayofweek.to_numpy() >= 5
    hours = np.arange(HOURS)
    daily_shape = spec.daily_amp_mw * np.sin(2 * np.pi * (hours - 6) / HOURS)
    daytime = np.isin(hours, DAYTIME_HOURS)

    timestamps = pd.date_range(
        pd.Timestamp(spec.start, tz='UTC'), periods=days * HOURS,
        freq=HOURLY)
    demand, temperature = {}, {}
    for i, (region, city) in enumerate(zip(spec.regions, spec.cities)):
        temp = _temperature(rng, day_index, offset=-1.5 * i)
        heating = spec.temp_coef_mw * np.maximum(HEATING_BASE_C - temp, 0.0)
        load = (spec.base_mw * (1 + 0.5 * i)
                + daily_shape[None, :]
                - spec.weekend_drop_mw * weekend[:, None]
                + heating
                - spec.holiday_dip_mw * np.outer(is_holiday, daytime)
                + spec.beta_mw * driver_lagged[:, None]
                + rng.normal(0.0, spec.noise_mw, size=(days, HOURS)))
        demand[region] = HourlyDemandSeries(
            region, pd.Series(load.ravel(), index=timestamps, name=region))
        temperature[city] = HourlySeries(
            city, pd.Series(temp.ravel(), index=timestamps, name=city))

    econ = _economics(rng, day_index)
    economics = {
        name: DailyFeatureSeries(name, econ[name].rename(name))
        for name in ECONOMIC_INDICATORS
    }

    holidays = pd.DataFrame(
        [(region, pd.Timestamp(d), name)
         for region in spec.regions for d, name in holiday_list],
        columns=['region', 'date', 'name'])
    holidays = (holidays
                .sort_values(['region', 'date', 'name'])
                .reset_index(drop=True))

    return AlignedPanel(
        demand=demand,
        temperature=temperature,
        region_city=spec.region_city,
        textual=textual,
        economics=economics,
        holidays=holidays,
        gap_counts={},
        metadata={
            'source': 'synthetic',
            'seed': int(seed),
            'days': int(days),
            'spec': spec.to_dict(),
            'planted': {
                'driver': 'driver',
                'decoy': 'decoy',
                'groups': {
                    'driver': [c for c in textual.columns
                               if c.startswith('driver')],
                    'decoy': [c for c in textual.columns
                              if c.startswith('decoy')],
                },
            },
        },
    )
