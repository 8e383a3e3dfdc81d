import dataclasses

import numpy as np
import pandas as pd
import pytest

from loadscope.data import (
    DailyFeatureSeries, DesignMatrix, HourlyDemandSeries, HourlySeries,)
from loadscope.exc import (
    ConfigurationError, DataError, InsufficientHistory, Leakage,
    MissingCentroids, NoObservations,)
from loadscope.features.design import (
    BASE_FEATURE_COUNT, LAG_COLUMNS, TEMPERATURE_COLUMNS, VARIANTS,
    FeatureSpec, build_design_matrix, build_feature_rows,
    climatological_temperature, climatology_table, holiday_columns,)
from loadscope.features.social import derive_social_factors
from loadscope.util.testing import assert_array_almost_equal, assert_frame_equal


@pytest.fixture(scope='module')
def centroids(small_panel, small_split):
    return derive_social_factors(small_panel, small_split.train, 3).centroids


def _constant_hourly(value_of, start='2021-01-01', days=400):
    index = pd.date_range(pd.Timestamp(start, tz='UTC'),
                          periods=days * 24, freq='h')
    return HourlySeries('x', pd.Series(
        [value_of(t) for t in index], index=index, dtype=float))


@pytest.mark.parametrize('variant,extra', [
    ('GBM', 0),
    ('GBM-E', 3),
    ('GBM-S', 3),
    ('GBM-ES', 6),
])
def test_column_count(small_panel, small_split, centroids, variant, extra):
    matrix = build_design_matrix(
        small_panel, 'north', 1, VARIANTS[variant], centroids=centroids,
        train_range=small_split.train)
    assert matrix.X.shape[1] == BASE_FEATURE_COUNT + extra
    assert list(matrix.X.columns[:24]) == LAG_COLUMNS


def test_ablation_adds_one_column(small_panel, small_split, centroids):
    spec = FeatureSpec().with_only('econ_gdp')
    matrix = build_design_matrix(small_panel, 'north', 7, spec,
                                 centroids=centroids,
                                 train_range=small_split.train)
    assert matrix.X.shape[1] == BASE_FEATURE_COUNT + 1
    assert matrix.X.columns[-1] == 'econ_gdp'


def test_lags_are_issue_day_profile(small_panel, small_split):
    matrix = build_design_matrix(small_panel, 'south', 7, VARIANTS['GBM'],
                                 train_range=small_split.train)
    profiles = small_panel.demand['south'].profiles()
    day = pd.Timestamp('2021-06-15')
    assert_array_almost_equal(matrix.X.loc[day, LAG_COLUMNS].to_numpy(),
                              profiles.loc[day].to_numpy())
    target = day + pd.Timedelta(days=7)
    assert_array_almost_equal(matrix.Y.loc[day].to_numpy(),
                              profiles.loc[target].to_numpy())


def test_calendar_and_holidays_describe_target_day(small_panel, small_split):
    matrix = build_design_matrix(small_panel, 'north', 1, VARIANTS['GBM'],
                                 train_range=small_split.train)
    columns = {name: column for column, name
               in holiday_columns(small_panel.holiday_classes()).items()}

    # 2022-05-02 is the first Monday of May, a bank holiday
    row = matrix.X.loc[pd.Timestamp('2022-05-01')]
    assert row[columns['bank_holiday']] == 1.0
    assert row[columns['christmas']] == 0.0
    assert row['weekend'] == 0.0

    # 2022-05-07 is a Saturday
    row = matrix.X.loc[pd.Timestamp('2022-05-06')]
    assert row['weekend'] == 1.0
    assert row['dow_sin'] == pytest.approx(np.sin(2 * np.pi * 5 / 7))
    assert row[columns['bank_holiday']] == 0.0


def test_holiday_columns_are_padded():
    columns = holiday_columns(['b', 'a'])
    assert len(columns) == 12
    assert list(columns.values())[:2] == ['a', 'b']
    assert list(columns.values())[2:] == [None] * 10


def test_temperatures_come_from_training_climatology(small_panel,
                                                     small_split):
    matrix = build_design_matrix(small_panel, 'north', 1, VARIANTS['GBM'],
                                 train_range=small_split.train)
    clim = climatology_table(small_panel.temperature['northton'],
                             small_split.train)
    day = pd.Timestamp('2022-03-10')
    assert_array_almost_equal(
        matrix.X.loc[day, TEMPERATURE_COLUMNS].to_numpy(),
        clim.loc[3].to_numpy())


def _perturbed_after(panel, centroids, cutoff):
    """Panel and centroids with every source changed from cutoff on"""
    demand = {}
    for region, series in panel.demand.items():
        values = series.values.copy()
        values[values.index >= cutoff.tz_localize('UTC')] *= 1.5
        demand[region] = HourlyDemandSeries(region, values)
    economics = {}
    for name, series in panel.economics.items():
        values = series.values.copy()
        values[values.index >= cutoff] += 10.0
        economics[name] = DailyFeatureSeries(name, values)
    shifted = []
    for centroid in centroids:
        values = centroid.values.copy()
        values[values.index >= cutoff] -= 3.0
        shifted.append(DailyFeatureSeries(centroid.name, values))
    return (dataclasses.replace(panel, demand=demand, economics=economics),
            shifted)


@pytest.mark.parametrize('window', [1, 5])
def test_no_leakage_from_the_future(small_panel, small_split, centroids,
                                    window):
    cutoff = pd.Timestamp('2022-02-01')
    perturbed, shifted = _perturbed_after(small_panel, centroids, cutoff)
    spec = dataclasses.replace(VARIANTS['GBM-ES'], social_k=3,
                               text_smoothing_window=window)
    before = build_design_matrix(small_panel, 'north', 3, spec,
                                 centroids=centroids,
                                 train_range=small_split.train)
    after = build_design_matrix(perturbed, 'north', 3, spec,
                                centroids=shifted,
                                train_range=small_split.train)
    past = before.days[before.days < cutoff]
    assert_frame_equal(before.X.loc[past], after.X.loc[past])
    future = before.days[before.days >= cutoff]
    assert not before.X.loc[future].equals(after.X.loc[future])
    assert (before.provenance.to_numpy()
            <= before.days.to_numpy()[:, None]).all()


def test_provenance_records_source_dates(small_panel, small_split,
                                         centroids):
    spec = dataclasses.replace(VARIANTS['GBM-ES'], social_k=3,
                               text_smoothing_window=3)
    matrix = build_design_matrix(small_panel, 'north', 1, spec,
                                 centroids=centroids,
                                 train_range=small_split.train)
    row = matrix.provenance.loc[pd.Timestamp('2021-06-15')]
    assert row['demand'] == pd.Timestamp('2021-06-15')
    # indicators are published on the first of the month
    assert row['economics'] == pd.Timestamp('2021-06-01')
    assert row['social'] == pd.Timestamp('2021-06-15')
    assert (matrix.provenance['economics'] < matrix.days).any()


def test_late_provenance_is_leakage(small_panel, small_split):
    matrix = build_design_matrix(small_panel, 'north', 1, VARIANTS['GBM-E'],
                                 train_range=small_split.train)
    provenance = matrix.provenance.copy()
    provenance.iloc[10, 1] = matrix.days[11]
    with pytest.raises(Leakage):
        DesignMatrix(matrix.region, matrix.horizon, matrix.X, matrix.Y,
                     provenance).assert_no_leakage()


def test_smoothing_window_drops_first_days(small_panel, small_split,
                                           centroids):
    spec = FeatureSpec(use_social=True, social_k=3, text_smoothing_window=3)
    matrix = build_design_matrix(small_panel, 'north', 1, spec,
                                 centroids=centroids,
                                 train_range=small_split.train)
    assert matrix.days[0] == pd.Timestamp('2021-01-03')
    name = centroids[0].name
    expected = centroids[0].values.loc['2021-01-03':'2021-01-05'].mean()
    assert matrix.X.loc[pd.Timestamp('2021-01-05'), name] \
        == pytest.approx(expected)


def test_feature_rows_without_targets(small_panel, small_split):
    last = small_panel.days[-1]
    X, _ = build_feature_rows(small_panel, 'north', 30, VARIANTS['GBM'],
                              [last], train_range=small_split.train)
    assert list(X.index) == [last]
    assert X.shape[1] == BASE_FEATURE_COUNT


def test_feature_rows_strict_history(small_panel):
    with pytest.raises(InsufficientHistory) as e:
        build_feature_rows(small_panel, 'north', 1, VARIANTS['GBM'],
                           ['2020-12-31'])
    assert str(e.value.day) == '2020-12-31'


def test_bad_horizon(small_panel):
    with pytest.raises(DataError):
        build_design_matrix(small_panel, 'north', 31, VARIANTS['GBM'])


def test_social_needs_centroids(small_panel):
    with pytest.raises(MissingCentroids):
        build_design_matrix(small_panel, 'north', 1, VARIANTS['GBM-S'])


@pytest.mark.parametrize('kwargs', [
    {'social_k': 1},
    {'social_k': 'many'},
    {'text_smoothing_window': 0},
])
def test_bad_feature_spec(kwargs):
    with pytest.raises(ConfigurationError):
        FeatureSpec(**kwargs)


def test_climatology_of_constant_history():
    table = climatology_table(_constant_hourly(lambda t: 10.0))
    assert (table.to_numpy() == 10.0).all()


def test_climatology_averages_years():
    series = _constant_hourly(lambda t: 0.0 if t.year == 2021 else 4.0)
    table = climatology_table(series)
    assert table.loc[1, 0] == pytest.approx(2.0)


def test_climatology_matches_groupby(small_panel, small_split):
    temperature = small_panel.temperature['southby']
    table = climatology_table(temperature, small_split.train)
    s = temperature.values.loc['2021-01-01':'2021-12-31']
    for month, hour in [(1, 0), (7, 13), (12, 23)]:
        cell = s[(s.index.month == month) & (s.index.hour == hour)]
        assert table.loc[month, hour] == pytest.approx(cell.mean(), abs=1e-9)


def test_climatology_needs_observations(small_panel):
    with pytest.raises(NoObservations) as e:
        climatological_temperature(small_panel, 'northton', 7, 12,
                                   ('2021-01-01', '2021-01-31'))
    assert (e.value.month, e.value.hour) == (7, 12)
