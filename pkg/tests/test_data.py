import datetime

import numpy as np
import pandas as pd
import pytest

from loadscope.data import (
    DailyFeatureSeries, DesignMatrix, HourlyDemandSeries, HourlySeries,
    ProbForecastSet, SplitSpec, Standardizer, split_by_dates,)
from loadscope.exc import (
    ColumnMismatch, ConstantColumn, DataError, EmptyPartition, Leakage,
    Misaligned, NonFinite, NonPositiveSigma,)
from loadscope.util.testing import assert_array_almost_equal


def _hourly(values, start='2021-01-01'):
    index = pd.date_range(pd.Timestamp(start, tz='UTC'), periods=len(values),
                          freq='h')
    return pd.Series(np.asarray(values, dtype=float), index=index)


def _matrix(n=10, horizon=1):
    days = pd.date_range('2021-01-01', periods=n, freq='D')
    X = pd.DataFrame({'a': np.arange(n, dtype=float),
                      'b': np.arange(n, dtype=float) ** 2}, index=days)
    Y = pd.DataFrame(np.ones((n, 24)), index=days)
    return DesignMatrix('north', horizon, X, Y)


def test_hourly_series_rejects_naive_index():
    s = pd.Series([1.0, 2.0],
                  index=pd.date_range('2021-01-01', periods=2, freq='h'))
    with pytest.raises(Misaligned):
        HourlySeries('x', s)


def test_hourly_series_rejects_irregular_step():
    s = _hourly([1.0, 2.0, 3.0])
    s.index = s.index[:2].append(
        pd.DatetimeIndex([s.index[1] + pd.Timedelta(hours=2)]))
    with pytest.raises(Misaligned):
        HourlySeries('x', s)


def test_hourly_series_rejects_nan():
    with pytest.raises(NonFinite) as e:
        HourlySeries('x', _hourly([1.0, np.nan, 3.0]))
    assert e.value.row == 1


def test_demand_must_be_positive():
    with pytest.raises(DataError):
        HourlyDemandSeries('north', _hourly([1.0, 0.0, 3.0]))


def test_profiles_drop_partial_days():
    s = HourlySeries('x', _hourly(np.arange(36)))
    profiles = s.profiles()
    assert profiles.shape == (1, 24)
    assert_array_almost_equal(profiles.iloc[0].to_numpy(), np.arange(24))


def test_daily_feature_series_as_of():
    values = pd.Series([1.0, 2.0, 3.0],
                       index=pd.date_range('2021-01-01', periods=3))
    f = DailyFeatureSeries('gdp', values)
    assert f.as_of('2021-01-02') == 2.0


def test_daily_feature_series_rejects_gaps():
    values = pd.Series([1.0, 2.0],
                       index=pd.DatetimeIndex(['2021-01-01', '2021-01-03']))
    with pytest.raises(Misaligned):
        DailyFeatureSeries('gdp', values)


def test_split_spec_requires_order():
    with pytest.raises(DataError):
        SplitSpec(train=('2021-01-01', '2021-01-10'),
                  val=('2021-01-05', '2021-01-12'),
                  test=('2021-01-13', '2021-01-20'))


def test_split_spec_which():
    spec = SplitSpec(train=('2021-01-01', '2021-01-10'),
                     val=('2021-01-11', '2021-01-12'),
                     test=('2021-01-13', '2021-01-20'))
    assert spec.which('2021-01-11') == 'val'
    assert spec.which('2021-02-01') is None
    assert spec.start == datetime.date(2021, 1, 1)
    assert SplitSpec.from_dict(spec.to_dict()) == spec


def test_standardizer_rejects_constant_column():
    df = pd.DataFrame({'a': [1.0, 2.0, 3.0], 'b': [5.0, 5.0, 5.0]})
    with pytest.raises(ConstantColumn) as e:
        Standardizer.fit(df)
    assert e.value.name == 'b'


def test_standardizer_binds_columns_by_name():
    df = pd.DataFrame({'a': [1.0, 2.0, 3.0], 'b': [2.0, 4.0, 9.0]})
    s = Standardizer.fit(df)
    reordered = s.apply(df.loc[:, ['b', 'a']])
    assert_array_almost_equal(reordered['a'].to_numpy(),
                              (df['a'] - 2.0) / np.std([1.0, 2.0, 3.0]))
    assert_array_almost_equal(s.inverse(s.apply(df)).to_numpy(),
                              df.to_numpy())


def test_standardizer_column_mismatch():
    df = pd.DataFrame({'a': [1.0, 2.0, 3.0], 'b': [2.0, 4.0, 9.0]})
    s = Standardizer.fit(df)
    with pytest.raises(ColumnMismatch):
        s.apply(df.rename(columns={'b': 'c'}))


def test_split_by_dates_counts_dropped_rows():
    matrix = _matrix(12)
    spec = SplitSpec(train=('2021-01-01', '2021-01-05'),
                     val=('2021-01-06', '2021-01-07'),
                     test=('2021-01-08', '2021-01-10'))
    result = split_by_dates(matrix, spec)
    assert (len(result.train), len(result.val), len(result.test)) \
        == (5, 2, 3)
    assert result.n_dropped == 2


def test_split_by_dates_empty_partition():
    matrix = _matrix(5)
    spec = SplitSpec(train=('2021-01-01', '2021-01-03'),
                     val=('2021-01-04', '2021-01-05'),
                     test=('2021-02-01', '2021-02-05'))
    with pytest.raises(EmptyPartition) as e:
        split_by_dates(matrix, spec)
    assert e.value.which == 'test'


def test_design_matrix_leakage_guard():
    matrix = _matrix(3)
    late = pd.DataFrame(
        {'social': matrix.days + pd.Timedelta(days=1)}, index=matrix.days)
    leaky = DesignMatrix('north', 1, matrix.X, matrix.Y, late)
    with pytest.raises(Leakage):
        leaky.assert_no_leakage()

    fine = DesignMatrix('north', 1, matrix.X, matrix.Y,
                        pd.DataFrame({'social': matrix.days},
                                     index=matrix.days))
    fine.assert_no_leakage()


def test_design_matrix_target_days():
    matrix = _matrix(3, horizon=7)
    assert matrix.target_days[0] == pd.Timestamp('2021-01-08')


def test_prob_forecast_set_requires_positive_sigma():
    index = pd.date_range('2021-01-01', periods=2)
    with pytest.raises(NonPositiveSigma):
        ProbForecastSet.from_arrays(np.ones((2, 24)), np.zeros((2, 24)),
                                    index)
