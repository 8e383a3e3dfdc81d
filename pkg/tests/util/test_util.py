import datetime

import numpy as np
import pandas as pd
import pytest

from loadscope.exc import LoadscopeWarning
from loadscope.util import (
    as_date, daily_profiles, date_range, make_plural_suffix, warn,)


@pytest.mark.parametrize('value', [
    '2022-03-01',
    datetime.date(2022, 3, 1),
    datetime.datetime(2022, 3, 1, 17, 5),
    pd.Timestamp('2022-03-01 23:00'),
])
def test_as_date(value):
    assert as_date(value) == datetime.date(2022, 3, 1)


def test_date_range_is_inclusive():
    days = date_range('2022-02-27', datetime.date(2022, 3, 1))
    assert list(days.strftime('%m-%d')) == ['02-27', '02-28', '03-01']


def test_make_plural_suffix():
    assert make_plural_suffix([1]) == ''
    assert make_plural_suffix([]) == 's'
    assert make_plural_suffix([1, 2], suffix='es') == 'es'


def test_warn():
    with pytest.warns(LoadscopeWarning, match='careful'):
        warn('careful')


def test_daily_profiles_drops_partial_days():
    index = pd.date_range('2022-01-01', periods=24 * 3, freq=pd.offsets.Hour(), tz='UTC')
    values = pd.Series(np.arange(72.0), index=index)
    values.iloc[30] = np.nan
    wide = daily_profiles(values)
    assert list(wide.index) == [pd.Timestamp('2022-01-01'),
                                pd.Timestamp('2022-01-03')]
    assert list(wide.columns) == list(range(24))
    assert wide.loc['2022-01-03', 5] == 53.0
