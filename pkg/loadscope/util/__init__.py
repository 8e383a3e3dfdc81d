import datetime
import warnings
from typing import Sized

import pandas as pd

from loadscope.exc import LoadscopeWarning
from loadscope.util.typing import Dateish

HOURS = 24
HOURLY = pd.offsets.Hour()


def make_plural_suffix(obj: Sized, suffix='s') -> str:
    if len(obj) != 1:
        return suffix
    else:
        return ''


def warn(msg: str):
    """Issue a warning message of category LoadscopeWarning"""
    warnings.warn(msg, category=LoadscopeWarning)


def as_date(d: Dateish) -> datetime.date:
    """Coerce a string, date or timestamp to a calendar date"""
    if isinstance(d, pd.Timestamp):
        return d.date()
    if isinstance(d, datetime.datetime):
        return d.date()
    if isinstance(d, datetime.date):
        return d
    return pd.Timestamp(d).date()


def date_range(start: Dateish, end: Dateish) -> pd.DatetimeIndex:
    """Inclusive daily index between two calendar dates"""
    return pd.date_range(as_date(start), as_date(end), freq='D')


def daily_profiles(hourly: pd.Series) -> pd.DataFrame:
    """Reshape an hourly UTC series into a day x 24 frame

    Days that are not fully covered are dropped.
    """
    s = hourly.dropna()
    idx = s.index
    frame = pd.DataFrame({
        'day': idx.tz_convert('UTC').normalize().tz_localize(None),
        'hour': idx.hour,
        'value': s.values,
    })
    wide = frame.pivot(index='day', columns='hour', values='value')
    wide = wide.reindex(columns=range(HOURS))
    return wide.dropna()
