import pickle

import pytest
from joblib import Parallel, delayed

from loadscope.exc import (
    ConstantColumn, DataError, EmptyPartition, GapTooLarge,
    InsufficientHistory, Leakage, MissingDay, NoHistory, NonFinite,
    NoObservations, NotConverged, SchemaError, TaskFailed, UnmappedRegion,
    ZeroTruth,)


@pytest.mark.parametrize('error,attrs', [
    (ConstantColumn('lag_00'), {'name': 'lag_00'}),
    (NonFinite('econ_gdp', 12), {'name': 'econ_gdp', 'row': 12}),
    (EmptyPartition('val'), {'which': 'val'}),
    (Leakage('2022-01-03', 'economics', '2022-02-01'),
     {'day': '2022-01-03', 'source': 'economics', 'date': '2022-02-01'}),
    (SchemaError('demand.csv', 6, 'not a number'),
     {'file': 'demand.csv', 'line': 6, 'reason': 'not a number'}),
    (SchemaError('econ.csv', None), {'line': None, 'reason': ''}),
    (GapTooLarge('north', '2021-03-01 04:00', 5),
     {'series': 'north', 'start': '2021-03-01 04:00', 'length': 5}),
    (UnmappedRegion('east'), {'region': 'east'}),
    (InsufficientHistory('2020-12-31'), {'day': '2020-12-31'}),
    (NoObservations(2, 13), {'month': 2, 'hour': 13}),
    (MissingDay('2030-01-01'), {'day': '2030-01-01'}),
    (NoHistory(7), {'month': 7}),
    (NotConverged(100), {'max_iter': 100}),
    (ZeroTruth('2022-03-01', 4), {'day': '2022-03-01', 'hour': 4}),
    (TaskFailed('north/h01/GBM', 'boom'),
     {'task': 'north/h01/GBM', 'reason': 'boom'}),
])
def test_errors_survive_pickling(error, attrs):
    restored = pickle.loads(pickle.dumps(error))
    assert type(restored) is type(error)
    assert str(restored) == str(error)
    for name, value in attrs.items():
        assert getattr(restored, name) == value


def _read_bad_file(i):
    raise SchemaError(f'part{i}.csv', 3, 'not a number')


def test_worker_data_error_keeps_its_type():
    with pytest.raises(DataError) as e:
        Parallel(n_jobs=2, backend='loky')(
            delayed(_read_bad_file)(i) for i in range(2))
    assert isinstance(e.value, SchemaError)
    assert e.value.line == 3
