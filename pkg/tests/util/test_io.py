import numpy as np
import pandas as pd
import pytest

from loadscope.util.io import (
    _check_ext, file_digest, inventory, read_json, save_table, write_csv,
    write_json,)


@pytest.fixture
def frame():
    return pd.DataFrame({'a': [1.0, 1 / 3], 'b': ['x', 'y']})


def test_check_ext_valid():
    _check_ext('.csv', '.csv')


def test_check_ext_invalid_throws():
    with pytest.raises(ValueError):
        _check_ext('.txt', '.csv')


def test_write_csv_float_format(tempdir, frame):
    path = tempdir.joinpath('sub', 'table.csv')
    write_csv(frame, path)
    lines = path.read_text(encoding='utf-8').splitlines()
    assert lines == ['a,b', '1,x', '0.3333333333,y']


def test_write_csv_wrong_extension(tempdir, frame):
    with pytest.raises(ValueError):
        write_csv(frame, tempdir.joinpath('table.txt'))


def test_write_json_sorted(tempdir):
    path = tempdir.joinpath('doc.json')
    write_json({'b': 1, 'a': [1, 2]}, path)
    text = path.read_text()
    assert text.index('"a"') < text.index('"b"')
    assert text.endswith('\n')
    assert read_json(path) == {'a': [1, 2], 'b': 1}


def test_write_json_nan(tempdir):
    path = tempdir.joinpath('doc.json')
    write_json({'x': float('nan')}, path)
    assert np.isnan(read_json(path)['x'])
    assert 'NaN' in path.read_text()


def test_save_table(tempdir, frame):
    path = save_table(frame, tempdir, 'scores')
    assert path == tempdir.joinpath('scores.csv')
    assert list(pd.read_csv(path).columns) == ['a', 'b']


def test_inventory(tempdir, frame):
    save_table(frame, tempdir, 'one')
    save_table(frame, tempdir.joinpath('nested'), 'two')
    write_json({}, tempdir.joinpath('manifest.json'))
    files = inventory(tempdir, exclude=['manifest.json'])
    assert list(files) == ['nested/two.csv', 'one.csv']
    assert files['one.csv'] == files['nested/two.csv']
    assert files['one.csv'] == file_digest(tempdir.joinpath('one.csv'))
    assert len(files['one.csv']) == 64
