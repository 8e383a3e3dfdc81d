import hashlib
import json
import os
import pathlib
from typing import Dict, Iterable, Optional

import pandas as pd
from stacklog import stacklog

from loadscope.util.log import logger
from loadscope.util.typing import Pathy

FLOAT_FORMAT = '%.10g'


def _check_ext(ext: str, expected: str):
    if ext != expected:
        raise ValueError(
            f'File path has wrong extension: {ext} (expected {expected})')


def write_csv(df: pd.DataFrame, filepath: Pathy, index: bool = False,
              float_format: str = FLOAT_FORMAT):
    """Write a table as UTF-8 CSV with a stable float format

    Args:
        df: table to write
        filepath: path to write to; must end in '.csv'
        index: whether to write the index
        float_format: printf-style format of float cells
    """
    filepath = pathlib.Path(filepath)
    _check_ext(filepath.suffix, '.csv')
    os.makedirs(filepath.parent, exist_ok=True)
    df.to_csv(filepath, index=index, float_format=float_format,
              encoding='utf-8', lineterminator='\n')


def write_json(obj, filepath: Pathy, indent: Optional[int] = 2):
    """Write a JSON document with sorted keys"""
    filepath = pathlib.Path(filepath)
    _check_ext(filepath.suffix, '.json')
    os.makedirs(filepath.parent, exist_ok=True)
    with open(filepath, 'w', encoding='utf-8') as f:
        json.dump(obj, f, indent=indent, sort_keys=True, allow_nan=True)
        f.write('\n')


def read_json(filepath: Pathy):
    with open(filepath, 'r', encoding='utf-8') as f:
        return json.load(f)


def save_table(df: pd.DataFrame, output_dir: Pathy, name: str,
               index: bool = False) -> pathlib.Path:
    """Save a result table to output directory as ``<name>.csv``"""
    fn = pathlib.Path(output_dir).joinpath(f'{name}.csv')
    with stacklog(logger.info, f'Saving {name} to {fn}'):
        write_csv(df, fn, index=index)
    return fn


def file_digest(filepath: Pathy) -> str:
    """Compute the sha256 hex digest of a file's content"""
    h = hashlib.sha256()
    with open(filepath, 'rb') as f:
        for chunk in iter(lambda: f.read(1 << 16), b''):
            h.update(chunk)
    return h.hexdigest()


def inventory(root: Pathy, exclude: Iterable[str] = ()) -> Dict[str, str]:
    """Map every file under root (relative posix path) to its digest"""
    root = pathlib.Path(root)
    exclude = set(exclude)
    result = {}
    for path in sorted(root.rglob('*')):
        if not path.is_file():
            continue
        rel = path.relative_to(root).as_posix()
        if rel in exclude:
            continue
        result[rel] = file_digest(path)
    return result
