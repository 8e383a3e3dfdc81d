import pathlib
import tempfile
from typing import NamedTuple

import numpy as np
import pandas as pd
import pytest

from loadscope.data import SplitSpec
from loadscope.ingestion import AlignedPanel
from loadscope.synthetic import SyntheticSpec, generate_synthetic_panel


@pytest.fixture
def tempdir():
    """Tempdir fixture using tempfile.TemporaryDirectory"""
    with tempfile.TemporaryDirectory() as d:
        yield pathlib.Path(d)


@pytest.fixture(scope='session')
def small_panel() -> AlignedPanel:
    """A 520-day synthetic panel starting 2021-01-01 with two regions"""
    return generate_synthetic_panel(0, 520, SyntheticSpec())


@pytest.fixture(scope='session')
def small_split() -> SplitSpec:
    """Full first year for training so every month has a climatology"""
    return SplitSpec(
        train=('2021-01-01', '2021-12-31'),
        val=('2022-01-01', '2022-02-28'),
        test=('2022-03-01', '2022-05-15'),
    )


class RegressionData(NamedTuple):
    X: pd.DataFrame
    y: np.ndarray


@pytest.fixture
def regression_data() -> RegressionData:
    """Smooth nonlinear target of three features plus a little noise"""
    rng = np.random.default_rng(17)
    X = pd.DataFrame(rng.normal(size=(300, 3)), columns=['a', 'b', 'c'])
    y = (np.sin(X['a']) * 3 + X['b'] ** 2 + 0.5 * X['c']
         + rng.normal(scale=0.1, size=300)).to_numpy()
    return RegressionData(X, y)
