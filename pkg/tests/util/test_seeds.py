import pytest

from loadscope.util.seeds import SEED_MODULUS, task_seed


def test_task_seed_is_stable():
    assert task_seed(0, 'north', 1, 'GBM') == task_seed(0, 'north', 1, 'GBM')


@pytest.mark.parametrize('other', [
    (1, 'north', 1, 'GBM'),
    (0, 'south', 1, 'GBM'),
    (0, 'north', 7, 'GBM'),
    (0, 'north', 1, 'GBM-S'),
    (0, 1, 'north', 'GBM'),
])
def test_task_seed_depends_on_every_key(other):
    assert task_seed(*other) != task_seed(0, 'north', 1, 'GBM')


def test_task_seed_range():
    seeds = [task_seed(s, 'x') for s in range(100)]
    assert all(0 <= s < SEED_MODULUS for s in seeds)
    assert len(set(seeds)) == 100


def test_task_seed_accepts_numpy_ints():
    import numpy as np
    assert task_seed(np.int64(3), 'x') == task_seed(3, 'x')
