import logging
import random

import pytest

from loadscope.util.log import TRACE, enable, log_counts, logger as _logger


@pytest.fixture
def logger():
    name = str(random.randint(0, 1 << 10))
    return logging.getLogger(name)


@pytest.mark.parametrize('level', [logging.INFO, 'CRITICAL'])
def test_enable(logger, caplog, level):
    with caplog.at_level(level, logger=logger.name):
        enable(logger, level, echo=True)
    assert 'enabled' in caplog.text


def test_enable_by_name(logger):
    enable(logger.name, level='debug', echo=False)
    assert logger.level == logging.DEBUG


def test_trace_level_name():
    assert logging.getLevelName(TRACE) == 'TRACE'


def test_log_counts_skips_zeros(caplog):
    with caplog.at_level(logging.INFO, logger=_logger.name):
        log_counts('Interpolated hours', {'north': 2, 'south': 0,
                                          'temp:northton': 1})
    assert 'north=2, temp:northton=1' in caplog.text
    assert 'south' not in caplog.text


def test_log_counts_all_zero(caplog):
    with caplog.at_level(logging.INFO, logger=_logger.name):
        log_counts('Interpolated hours', {'north': 0})
    assert not caplog.text
