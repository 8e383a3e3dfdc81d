# -*- coding: utf-8 -*-

"""Top-level package for loadscope."""

__author__ = 'loadscope developers'
__email__ = 'loadscope@users.noreply.github.com'
__version__ = '0.1.0'

# filter warnings
import warnings  # noqa E402
warnings.filterwarnings(
    action='ignore', module='statsmodels', category=FutureWarning)

# configure module-level logging
import logging  # noqa E402
from loadscope.util.log import logger  # noqa E402
logger.addHandler(logging.NullHandler())

# re-export some names
from loadscope.data import SplitSpec, Standardizer  # noqa E402
from loadscope.features.design import FeatureSpec  # noqa E402
from loadscope.ingestion import AlignedPanel, load_panel  # noqa E402

__all__ = (
    'AlignedPanel',
    'FeatureSpec',
    'SplitSpec',
    'Standardizer',
    'load_panel',
)
