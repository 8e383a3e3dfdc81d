import datetime
from os import PathLike
from typing import Tuple, Union

import pandas as pd

Pathy = Union[str, PathLike]
Dateish = Union[str, datetime.date, pd.Timestamp]
DateRange = Tuple[datetime.date, datetime.date]
