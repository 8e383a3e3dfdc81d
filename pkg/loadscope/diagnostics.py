"""Calibration diagnostics of Gaussian forecasts and paired significance
tests of feature impact
"""

import pathlib
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
import pandas as pd
from scipy.stats import kstest, norm
from scipy.stats import t as student_t

from loadscope.data import ProbForecastSet
from loadscope.exc import LengthMismatch, Misaligned, TooFew
from loadscope.util.io import write_csv
from loadscope.util.typing import Pathy

__all__ = (
    'CalibrationReport',
    'TTestResult',
    'paired_ttest',
    'pit_and_reliability',
    'qq_points',
    'save_calibration',
)

# nominal probabilities of the reliability curve, endpoints included
RELIABILITY_GRID = np.concatenate(
    [[0.0], np.round(np.arange(1, 20) * 0.05, 2), [1.0]])
MIN_QQ = 10
SIGNIFICANCE = 0.01


@dataclass(frozen=True, eq=False)
class CalibrationReport:
    """PIT values, reliability curve and Q-Q pairs of one forecast slice

    Attributes:
        pit: probability integral transform of every observation
        reliability: nominal probability and empirical ``P(PIT <= p)``
        qq: standard-normal quantiles and sorted standardized residuals
        max_deviation: largest absolute gap between the reliability curve
            and the diagonal
        ks_statistic: Kolmogorov-Smirnov distance of the PIT values from
            the uniform distribution
    """
    pit: np.ndarray
    reliability: pd.DataFrame
    qq: pd.DataFrame
    max_deviation: float
    ks_statistic: float

    @property
    def n(self) -> int:
        return len(self.pit)


def reliability_curve(pit: np.ndarray) -> pd.DataFrame:
    pit = np.sort(np.asarray(pit, dtype=float))
    empirical = np.searchsorted(pit, RELIABILITY_GRID, side='right') \
        / len(pit)
    # P(PIT <= 0) is 0 by convention
    empirical[0] = 0.0
    return pd.DataFrame({'nominal': RELIABILITY_GRID,
                         'empirical': empirical})


def qq_points(z) -> pd.DataFrame:
    """Normal Q-Q pairs of standardized residuals

    The i-th smallest residual of n is paired with the standard-normal
    quantile at plotting position ``(i - 0.5) / n``.

    Raises:
        TooFew: fewer than ten residuals
    """
    z = np.sort(np.asarray(z, dtype=float).ravel())
    n = len(z)
    if n < MIN_QQ:
        raise TooFew(f'Q-Q needs at least {MIN_QQ} residuals, got {n}')
    positions = (np.arange(1, n + 1) - 0.5) / n
    return pd.DataFrame({'theoretical': norm.ppf(positions), 'sample': z})


def pit_and_reliability(forecast: ProbForecastSet, truth: pd.DataFrame,
                        hour: Optional[int] = None) -> CalibrationReport:
    """Calibration report of Gaussian forecasts against the truth

    Args:
        forecast: predictive means and standard deviations, day x 24
        truth: observed demand, day x 24
        hour: restrict to one hour of day; all hours are pooled when None

    Raises:
        Misaligned: forecast and truth differ in days or hours
    """
    if not (truth.shape == forecast.mu.shape
            and truth.index.equals(forecast.mu.index)):
        raise Misaligned('Forecasts and truth cover different day-hours')
    mu = forecast.mu.to_numpy(dtype=float)
    sigma = forecast.sigma.to_numpy(dtype=float)
    y = truth.to_numpy(dtype=float)
    if hour is not None:
        mu, sigma, y = mu[:, hour], sigma[:, hour], y[:, hour]
    z = ((y - mu) / sigma).ravel()
    pit = norm.cdf(z)
    curve = reliability_curve(pit)
    max_deviation = float(
        np.abs(curve['empirical'] - curve['nominal']).max())
    ks = float(kstest(pit, 'uniform').statistic)
    qq = qq_points(z) if len(z) >= MIN_QQ else pd.DataFrame(
        {'theoretical': [], 'sample': []})
    return CalibrationReport(pit, curve, qq, max_deviation, ks)


def save_calibration(report: CalibrationReport, output_dir: Pathy,
                     name: str) -> pathlib.Path:
    """Write the reliability and Q-Q points of a report as one CSV

    Rows have columns ``section, x, y`` with section ``reliability``
    (nominal, empirical) or ``qq`` (theoretical, sample).
    """
    rel = report.reliability.set_axis(['x', 'y'], axis=1)
    qq = report.qq.set_axis(['x', 'y'], axis=1)
    table = pd.concat([rel.assign(section='reliability'),
                       qq.assign(section='qq')], ignore_index=True)
    path = pathlib.Path(output_dir).joinpath(f'{name}.csv')
    write_csv(table.loc[:, ['section', 'x', 'y']], path)
    return path


class TTestResult(NamedTuple):
    """Paired t-test of ``a - b``

    Attributes:
        mean_diff: mean of the differences
        t: t statistic, infinite when the differences are a nonzero
            constant
        p_value: two-sided p-value
        n: number of pairs
    """
    mean_diff: float
    t: float
    p_value: float
    n: int

    @property
    def significant(self) -> bool:
        return self.p_value < SIGNIFICANCE

    def display(self, symbol: str = 'Δμ') -> str:
        """Format as e.g. ``Δμ -20.66**``; ``**`` marks p < 0.01 and ``*``
        marks p < 0.05"""
        if self.p_value < SIGNIFICANCE:
            stars = '**'
        elif self.p_value < 0.05:
            stars = '*'
        else:
            stars = ''
        return f'{symbol} {self.mean_diff:.2f}{stars}'


def paired_ttest(a, b) -> TTestResult:
    """Two-sided paired t-test with n - 1 degrees of freedom

    Raises:
        LengthMismatch: a and b differ in length
        TooFew: fewer than two pairs
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if len(a) != len(b):
        raise LengthMismatch(f'Samples have lengths {len(a)} and {len(b)}')
    n = len(a)
    if n < 2:
        raise TooFew(f'Paired t-test needs at least 2 pairs, got {n}')
    d = a - b
    mean = float(d.mean())
    sd = float(d.std(ddof=1))
    if sd == 0:
        if mean == 0:
            return TTestResult(0.0, 0.0, 1.0, n)
        return TTestResult(mean, float(np.copysign(np.inf, mean)), 0.0, n)
    t = mean / (sd / np.sqrt(n))
    p = float(min(1.0, 2 * student_t.sf(abs(t), n - 1)))
    return TTestResult(mean, float(t), p, n)
