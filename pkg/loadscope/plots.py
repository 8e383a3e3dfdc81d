"""SVG plots of run results

Figures are drawn on standalone matplotlib figures (no pyplot state) and
written without date metadata and with a fixed hash salt, so identical
inputs give byte-identical files.
"""

import os
import pathlib

import matplotlib
import numpy as np
import pandas as pd
from matplotlib.figure import Figure

from loadscope.diagnostics import CalibrationReport
from loadscope.evaluation import WEEKS
from loadscope.util.typing import Pathy

__all__ = (
    'plot_calibration',
    'plot_improvement_heatmap',
    'plot_mape_by_horizon',
)

HASH_SALT = 'loadscope'
# improvements below this magnitude are left blank
MIN_SHOWN_IMPROVEMENT = 1.0


def _save(fig: Figure, path: Pathy) -> pathlib.Path:
    path = pathlib.Path(path)
    os.makedirs(path.parent, exist_ok=True)
    with matplotlib.rc_context({'svg.hashsalt': HASH_SALT,
                                'svg.fonttype': 'none'}):
        fig.savefig(path, format='svg', metadata={'Date': None})
    return path


def plot_improvement_heatmap(weekly: pd.DataFrame, path: Pathy,
                             title: str = '') -> pathlib.Path:
    """Heatmap of weekly improvements, regions by week of horizon

    Args:
        weekly: table with columns ``region, week, improvement_pct``
        path: output file
        title: figure title
    """
    weeks = [label for label, _, _ in WEEKS
             if label in set(weekly['week'])]
    table = weekly.pivot(index='region', columns='week',
                         values='improvement_pct').reindex(columns=weeks)
    values = table.to_numpy(dtype=float)
    fig = Figure(figsize=(1.2 * len(weeks) + 2, 0.4 * len(table) + 1.5))
    ax = fig.add_subplot()
    limit = np.nanmax(np.abs(values)) if np.isfinite(values).any() else 1.0
    image = ax.imshow(values, cmap='RdBu', vmin=-limit, vmax=limit,
                      aspect='auto')
    for i in range(values.shape[0]):
        for j in range(values.shape[1]):
            v = values[i, j]
            if np.isfinite(v) and abs(v) >= MIN_SHOWN_IMPROVEMENT:
                ax.text(j, i, f'{v:.1f}', ha='center', va='center',
                        fontsize=8)
    ax.set_xticks(range(len(weeks)))
    ax.set_xticklabels([f'h {w}' for w in weeks])
    ax.set_yticks(range(len(table)))
    ax.set_yticklabels(table.index)
    ax.set_title(title)
    fig.colorbar(image, ax=ax, label='improvement (%)')
    fig.tight_layout()
    return _save(fig, path)


def plot_mape_by_horizon(scores: pd.DataFrame, path: Pathy) -> pathlib.Path:
    """MAPE against horizon, one line per model, averaged over regions"""
    mean = scores.groupby(['model', 'horizon'], sort=False)['mape_pct'] \
        .mean().reset_index()
    fig = Figure(figsize=(7, 4))
    ax = fig.add_subplot()
    for model, rows in mean.groupby('model', sort=False):
        rows = rows.sort_values('horizon')
        ax.plot(rows['horizon'], rows['mape_pct'], marker='o',
                markersize=3, label=model)
    ax.set_xlabel('horizon (days)')
    ax.set_ylabel('MAPE (%)')
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    return _save(fig, path)


def plot_calibration(report: CalibrationReport, path: Pathy,
                     title: str = '') -> pathlib.Path:
    """Reliability curve and normal Q-Q plot side by side"""
    fig = Figure(figsize=(8, 4))
    rel, qq = fig.subplots(1, 2)
    rel.plot([0, 1], [0, 1], color='grey', linestyle='--', linewidth=1)
    rel.plot(report.reliability['nominal'], report.reliability['empirical'],
             marker='o', markersize=3)
    rel.set_xlabel('nominal probability')
    rel.set_ylabel('observed frequency')
    rel.set_title('reliability')
    if len(report.qq):
        lo = float(min(report.qq['theoretical'].min(),
                       report.qq['sample'].min()))
        hi = float(max(report.qq['theoretical'].max(),
                       report.qq['sample'].max()))
        qq.plot([lo, hi], [lo, hi], color='grey', linestyle='--',
                linewidth=1)
        qq.scatter(report.qq['theoretical'], report.qq['sample'], s=4)
    qq.set_xlabel('normal quantile')
    qq.set_ylabel('standardized residual')
    qq.set_title('Q-Q')
    fig.suptitle(title)
    fig.tight_layout()
    return _save(fig, path)
