import itertools
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Mapping, NamedTuple, Sequence, Union

import numpy as np
import pandas as pd

from loadscope.exc import ConfigurationError, EmptySpace
from loadscope.gbdt.ensemble import as_frame, fit_ensemble
from loadscope.gbdt.tree import HyperParams
from loadscope.util.log import logger
from loadscope.util.seeds import task_seed

__all__ = (
    'Choice',
    'Range',
    'SearchSpace',
    'TuningResult',
    'DEFAULT_SPACE',
    'tune',
)


@dataclass(frozen=True)
class Range:
    """Continuous or integer interval; ``log`` samples log-uniformly"""
    low: float
    high: float
    log: bool = False
    integer: bool = False

    def __post_init__(self):
        if self.low > self.high:
            raise ConfigurationError(
                f'Range low {self.low} exceeds high {self.high}')
        if self.log and self.low <= 0:
            raise ConfigurationError('Log ranges must be positive')

    def sample(self, rng: np.random.Generator):
        if self.integer:
            return int(rng.integers(int(self.low), int(self.high) + 1))
        if self.log:
            return float(np.exp(rng.uniform(np.log(self.low),
                                            np.log(self.high))))
        return float(rng.uniform(self.low, self.high))


@dataclass(frozen=True)
class Choice:
    """Finite set of values"""
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, 'values', tuple(self.values))
        if not self.values:
            raise EmptySpace('Choice needs at least one value')

    def sample(self, rng: np.random.Generator):
        return self.values[int(rng.integers(len(self.values)))]


Dimension = Union[Range, Choice]

# learning rate and l2 regularization are sampled log-uniformly
LOG_SCALE = ('learning_rate', 'l2_leaf_reg')
INTEGER = ('n_trees', 'max_depth', 'min_samples_leaf',
           'early_stopping_rounds')


class SearchSpace:
    """Ranges or choices of a subset of :py:class:`HyperParams`

    Parameters not in the space keep the values of ``base``.

    Args:
        dimensions: mapping of hyperparameter name to Range or Choice
        base: values of the remaining hyperparameters
    """

    def __init__(self, dimensions: Mapping[str, Dimension],
                 base: HyperParams = None):
        unknown = set(dimensions) - set(HyperParams().to_dict())
        if unknown:
            raise ConfigurationError(
                f'Unknown hyperparameters in search space: {sorted(unknown)}')
        # sorted names fix the sampling order
        self.dimensions = dict(sorted(dimensions.items()))
        self.base = base if base is not None else HyperParams()

    def __len__(self) -> int:
        return len(self.dimensions)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any],
                  base: HyperParams = None) -> 'SearchSpace':
        """Build a space from plain values

        A two-element list ``[low, high]`` is a Range (log-uniform for
        learning rate and l2 regularization, integer for integer
        hyperparameters); a mapping ``{choices: [...]}`` is a Choice; a
        scalar fixes the value.
        """
        dims: Dict[str, Dimension] = {}
        for name, spec in d.items():
            if isinstance(spec, Mapping) and 'choices' in spec:
                dims[name] = Choice(tuple(spec['choices']))
            elif isinstance(spec, Sequence) and not isinstance(spec, str):
                if len(spec) != 2:
                    raise ConfigurationError(
                        f'Range of {name} must be [low, high]')
                dims[name] = Range(spec[0], spec[1],
                                   log=name in LOG_SCALE,
                                   integer=name in INTEGER)
            else:
                dims[name] = Choice((spec,))
        return cls(dims, base)

    def to_dict(self) -> Dict:
        out = {}
        for name, dim in self.dimensions.items():
            if isinstance(dim, Range):
                out[name] = [dim.low, dim.high]
            else:
                out[name] = {'choices': list(dim.values)}
        return out

    def sample(self, rng: np.random.Generator) -> HyperParams:
        values = {name: dim.sample(rng)
                  for name, dim in self.dimensions.items()}
        return replace(self.base, **values)

    def grid(self) -> List[HyperParams]:
        """Every combination of the choices, in lexicographic order

        Raises:
            ConfigurationError: some dimension is a Range
        """
        if any(isinstance(d, Range) for d in self.dimensions.values()):
            raise ConfigurationError('Grid enumeration needs choices only')
        names = list(self.dimensions)
        combos = itertools.product(
            *(self.dimensions[n].values for n in names))
        return [replace(self.base, **dict(zip(names, combo)))
                for combo in combos]


DEFAULT_SPACE = {
    'learning_rate': [0.02, 0.3],
    'max_depth': [2, 6],
    'min_samples_leaf': [3, 30],
    'l2_leaf_reg': [0.1, 10.0],
    'feature_fraction': [0.5, 1.0],
    'row_subsample': [0.6, 1.0],
}


class TuningResult(NamedTuple):
    params: HyperParams
    trials: pd.DataFrame


def _as_columns(Y) -> np.ndarray:
    arr = np.asarray(Y, dtype=float)
    return arr.reshape(len(arr), -1)


def tune(space: SearchSpace, budget: int, seed: int, train, val,
         mode: str = 'random') -> TuningResult:
    """Search hyperparameters minimizing the validation MSE

    Every trial fits one ensemble per target column and scores the mean of
    their validation MSEs.

    Args:
        space: search space
        budget: number of trials
        seed: seed of the trial sequence and of the fits
        train: pair of (features, one or more target columns)
        val: pair of (features, target columns)
        mode: ``'random'`` samples configurations; ``'grid'`` enumerates the
            grid of choices in order, up to budget

    Returns:
        the best configuration (first on ties) and the log of all trials

    Raises:
        EmptySpace: budget < 1 or nothing to search
    """
    if budget < 1:
        raise EmptySpace(f'Budget must be >= 1, got {budget}')
    if mode == 'grid':
        candidates = space.grid()[:budget]
    elif mode == 'random':
        rng = np.random.default_rng(task_seed(seed, 'tune'))
        candidates = [space.sample(rng) for _ in range(budget)]
    else:
        raise ConfigurationError(f'Unknown tuning mode {mode!r}')
    if not candidates:
        raise EmptySpace('Search space is empty')

    X_train, Y_train = as_frame(train[0]), _as_columns(train[1])
    X_val, Y_val = as_frame(val[0]), _as_columns(val[1])

    rows = []
    for trial, params in enumerate(candidates):
        losses = []
        for j in range(Y_train.shape[1]):
            e = fit_ensemble(X_train, Y_train[:, j], X_val, Y_val[:, j],
                             params, task_seed(seed, 'trial', trial, j))
            losses.append(np.mean((e.predict(X_val) - Y_val[:, j]) ** 2))
        loss = float(np.mean(losses))
        logger.debug(f'Trial {trial}: val MSE {loss:.6g} with {params}')
        rows.append({'trial': trial, **params.to_dict(), 'val_mse': loss})

    trials = pd.DataFrame(rows)
    best = int(trials['val_mse'].to_numpy().argmin())
    logger.debug(f'Best trial {best} of {len(trials)}')
    return TuningResult(candidates[best], trials)
