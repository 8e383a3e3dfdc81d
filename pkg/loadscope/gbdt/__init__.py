from loadscope.gbdt.ensemble import (
    BoostedTreeRegressor, Ensemble, fit_ensemble, predict,)
from loadscope.gbdt.gaussian import (
    GaussianEnsemble, fit_gaussian, predict_gaussian,)
from loadscope.gbdt.io import ModelBundle, load_model, save_model
from loadscope.gbdt.tree import HyperParams, Tree, fit_tree
from loadscope.gbdt.tuning import SearchSpace, TuningResult, tune

__all__ = (
    'BoostedTreeRegressor',
    'Ensemble',
    'GaussianEnsemble',
    'HyperParams',
    'ModelBundle',
    'SearchSpace',
    'Tree',
    'TuningResult',
    'fit_ensemble',
    'fit_gaussian',
    'fit_tree',
    'load_model',
    'predict',
    'predict_gaussian',
    'save_model',
    'tune',
)
