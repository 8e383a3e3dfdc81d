"""Versioned JSON model files

Every document carries ``format_version`` and ``kind``. Floats are written
with their shortest round-trip representation, so a loaded model predicts
bit-identically to the saved one.
"""

import pathlib
from dataclasses import dataclass, field
from typing import Dict, Union

from stacklog import stacklog

from loadscope.data import Standardizer
from loadscope.exc import ModelNotFound, UnknownFormatVersion
from loadscope.gbdt.ensemble import Ensemble
from loadscope.gbdt.gaussian import GaussianEnsemble
from loadscope.gbdt.tree import HyperParams, Tree
from loadscope.util.io import read_json, write_json
from loadscope.util.log import logger
from loadscope.util.typing import Pathy

__all__ = (
    'FORMAT_VERSION',
    'ModelBundle',
    'load_model',
    'save_model',
)

FORMAT_VERSION = 1
SUPPORTED_VERSIONS = (1,)


@dataclass(frozen=True, eq=False)
class ModelBundle:
    """The 24 hourly Gaussian models of one region, horizon and variant"""
    region: str
    horizon: int
    variant: str
    models: Dict[int, GaussianEnsemble]
    metadata: Dict = field(default_factory=dict)


def _ensemble_to_dict(e: Ensemble) -> Dict:
    return {
        'params': e.params.to_dict(),
        'base_score': e.base_score,
        'learning_rate': e.learning_rate,
        'trees': [t.to_dict() for t in e.trees],
        'feature_names': list(e.feature_names),
        'input_names': list(e.input_names),
        'standardizer': (e.standardizer.to_dict()
                         if e.standardizer is not None else None),
        'target_mean': e.target_mean,
        'target_std': e.target_std,
        'history': e.history,
    }


def _ensemble_from_dict(d: Dict) -> Ensemble:
    return Ensemble(
        base_score=float(d['base_score']),
        trees=tuple(Tree.from_dict(t) for t in d['trees']),
        learning_rate=float(d['learning_rate']),
        feature_names=tuple(d['feature_names']),
        input_names=tuple(d['input_names']),
        standardizer=(Standardizer.from_dict(d['standardizer'])
                      if d['standardizer'] is not None else None),
        target_mean=float(d['target_mean']),
        target_std=float(d['target_std']),
        params=HyperParams.from_dict(d['params']),
        history=d.get('history', {}),
    )


def _gaussian_to_dict(g: GaussianEnsemble) -> Dict:
    return {
        'mu': _ensemble_to_dict(g.mu),
        'logvar': _ensemble_to_dict(g.logvar),
        'variance_floor': g.variance_floor,
    }


def _gaussian_from_dict(d: Dict) -> GaussianEnsemble:
    return GaussianEnsemble(_ensemble_from_dict(d['mu']),
                            _ensemble_from_dict(d['logvar']),
                            float(d['variance_floor']))


Model = Union[Ensemble, GaussianEnsemble, ModelBundle]


def to_document(model: Model) -> Dict:
    if isinstance(model, Ensemble):
        body = {'kind': 'ensemble', **_ensemble_to_dict(model)}
    elif isinstance(model, GaussianEnsemble):
        body = {'kind': 'gaussian', **_gaussian_to_dict(model)}
    elif isinstance(model, ModelBundle):
        body = {
            'kind': 'bundle',
            'region': model.region,
            'horizon': model.horizon,
            'variant': model.variant,
            'metadata': model.metadata,
            'hours': {str(hour): _gaussian_to_dict(g)
                      for hour, g in sorted(model.models.items())},
        }
    else:
        raise TypeError(f'Cannot serialize {type(model).__name__}')
    return {'format_version': FORMAT_VERSION, **body}


def from_document(doc: Dict) -> Model:
    """Rebuild a model from its document

    Raises:
        UnknownFormatVersion: the document's format version is unsupported
    """
    version = doc.get('format_version')
    if version not in SUPPORTED_VERSIONS:
        raise UnknownFormatVersion(
            f'Unsupported model format version {version!r}')
    kind = doc.get('kind')
    if kind == 'ensemble':
        return _ensemble_from_dict(doc)
    elif kind == 'gaussian':
        return _gaussian_from_dict(doc)
    elif kind == 'bundle':
        return ModelBundle(
            region=doc['region'],
            horizon=int(doc['horizon']),
            variant=doc['variant'],
            models={int(hour): _gaussian_from_dict(g)
                    for hour, g in doc['hours'].items()},
            metadata=doc.get('metadata', {}),
        )
    raise UnknownFormatVersion(f'Unknown model kind {kind!r}')


def save_model(model: Model, path: Pathy) -> pathlib.Path:
    path = pathlib.Path(path)
    with stacklog(logger.debug, f'Saving model to {path}'):
        write_json(to_document(model), path, indent=None)
    return path


def load_model(path: Pathy) -> Model:
    """Load a model file

    Raises:
        ModelNotFound: no file at path
        UnknownFormatVersion: the file's format version is unsupported
    """
    path = pathlib.Path(path)
    if not path.exists():
        raise ModelNotFound(f'No model file at {path}')
    return from_document(read_json(path))

