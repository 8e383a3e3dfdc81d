"""Run configuration

A run is configured by a YAML (or JSON) document loaded with dynaconf, so
every key can be overridden by an environment variable prefixed with
``LOADSCOPE_``; nested keys are joined with a double underscore, e.g.
``LOADSCOPE_TUNING__BUDGET=5``. See the README for the full grammar.
"""

import pathlib
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, Mapping, Optional, Tuple, Union

from dynaconf import Dynaconf

from loadscope.data import SplitSpec
from loadscope.exc import ConfigurationError, DataError
from loadscope.features.design import MAX_HORIZON, VARIANTS
from loadscope.gbdt.tree import HyperParams
from loadscope.gbdt.tuning import DEFAULT_SPACE, SearchSpace
from loadscope.ingestion import MAX_GAP_HOURS, InputPaths
from loadscope.synthetic import SyntheticSpec
from loadscope.util.typing import Pathy

__all__ = (
    'RunConfig',
    'load_run_config',
)

DYNACONF_OPTIONS = {
    'envvar_prefix': 'LOADSCOPE',
    'yaml_loader': 'safe_load',
}

DEFAULT_BASELINE_LAMBDAS = (1e-4, 1e-3, 1e-2, 1e-1)


@dataclass(frozen=True)
class TuningConfig:
    """Hyperparameter search shared by the 24 hourly models of a task

    Attributes:
        budget: random-search trials per (region, horizon, variant)
        hours: hours of day whose validation MSE scores a trial
        space: search space, see :py:meth:`SearchSpace.from_dict`
        base: values of the hyperparameters outside the space
        mode: ``random`` or ``grid``
        oof_folds: folds of the out-of-fold residuals of the variance model
    """
    budget: int = 10
    hours: Tuple[int, ...] = (8, 20)
    space: Dict = field(default_factory=lambda: dict(DEFAULT_SPACE))
    base: Dict = field(default_factory=dict)
    mode: str = 'random'
    oof_folds: int = 5

    def search_space(self) -> SearchSpace:
        return SearchSpace.from_dict(self.space,
                                     HyperParams.from_dict(self.base))


@dataclass(frozen=True)
class DiagnosticsConfig:
    """Slices of the calibration diagnostics

    ``regions`` and ``horizons`` default to every run region and horizon;
    ``pool_hours`` adds one slice pooling all hours.
    """
    hours: Tuple[int, ...] = (20,)
    horizons: Optional[Tuple[int, ...]] = None
    regions: Optional[Tuple[str, ...]] = None
    pool_hours: bool = False


@dataclass(frozen=True)
class CausalityConfig:
    enabled: bool = True
    max_lag: int = 7
    alpha: float = 0.05
    folds: int = 5
    horizons: Tuple[int, ...] = (1,)
    features: Optional[Tuple[str, ...]] = None


@dataclass(frozen=True)
class AttributionConfig:
    enabled: bool = True
    variant: Optional[str] = None
    hours: Tuple[int, ...] = (20,)
    max_rows: int = 50


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs, validated

    Exactly one of ``inputs`` and ``synthetic`` is set.

    Attributes:
        inputs: paths of the five CSV inputs
        synthetic: seed, days and planted-structure parameters of a
            generated panel
        regions: representative temperature city of each region
        split: train, validation and test date ranges
        variants: model variants to train, among GBM, GBM-E, GBM-S, GBM-ES
        horizons: forecast horizons in days, within [1, 30]
        social_k: number of social factors, or ``'auto'``
        text_smoothing_window: trailing mean window of the social factors
        max_gap_hours: longest interpolated gap of the hourly inputs
        tuning: hyperparameter search
        baseline_lambdas: lambda grid of the LASSO baselines
        diagnostics: calibration slices
        causality: Granger and DML settings
        attribution: SHAP settings
        ablation: economic or social features each trained alone on top of
            the base features as model ``GBM+<name>``
        seed: global seed
        jobs: worker processes
        output_dir: directory of the run artifacts
    """
    split: SplitSpec
    inputs: Optional[InputPaths] = None
    synthetic: Optional[Dict] = None
    regions: Dict[str, str] = field(default_factory=dict)
    variants: Tuple[str, ...] = tuple(VARIANTS)
    horizons: Tuple[int, ...] = (1,)
    social_k: Union[int, str] = 10
    text_smoothing_window: int = 1
    max_gap_hours: int = MAX_GAP_HOURS
    tuning: TuningConfig = field(default_factory=TuningConfig)
    baseline_lambdas: Tuple[float, ...] = DEFAULT_BASELINE_LAMBDAS
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)
    causality: CausalityConfig = field(default_factory=CausalityConfig)
    attribution: AttributionConfig = field(
        default_factory=AttributionConfig)
    ablation: Tuple[str, ...] = ()
    seed: int = 0
    jobs: int = 1
    output_dir: pathlib.Path = pathlib.Path('output')

    def __post_init__(self):
        if (self.inputs is None) == (self.synthetic is None):
            raise ConfigurationError(
                'Configure exactly one of inputs and synthetic')
        if not self.horizons:
            raise ConfigurationError('At least one horizon is required')
        bad = [h for h in self.horizons if not 1 <= h <= MAX_HORIZON]
        if bad:
            raise ConfigurationError(
                f'Horizons must lie in [1, {MAX_HORIZON}], got {bad}')
        unknown = [v for v in self.variants if v not in VARIANTS]
        if unknown or not self.variants:
            raise ConfigurationError(
                f'Variants must be a non-empty subset of {list(VARIANTS)}, '
                f'got {list(self.variants)}')
        if self.jobs == 0:
            raise ConfigurationError('jobs must be nonzero')
        if self.tuning.budget < 1:
            raise ConfigurationError('tuning.budget must be >= 1')
        hours = [*self.tuning.hours, *self.diagnostics.hours,
                 *self.attribution.hours]
        if any(not 0 <= h < 24 for h in hours):
            raise ConfigurationError('Hours must lie in [0, 23]')
        if self.attribution.variant is not None \
                and self.attribution.variant not in self.variants:
            raise ConfigurationError(
                f'Attribution variant {self.attribution.variant!r} is not '
                f'among the run variants')

    @property
    def attribution_variant(self) -> str:
        if self.attribution.variant is not None:
            return self.attribution.variant
        for name in ('GBM-ES', 'GBM-S', 'GBM-E', 'GBM'):
            if name in self.variants:
                return name
        return self.variants[0]

    def synthetic_spec(self) -> SyntheticSpec:
        params = {k: v for k, v in self.synthetic.items()
                  if k not in ('seed', 'days')}
        try:
            return SyntheticSpec(**params)
        except TypeError as e:
            raise ConfigurationError(f'Bad synthetic parameters: {e}') \
                from None

    def to_dict(self) -> Dict[str, Any]:
        """Plain settings that :py:func:`from_settings` turns back into
        this configuration"""
        d = {
            'split': self.split.to_dict(),
            'inputs': ({k: str(v) for k, v in self.inputs._asdict().items()}
                       if self.inputs is not None else None),
            'synthetic': self.synthetic,
            'regions': self.regions,
            'variants': self.variants,
            'horizons': self.horizons,
            'features': {
                'social_k': self.social_k,
                'text_smoothing_window': self.text_smoothing_window,
                'max_gap_hours': self.max_gap_hours,
            },
            'tuning': asdict(self.tuning),
            'baselines': {'lambdas': self.baseline_lambdas},
            'diagnostics': asdict(self.diagnostics),
            'causality': asdict(self.causality),
            'attribution': asdict(self.attribution),
            'ablation': self.ablation,
            'seed': self.seed,
            'jobs': self.jobs,
            'output_dir': str(self.output_dir),
        }
        return _jsonable({k: v for k, v in d.items() if v is not None})


def _jsonable(obj):
    if isinstance(obj, Mapping):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, pathlib.Path):
        return str(obj)
    return obj


def _plain(obj):
    """Convert dynaconf boxes to plain dicts and lists"""
    if isinstance(obj, Mapping):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _lower(section) -> Dict:
    return {str(k).lower(): v for k, v in (section or {}).items()}


def _section(settings: Dict, name: str, cls, **convert):
    raw = _lower(settings.get(name))
    unknown = set(raw) - set(cls.__dataclass_fields__)
    if unknown:
        raise ConfigurationError(
            f'Unknown keys in section {name!r}: {sorted(unknown)}')
    for key, fn in convert.items():
        if raw.get(key) is not None:
            raw[key] = fn(raw[key])
    return cls(**raw)


def _ints(values) -> Tuple[int, ...]:
    if isinstance(values, (int, str)):
        values = [values]
    return tuple(int(v) for v in values)


def _resolve(root: pathlib.Path, value: Pathy) -> pathlib.Path:
    path = pathlib.Path(value)
    return path if path.is_absolute() else root.joinpath(path)


def _inputs(raw: Mapping, root: pathlib.Path) -> InputPaths:
    if 'dir' in raw:
        return InputPaths.in_dir(_resolve(root, raw['dir']))
    missing = set(InputPaths._fields) - set(raw)
    if missing:
        raise ConfigurationError(f'Missing input paths: {sorted(missing)}')
    return InputPaths(**{name: _resolve(root, raw[name])
                         for name in InputPaths._fields})


KNOWN_KEYS = {
    'inputs', 'synthetic', 'regions', 'split', 'variants', 'horizons',
    'features', 'tuning', 'baselines', 'diagnostics', 'causality',
    'attribution', 'ablation', 'seed', 'jobs', 'output_dir',
}


def from_settings(settings: Mapping, root: Pathy = '.') -> RunConfig:
    """Build a RunConfig from a plain settings mapping

    Relative paths are resolved against root.

    Raises:
        ConfigurationError: a key is unknown, missing or invalid
    """
    root = pathlib.Path(root)
    settings = {str(k).lower(): v for k, v in _plain(settings).items()}
    unknown = set(settings) - KNOWN_KEYS
    if unknown:
        raise ConfigurationError(f'Unknown configuration keys: '
                                 f'{sorted(unknown)}')
    if 'split' not in settings:
        raise ConfigurationError('Missing required key \'split\'')
    try:
        split = SplitSpec.from_dict(settings['split'])
    except (KeyError, TypeError, ValueError, DataError) as e:
        raise ConfigurationError(f'Invalid split: {e}') from None

    features = _lower(settings.get('features'))
    baselines = _lower(settings.get('baselines'))
    try:
        return RunConfig(
            split=split,
            inputs=(_inputs(settings['inputs'], root)
                    if settings.get('inputs') else None),
            synthetic=(dict(settings['synthetic'])
                       if settings.get('synthetic') is not None else None),
            regions={str(k): str(v) for k, v in
                     (settings.get('regions') or {}).items()},
            variants=tuple(settings.get('variants') or VARIANTS),
            horizons=_ints(settings.get('horizons', [1])),
            social_k=features.get('social_k', 10),
            text_smoothing_window=int(
                features.get('text_smoothing_window', 1)),
            max_gap_hours=int(features.get('max_gap_hours', MAX_GAP_HOURS)),
            tuning=_section(settings, 'tuning', TuningConfig, hours=_ints),
            baseline_lambdas=tuple(
                float(v) for v in baselines.get(
                    'lambdas', DEFAULT_BASELINE_LAMBDAS)),
            diagnostics=_section(
                settings, 'diagnostics', DiagnosticsConfig, hours=_ints,
                horizons=_ints, regions=tuple),
            causality=_section(settings, 'causality', CausalityConfig,
                               horizons=_ints, features=tuple),
            attribution=_section(settings, 'attribution', AttributionConfig,
                                 hours=_ints),
            ablation=tuple(settings.get('ablation') or ()),
            seed=int(settings.get('seed', 0)),
            jobs=int(settings.get('jobs', 1)),
            output_dir=_resolve(root, settings.get('output_dir', 'output')),
        )
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f'Invalid configuration: {e}') from None


def load_run_config(path: Pathy, **overrides) -> RunConfig:
    """Load and validate a run configuration file

    Environment variables prefixed with ``LOADSCOPE_`` override file
    values, and keyword overrides (e.g. from command-line flags) override
    both. Overrides whose value is None are ignored.

    Raises:
        ConfigurationError: the file is missing or the configuration is
            invalid
    """
    path = pathlib.Path(path)
    if not path.is_file():
        raise ConfigurationError(f'Couldn\'t find config file at {path!s}')
    options = DYNACONF_OPTIONS.copy()
    options.update({
        'root_path': str(path.parent),
        'settings_file': str(path.name),
    })
    try:
        settings = Dynaconf(**options).as_dict()
    except Exception as e:
        raise ConfigurationError(f'Couldn\'t parse {path!s}: {e}') from None
    if not settings:
        raise ConfigurationError(f'Config file {path!s} is empty')
    config = from_settings(settings, root=path.resolve().parent)
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if 'output_dir' in overrides:
        overrides['output_dir'] = pathlib.Path(overrides['output_dir'])
    return replace(config, **overrides) if overrides else config
