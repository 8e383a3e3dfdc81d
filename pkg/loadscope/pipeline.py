"""Orchestration of a full run and of forecasts from its artifacts

A run ingests the panel, derives the social factors, builds one design
matrix per (region, horizon, model), tunes and trains the hourly Gaussian
models of every model variant in a worker pool, fits the baselines, and
writes scores, diagnostics, causality and attribution tables, plots, and a
manifest into the output directory.
"""

import pathlib
import time
from dataclasses import replace
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import yaml
from joblib import Parallel, delayed
from slugify import slugify
from stacklog import stacklog
from tqdm import tqdm

import loadscope
from loadscope.attribution import (
    average_summaries, dependence_data, shap_values, summarize_shap,)
from loadscope.baselines import (
    ClimatologyForecaster, LassoForecaster, combine_pf_scf,)
from loadscope.causality import (
    causal_frame, causal_profile, daily_demand, granger_test, pooled_effect,)
from loadscope.config import RunConfig, from_settings
from loadscope.data import (
    HOUR_COLUMNS, DesignMatrix, ProbForecastSet, SplitResult, SplitSpec,
    split_by_dates,)
from loadscope.diagnostics import (
    paired_ttest, pit_and_reliability, save_calibration,)
from loadscope.evaluation import (
    ImprovementTable, ScoreTable, friedman_nemenyi, improvement_table,
    score_forecasts, summarize_scores,)
from loadscope.exc import (
    AnalysisError, ConfigurationError, DataError, DateOutOfRange,
    InsufficientHistory, ModelNotFound, TaskFailed, UnmappedRegion,)
from loadscope.features.design import (
    LAG_COLUMNS, VARIANTS, FeatureSpec, build_design_matrix,
    build_feature_rows,)
from loadscope.features.social import SocialFactors, derive_social_factors
from loadscope.gbdt.gaussian import fit_gaussian
from loadscope.gbdt.io import ModelBundle, load_model, save_model
from loadscope.gbdt.tuning import tune
from loadscope.ingestion import (
    ECONOMIC_INDICATORS, AlignedPanel, load_panel, save_panel,)
from loadscope.plots import (
    plot_calibration, plot_improvement_heatmap, plot_mape_by_horizon,)
from loadscope.synthetic import SyntheticSpec, generate_synthetic_panel
from loadscope.util import HOURS, as_date, warn
from loadscope.util.io import inventory, read_json, save_table, write_json
from loadscope.util.log import logger
from loadscope.util.seeds import task_seed
from loadscope.util.typing import Dateish, Pathy

__all__ = (
    'RunManifest',
    'attribute',
    'forecast',
    'load_inputs',
    'run',
    'run_causality',
    'run_clustering',
    'social_factors',
    'write_synthetic_workspace',
)

MANIFEST_NAME = 'manifest.json'
MODEL_DIR = 'models'
BASE_MODEL = 'GBM'
ABLATION_PREFIX = 'GBM+'
BASELINE_MODELS = ('PF', 'SCF', 'PF-SCF', 'LASSO')
BENCHMARK = 'PF-SCF'
# (without text, with text)
TEXT_PAIRS = (('GBM', 'GBM-S'), ('GBM-E', 'GBM-ES'))
IMPROVEMENT_METRICS = ('rmse_mw', 'crps_mw')
# z of the two-sided 90% Gaussian interval
Z_90 = 1.6449
DEFAULT_SYNTHETIC_DAYS = 730

GRANGER_COLUMNS = ['feature', 'region', 'direction', 'lag', 'f_stat',
                   'p_value', 'relation', 'differenced']
DML_COLUMNS = ['feature', 'region', 'horizon', 'delta', 'se', 'ci_lo',
               'ci_hi', 'n']
SHAP_COLUMNS = ['region', 'feature', 'mean_abs_shap', 'rank']
IMPROVEMENT_COLUMNS = ['model', 'base_model', 'metric', 'region', 'week',
                       'improvement_pct']


class Task(NamedTuple):
    """One (region, horizon, model) training unit"""
    region: str
    horizon: int
    model: str

    @property
    def id(self) -> str:
        return f'{self.region}/h{self.horizon:02d}/{self.model}'


class TaskResult(NamedTuple):
    task: Task
    seed: int
    bundle: ModelBundle
    forecast: ProbForecastSet
    trials: pd.DataFrame
    seconds: float


class RunManifest(NamedTuple):
    """Everything needed to reproduce a run and locate its outputs

    Attributes:
        config: the run configuration as plain settings
        version: package version
        seeds: seed of every training task, by task id
        hyperparameters: chosen hyperparameters, by task id
        social: number of social factors and the textual features of each
        holiday_classes: holiday classes encoded by the dummies
        timings: seconds per stage
        files: content digest of every output file but the manifest
    """
    config: Dict
    version: str
    seeds: Dict[str, int]
    hyperparameters: Dict[str, Dict]
    social: Optional[Dict]
    holiday_classes: List[str]
    timings: Dict[str, float]
    files: Dict[str, str]

    def to_dict(self) -> Dict:
        return self._asdict()

    def save(self, output_dir: Pathy) -> pathlib.Path:
        path = pathlib.Path(output_dir).joinpath(MANIFEST_NAME)
        write_json(self.to_dict(), path)
        return path


def load_inputs(config: RunConfig) -> AlignedPanel:
    """The configured CSV panel, or the configured synthetic panel"""
    if config.synthetic is not None:
        seed = int(config.synthetic.get('seed', config.seed))
        days = int(config.synthetic.get('days', DEFAULT_SYNTHETIC_DAYS))
        return generate_synthetic_panel(seed, days, config.synthetic_spec())
    if not config.regions:
        raise ConfigurationError(
            'regions (region to city map) is required with inputs')
    return load_panel(config.inputs, config.regions, config.max_gap_hours,
                      span=(config.split.start, config.split.end))


def model_spec(name: str, social_k, text_smoothing_window: int = 1
               ) -> FeatureSpec:
    """Feature spec of a model variant or of a ``GBM+<feature>`` ablation

    Raises:
        ConfigurationError: name is neither
    """
    if name in VARIANTS:
        return replace(VARIANTS[name], social_k=social_k,
                       text_smoothing_window=text_smoothing_window)
    if name.startswith(ABLATION_PREFIX):
        base = FeatureSpec(social_k=social_k,
                           text_smoothing_window=text_smoothing_window)
        return base.with_only(name[len(ABLATION_PREFIX):])
    raise ConfigurationError(f'Unknown model {name!r}')


def _needs_social(config: RunConfig) -> bool:
    return bool(config.ablation) or any(
        VARIANTS[v].use_social for v in config.variants)


def social_factors(panel: AlignedPanel, config: RunConfig,
                   required: bool) -> Optional[SocialFactors]:
    """Social factors of the configured panel; None with a warning when
    they cannot be derived and are not required"""
    try:
        return derive_social_factors(panel, config.split.train,
                                     config.social_k)
    except AnalysisError as e:
        if required:
            raise
        warn(f'No social factors: {e}')
        return None


def _model_specs(config: RunConfig, social: Optional[SocialFactors]
                 ) -> Dict[str, FeatureSpec]:
    k = social.k if social is not None else config.social_k
    specs = {name: model_spec(name, k, config.text_smoothing_window)
             for name in config.variants}
    if config.ablation:
        known = {c.name for c in social.centroids} if social else set()
        known |= {f'econ_{name}' for name in ECONOMIC_INDICATORS}
        for feature in config.ablation:
            if feature not in known:
                raise ConfigurationError(
                    f'Unknown ablation feature {feature!r}; choose among '
                    f'{sorted(known)}')
            name = f'{ABLATION_PREFIX}{feature}'
            specs[name] = model_spec(name, k, config.text_smoothing_window)
    return specs


def _model_path(root: Pathy, region: str, horizon: int,
                model: str) -> pathlib.Path:
    return pathlib.Path(root).joinpath(
        MODEL_DIR, slugify(region), f'h{horizon:02d}',
        f'{slugify(model)}.json')


def _build_splits(panel: AlignedPanel, config: RunConfig,
                  specs: Dict[str, FeatureSpec],
                  social: Optional[SocialFactors],
                  holiday_classes: Sequence[str]
                  ) -> Dict[Tuple[str, int], Dict[str, SplitResult]]:
    """Split design matrices of every (region, horizon) and model

    The matrices of one (region, horizon) are restricted to their common
    issue days, so all models are scored on the same test rows.
    """
    centroids = social.centroids if social is not None else None
    result = {}
    for region in panel.regions:
        for horizon in config.horizons:
            matrices: Dict[str, DesignMatrix] = {}
            for name, spec in specs.items():
                matrices[name] = build_design_matrix(
                    panel, region, horizon, spec,
                    centroids=centroids if spec.use_social else None,
                    train_range=config.split.train,
                    holiday_classes=holiday_classes)
            common = None
            for m in matrices.values():
                common = m.days if common is None \
                    else common.intersection(m.days)
            result[region, horizon] = {
                name: split_by_dates(m.take(m.days.isin(common)),
                                     config.split)
                for name, m in matrices.items()
            }
    return result


def _fit_task(task: Task, split: SplitResult,
              config: RunConfig) -> TaskResult:
    seed = task_seed(config.seed, task.region, task.horizon, task.model)
    start = time.perf_counter()
    try:
        tuning = config.tuning
        hours = list(tuning.hours)
        result = tune(tuning.search_space(), tuning.budget, seed,
                      (split.train.X, split.train.Y[hours]),
                      (split.val.X, split.val.Y[hours]),
                      mode=tuning.mode)
        models = {}
        mu = np.empty((len(split.test), HOURS))
        sigma = np.empty((len(split.test), HOURS))
        for hour in range(HOURS):
            g = fit_gaussian(split.train.X, split.train.Y[hour],
                             split.val.X, split.val.Y[hour], result.params,
                             task_seed(seed, 'hour', hour),
                             folds=tuning.oof_folds)
            models[hour] = g
            mu[:, hour], sigma[:, hour] = g.predict(split.test.X)
    except (ConfigurationError, DataError):
        raise
    except Exception as e:
        raise TaskFailed(task.id, f'{type(e).__name__}: {e}') from e
    bundle = ModelBundle(
        task.region, task.horizon, task.model, models,
        metadata={
            'seed': seed,
            'params': result.params.to_dict(),
            'feature_names': list(split.train.X.columns),
        })
    trials = result.trials.assign(
        region=task.region, horizon=task.horizon, model=task.model)
    return TaskResult(task, seed, bundle,
                      ProbForecastSet.from_arrays(mu, sigma,
                                                  split.test.days),
                      trials, time.perf_counter() - start)


def _hour_table(frame: pd.DataFrame) -> pd.DataFrame:
    out = frame.copy()
    out.columns = HOUR_COLUMNS
    return out


def baseline_forecasts(panel: AlignedPanel, split: SplitResult,
                       config: RunConfig) -> Dict[str, pd.DataFrame]:
    """PF, SCF, PF-SCF and LASSO forecasts of the test rows

    Args:
        panel: aligned inputs
        split: base-feature design matrix split
        config: run configuration
    """
    region = split.train.region
    climatology = ClimatologyForecaster(panel, region, config.split.train)

    def scf(matrix: DesignMatrix) -> pd.DataFrame:
        out = climatology.forecasts(matrix.target_days)
        out.index = matrix.days
        return out

    def pf(matrix: DesignMatrix) -> pd.DataFrame:
        return _hour_table(matrix.X.loc[:, LAG_COLUMNS])

    combiner = combine_pf_scf(pf(split.val), scf(split.val), split.val.Y,
                              config.baseline_lambdas)
    test = split.test
    pf_test, scf_test = pf(test), scf(test)
    combined = pd.DataFrame(combiner.predict(pf_test, scf_test),
                            index=test.days, columns=HOUR_COLUMNS)
    lasso = LassoForecaster(config.baseline_lambdas).fit(split.train,
                                                         split.val)
    return dict(zip(BASELINE_MODELS, (pf_test, scf_test, combined,
                                      lasso.predict(test.X))))


def _improvements(scores: ScoreTable, models: Sequence[str]
                  ) -> Dict[Tuple[str, str, str], ImprovementTable]:
    pairs = []
    if BASE_MODEL in models:
        pairs += [(BASE_MODEL, m) for m in models if m != BASE_MODEL]
    pairs += [(BENCHMARK, m) for m in models]
    tables = {}
    for base, model in pairs:
        for metric in IMPROVEMENT_METRICS:
            tables[model, base, metric] = improvement_table(
                scores.model(base), scores.model(model), metric)
    return tables


def _improvement_frame(tables) -> pd.DataFrame:
    frames = [table.weekly.assign(model=model, base_model=base,
                                  metric=metric)
              for (model, base, metric), table in tables.items()]
    if not frames:
        return pd.DataFrame(columns=IMPROVEMENT_COLUMNS)
    return pd.concat(frames, ignore_index=True).loc[:, IMPROVEMENT_COLUMNS]


def _ranking(scores: ScoreTable) -> pd.DataFrame:
    try:
        return friedman_nemenyi(scores.tasks('rmse_mw')).to_frame()
    except AnalysisError as e:
        logger.info(f'Skipping model ranking: {e}')
        return pd.DataFrame(columns=['model', 'mean_rank', 'chi2_f',
                                     'p_value', 'cd', 'n_tasks', 'alpha'])


def _text_impact(forecasts: Dict[Tuple[str, int, str], ProbForecastSet],
                 regions: Sequence[str], horizons: Sequence[int],
                 models: Sequence[str]) -> pd.DataFrame:
    """Paired t-tests of the predicted mu and sigma with and without text,
    pooled over the horizons and (day, hour) pairs of each region"""
    rows = []
    for base, variant in TEXT_PAIRS:
        if base not in models or variant not in models:
            continue
        for region in regions:
            for quantity, symbol in (('mu', 'Δμ'), ('sigma', 'Δσ')):
                a = np.concatenate([
                    getattr(forecasts[region, h, variant], quantity)
                    .to_numpy().ravel() for h in horizons])
                b = np.concatenate([
                    getattr(forecasts[region, h, base], quantity)
                    .to_numpy().ravel() for h in horizons])
                result = paired_ttest(a, b)
                rows.append({
                    'region': region, 'base': base, 'variant': variant,
                    'quantity': quantity, **result._asdict(),
                    'display': result.display(symbol),
                })
    return pd.DataFrame(rows, columns=[
        'region', 'base', 'variant', 'quantity', 'mean_diff', 't',
        'p_value', 'n', 'display'])


def _diagnostic_slices(config: RunConfig, regions: Sequence[str]):
    diag = config.diagnostics
    chosen_regions = list(diag.regions) if diag.regions else list(regions)
    unknown = set(chosen_regions) - set(regions)
    if unknown:
        raise ConfigurationError(
            f'Unknown diagnostics regions {sorted(unknown)}')
    horizons = list(diag.horizons) if diag.horizons else list(
        config.horizons)
    unknown = set(horizons) - set(config.horizons)
    if unknown:
        raise ConfigurationError(
            f'Diagnostics horizons {sorted(unknown)} are not run horizons')
    hours: List[Optional[int]] = list(diag.hours)
    if diag.pool_hours:
        hours.append(None)
    return chosen_regions, horizons, hours


def _calibration(forecasts, truths, config: RunConfig,
                 regions: Sequence[str], output_dir: pathlib.Path
                 ) -> pd.DataFrame:
    chosen_regions, horizons, hours = _diagnostic_slices(config, regions)
    rows = []
    for model in config.variants:
        for region in chosen_regions:
            for horizon in horizons:
                for hour in hours:
                    hour_label = 'all' if hour is None else f'{hour:02d}'
                    name = (f'{slugify(model)}_{slugify(region)}'
                            f'_h{horizon:02d}_hour{hour_label}')
                    report = pit_and_reliability(
                        forecasts[region, horizon, model],
                        truths[region, horizon], hour)
                    save_calibration(report, output_dir / 'calibration',
                                     name)
                    plot_calibration(
                        report,
                        output_dir / 'plots' / f'calibration_{name}.svg',
                        title=f'{model} {region} h={horizon} '
                              f'hour {hour_label}')
                    rows.append({
                        'model': model, 'region': region,
                        'horizon': horizon, 'hour': hour_label,
                        'n': report.n,
                        'max_deviation': report.max_deviation,
                        'ks_statistic': report.ks_statistic,
                    })
    return pd.DataFrame(rows, columns=['model', 'region', 'horizon', 'hour',
                                       'n', 'max_deviation',
                                       'ks_statistic'])


@stacklog(logger.info, 'Running causality analyses')
def run_causality(panel: AlignedPanel, config: RunConfig,
                  social: Optional[SocialFactors]
                  ) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """Granger tests and DML profiles of the social and economic features

    Analyses that cannot be carried out on a feature (too short, constant,
    degenerate treatment) are skipped with a warning.

    Returns:
        the Granger table and the DML table, the latter with one row per
        horizon and a pooled row (horizon ``all``) per feature and region

    Raises:
        ConfigurationError: an unknown feature is requested
    """
    settings = config.causality
    features = causal_frame(panel,
                            social.centroids if social is not None else ())
    names = list(settings.features) if settings.features \
        else list(features.columns)
    unknown = set(names) - set(features.columns)
    if unknown:
        raise ConfigurationError(
            f'Unknown causality features {sorted(unknown)}; choose among '
            f'{list(features.columns)}')

    granger_rows, dml_frames = [], []
    for region in panel.regions:
        demand = daily_demand(panel, region)
        for name in tqdm(names):
            joined = pd.concat([features[name], demand], axis=1,
                               join='inner').dropna()
            try:
                result = granger_test(joined.iloc[:, 0], joined.iloc[:, 1],
                                      settings.max_lag, settings.alpha)
                granger_rows.extend(result.rows(name, region))
            except AnalysisError as e:
                warn(f'Granger test of {name} on {region} skipped: {e}')
            try:
                profile = causal_profile(
                    features, demand, name, horizons=settings.horizons,
                    folds=settings.folds, seed=config.seed,
                    jobs=config.jobs, region=region)
            except AnalysisError as e:
                warn(f'DML of {name} on {region} skipped: {e}')
                continue
            dml_frames.append(profile)
            dml_frames.append(pd.DataFrame([pooled_effect(profile)]))

    granger = pd.DataFrame(granger_rows, columns=GRANGER_COLUMNS)
    dml = (pd.concat(dml_frames, ignore_index=True).loc[:, DML_COLUMNS]
           if dml_frames else pd.DataFrame(columns=DML_COLUMNS))
    return granger, dml


@stacklog(logger.info, 'Computing attributions')
def _attribution(bundles: Dict[Tuple[str, int, str], ModelBundle],
                 splits, config: RunConfig, regions: Sequence[str],
                 output_dir: pathlib.Path) -> pd.DataFrame:
    settings = config.attribution
    variant = config.attribution_variant
    per_region: Dict[str, List[pd.DataFrame]] = {}
    for region in regions:
        for horizon in config.horizons:
            X = splits[region, horizon][variant].test.X
            for hour in settings.hours:
                model = bundles[region, horizon, variant].models[hour]
                shap = shap_values(model, X.iloc[:settings.max_rows])
                save_table(shap.to_long(), output_dir / 'attribution',
                           f'{slugify(region)}_h{horizon:02d}'
                           f'_hour{hour:02d}')
                per_region.setdefault(region, []).append(
                    summarize_shap(shap))
    frames = [average_summaries(summaries).assign(region=region)
              for region, summaries in per_region.items()]
    everything = [s for summaries in per_region.values() for s in summaries]
    frames.append(average_summaries(everything).assign(region='all'))
    return pd.concat(frames, ignore_index=True).loc[:, SHAP_COLUMNS]


class _Stopwatch:
    """Seconds spent in each stage of a run"""

    def __init__(self):
        self.laps: Dict[str, float] = {}
        self._last = time.perf_counter()

    def lap(self, name: str):
        now = time.perf_counter()
        self.laps[name] = round(now - self._last, 3)
        self._last = now


def run(config: RunConfig) -> RunManifest:
    """Run the full experiment and write its artifacts

    Args:
        config: validated run configuration

    Returns:
        the manifest written to ``<output_dir>/manifest.json``

    Raises:
        ConfigurationError: the configuration does not fit the data
        DataError: the inputs cannot be used
        TaskFailed: a training task failed; carries the task id
    """
    out = pathlib.Path(config.output_dir)
    stopwatch = _Stopwatch()

    panel = load_inputs(config)
    social = social_factors(panel, config, required=_needs_social(config))
    specs = _model_specs(config, social)
    # baselines read the base features even when GBM is not trained
    specs_with_base = {BASE_MODEL: model_spec(
        BASE_MODEL, config.social_k, config.text_smoothing_window), **specs}
    holiday_classes = panel.holiday_classes()
    stopwatch.lap('ingest')

    with stacklog(logger.info, 'Building design matrices'):
        splits = _build_splits(panel, config, specs_with_base, social,
                               holiday_classes)
    stopwatch.lap('features')

    regions = panel.regions
    tasks = [Task(region, horizon, model)
             for region in regions
             for horizon in config.horizons
             for model in specs]
    with stacklog(logger.info, f'Training {len(tasks)} model tasks'):
        results: List[TaskResult] = Parallel(n_jobs=config.jobs)(
            delayed(_fit_task)(task, splits[task.region, task.horizon]
                               [task.model], config)
            for task in tqdm(tasks))
    forecasts = {}
    bundles = {}
    for result in results:
        key = tuple(result.task)
        forecasts[key] = result.forecast
        bundles[key] = result.bundle
        save_model(result.bundle, _model_path(out, *result.task))
    stopwatch.lap('training')

    rows = []
    truths = {}
    with stacklog(logger.info, 'Fitting baselines and scoring'):
        for region in regions:
            for horizon in config.horizons:
                base_split = splits[region, horizon][BASE_MODEL]
                truth = base_split.test.Y
                truths[region, horizon] = truth
                for name in specs:
                    rows.append(score_forecasts(
                        region, horizon, name, truth,
                        forecasts[region, horizon, name]))
                for name, values in baseline_forecasts(
                        panel, base_split, config).items():
                    rows.append(score_forecasts(region, horizon, name,
                                                truth, values))
    scores = ScoreTable.from_rows(rows)
    scores.save(out, 'scores')
    save_table(summarize_scores(scores), out, 'summary')
    improvements = _improvements(scores, list(specs))
    save_table(_improvement_frame(improvements), out, 'improvements')
    save_table(_ranking(scores), out, 'rankings')
    save_table(pd.concat([r.trials for r in results], ignore_index=True),
               out, 'tuning')
    stopwatch.lap('evaluation')

    with stacklog(logger.info, 'Running diagnostics'):
        calibration = _calibration(forecasts, truths, config, regions, out)
        save_table(calibration, out / 'calibration', 'summary')
        save_table(_text_impact(forecasts, regions, config.horizons,
                                list(specs)), out, 'text_impact')
    stopwatch.lap('diagnostics')

    if config.causality.enabled:
        granger, dml = run_causality(panel, config, social)
    else:
        granger = pd.DataFrame(columns=GRANGER_COLUMNS)
        dml = pd.DataFrame(columns=DML_COLUMNS)
    save_table(granger, out, 'causality_granger')
    save_table(dml, out, 'causality_dml')
    stopwatch.lap('causality')

    if config.attribution.enabled:
        shap = _attribution(bundles, splits, config, regions, out)
    else:
        shap = pd.DataFrame(columns=SHAP_COLUMNS)
    save_table(shap, out, 'shap_summary')
    stopwatch.lap('attribution')

    with stacklog(logger.info, 'Plotting'):
        plot_mape_by_horizon(scores.frame, out / 'plots'
                             / 'mape_by_horizon.svg')
        for (model, base, metric), table in improvements.items():
            if base == BASE_MODEL and metric == 'crps_mw':
                plot_improvement_heatmap(
                    table.weekly,
                    out / 'plots' / f'improvement_{slugify(model)}.svg',
                    title=f'CRPS improvement of {model} over {base} (%)')
    stopwatch.lap('plots')

    manifest = RunManifest(
        config=config.to_dict(),
        version=loadscope.__version__,
        seeds={r.task.id: r.seed for r in results},
        hyperparameters={r.task.id: r.bundle.metadata['params']
                         for r in results},
        social=({'k': social.k, 'mapping': social.mapping()}
                if social is not None else None),
        holiday_classes=list(holiday_classes),
        timings=stopwatch.laps,
        files=inventory(out, exclude=[MANIFEST_NAME]),
    )
    manifest.save(out)
    logger.info(f'Wrote {len(manifest.files)} files to {out}')
    return manifest


class _RunArtifacts(NamedTuple):
    manifest: Dict
    config: RunConfig


def _load_run(run_dir: Pathy) -> _RunArtifacts:
    path = pathlib.Path(run_dir).joinpath(MANIFEST_NAME)
    if not path.exists():
        raise ModelNotFound(f'No run manifest at {path}')
    manifest = read_json(path)
    return _RunArtifacts(manifest, from_settings(manifest['config']))


def _run_features(panel: AlignedPanel, artifacts: _RunArtifacts, model: str
                  ) -> Tuple[FeatureSpec, Optional[SocialFactors]]:
    """Feature spec of a trained model and the social factors it reads,
    rederived as during the run"""
    config = artifacts.config
    social = artifacts.manifest.get('social')
    k = social['k'] if social else config.social_k
    spec = model_spec(model, k, config.text_smoothing_window)
    if not spec.use_social:
        return spec, None
    return spec, derive_social_factors(panel, config.split.train, k)


def _default_model(config: RunConfig, variant: Optional[str]) -> str:
    return variant if variant is not None else config.attribution_variant


def forecast(run_dir: Pathy, region: str, issue_date: Dateish,
             horizon: int, variant: Optional[str] = None,
             panel: Optional[AlignedPanel] = None) -> pd.DataFrame:
    """Forecast the 24 hours of ``issue_date + horizon`` with trained models

    Args:
        run_dir: output directory of a run
        region: demand region
        issue_date: last day whose data informs the forecast
        horizon: days ahead
        variant: model name; defaults to the run's richest variant
        panel: inputs to read features from; defaults to the run's inputs

    Returns:
        24 rows with columns ``hour, point_mw, mu_mw, sigma_mw, lo_mw,
        hi_mw``, the bounds forming the central 90% interval

    Raises:
        ModelNotFound: the run or the model does not exist
        DateOutOfRange: the issue date precedes the run's data or lacks
            the history its features need
    """
    artifacts = _load_run(run_dir)
    config = artifacts.config
    model = _default_model(config, variant)
    bundle = load_model(_model_path(run_dir, region, horizon, model))
    if panel is None:
        panel = load_inputs(config)
    if region not in panel.regions:
        raise UnmappedRegion(region)
    day = pd.Timestamp(as_date(issue_date))
    if day.date() < config.split.start:
        raise DateOutOfRange(
            f'Issue date {day.date()} precedes the run start '
            f'{config.split.start}')
    spec, social = _run_features(panel, artifacts, model)
    try:
        X, _ = build_feature_rows(
            panel, region, horizon, spec, [day],
            centroids=social.centroids if social is not None else None,
            train_range=config.split.train,
            holiday_classes=artifacts.manifest['holiday_classes'],
            strict=True)
    except InsufficientHistory as e:
        raise DateOutOfRange(
            f'Issue date {day.date()} lacks history: {e}') from None
    mu = np.empty(HOURS)
    sigma = np.empty(HOURS)
    for hour in range(HOURS):
        m, s = bundle.models[hour].predict(X)
        mu[hour], sigma[hour] = m[0], s[0]
    return pd.DataFrame({
        'hour': np.arange(HOURS),
        'point_mw': mu,
        'mu_mw': mu,
        'sigma_mw': sigma,
        'lo_mw': mu - Z_90 * sigma,
        'hi_mw': mu + Z_90 * sigma,
    })


def run_clustering(config: RunConfig, panel: Optional[AlignedPanel] = None
                   ) -> Tuple[SocialFactors, pd.DataFrame, pd.DataFrame]:
    """Cluster the textual features of the configured inputs

    Returns:
        the social factors, a table of every textual feature with its
        cluster and the cluster's centroid, and the Ward merge sequence
    """
    if panel is None:
        panel = load_inputs(config)
    social = derive_social_factors(panel, config.split.train,
                                   config.social_k)
    rows = []
    for label, (centroid, members) in enumerate(social.mapping().items()):
        for feature in members:
            rows.append({'feature': feature, 'cluster': label + 1,
                         'centroid': centroid})
    clusters = pd.DataFrame(rows, columns=['feature', 'cluster',
                                           'centroid'])
    merges = pd.DataFrame(social.result.merges,
                          columns=['left', 'right', 'height'])
    merges.insert(0, 'step', np.arange(1, len(merges) + 1))
    return social, clusters, merges


def attribute(run_dir: Pathy, region: str, horizon: int, hour: int,
              variant: Optional[str] = None,
              feature: Optional[str] = None, color: Optional[str] = None,
              panel: Optional[AlignedPanel] = None
              ) -> Tuple[pd.DataFrame, Optional[pd.DataFrame]]:
    """Attributions of a trained model over the run's test rows

    Args:
        run_dir: output directory of a run
        region: demand region
        horizon: days ahead
        hour: hour of day of the explained model
        variant: model name; defaults to the run's attribution variant
        feature: if given with color, also return dependence data
        color: coloring feature of the dependence data
        panel: inputs to rebuild the features from

    Returns:
        the ranked summary and, when requested, the dependence data

    Raises:
        ModelNotFound: the run or the model does not exist
        BadFeature: the dependence features are invalid
    """
    artifacts = _load_run(run_dir)
    config = artifacts.config
    model = _default_model(config, variant)
    bundle = load_model(_model_path(run_dir, region, horizon, model))
    if panel is None:
        panel = load_inputs(config)
    spec, social = _run_features(panel, artifacts, model)
    matrix = build_design_matrix(
        panel, region, horizon, spec,
        centroids=social.centroids if social is not None else None,
        train_range=config.split.train,
        holiday_classes=artifacts.manifest['holiday_classes'])
    X = split_by_dates(matrix, config.split).test.X
    X = X.iloc[:config.attribution.max_rows]
    shap = shap_values(bundle.models[hour], X)
    summary = summarize_shap(shap)
    dependence = None
    if feature is not None:
        dependence = dependence_data(X, shap, feature, color)
    return summary, dependence


# share of the days in the train and validation ranges of a generated config
SYNTH_SPLIT = (0.6, 0.2)
SYNTH_CONFIG_NAME = 'config.yml'


def synthetic_split(days: pd.DatetimeIndex) -> SplitSpec:
    """Consecutive 60/20/20 train, validation and test ranges over days"""
    n = len(days)
    n_train = int(n * SYNTH_SPLIT[0])
    n_val = int(n * SYNTH_SPLIT[1])
    if n_train < 1 or n_val < 1 or n - n_train - n_val < 1:
        raise DataError(f'Cannot split {n} days into three ranges')
    bounds = [(0, n_train - 1), (n_train, n_train + n_val - 1),
              (n_train + n_val, n - 1)]
    return SplitSpec(*((days[i].date(), days[j].date()) for i, j in bounds))


@stacklog(logger.info, 'Writing synthetic workspace')
def write_synthetic_workspace(output_dir: Pathy, seed: int = 0,
                              days: int = DEFAULT_SYNTHETIC_DAYS,
                              spec: Optional[SyntheticSpec] = None
                              ) -> pathlib.Path:
    """Write the five CSV inputs of a planted panel and a config to run it

    Returns:
        path of the written ``config.yml``
    """
    output_dir = pathlib.Path(output_dir)
    panel = generate_synthetic_panel(seed, days, spec)
    save_panel(panel, output_dir)
    settings = {
        'inputs': {'dir': '.'},
        'regions': dict(panel.region_city),
        'split': synthetic_split(panel.days).to_dict(),
        'variants': list(VARIANTS),
        'horizons': [1, 7, 14, 30],
        'features': {'social_k': 'auto'},
        'tuning': {'budget': 5},
        'seed': int(seed),
        'output_dir': 'output',
    }
    path = output_dir.joinpath(SYNTH_CONFIG_NAME)
    with open(path, 'w', encoding='utf-8') as f:
        yaml.safe_dump(settings, f, sort_keys=False)
    return path
