import pathlib

import pytest
import yaml

from loadscope.config import RunConfig, from_settings, load_run_config
from loadscope.data import SplitSpec
from loadscope.exc import ConfigurationError
from loadscope.gbdt.tuning import Choice

SPLIT = {
    'train': {'start': '2021-01-01', 'end': '2021-12-31'},
    'val': {'start': '2022-01-01', 'end': '2022-02-28'},
    'test': {'start': '2022-03-01', 'end': '2022-05-15'},
}


def _settings(**kwargs):
    settings = {'synthetic': {'seed': 0, 'days': 520}, 'split': SPLIT}
    settings.update(kwargs)
    return settings


def _write(tempdir, settings, name='config.yml'):
    path = tempdir.joinpath(name)
    with open(path, 'w') as f:
        yaml.safe_dump(settings, f)
    return path


def test_defaults():
    config = from_settings(_settings())
    assert config.variants == ('GBM', 'GBM-E', 'GBM-S', 'GBM-ES')
    assert config.horizons == (1,)
    assert config.seed == 0
    assert config.attribution_variant == 'GBM-ES'
    assert config.split.train[0].isoformat() == '2021-01-01'


def test_sections_are_converted():
    config = from_settings(_settings(
        horizons=7,
        tuning={'budget': 3, 'hours': [8], 'space': {'max_depth': [2, 4]}},
        diagnostics={'hours': 20, 'regions': ['north']},
        causality={'features': ['econ_gdp'], 'horizons': [1, 2]},
    ))
    assert config.horizons == (7,)
    assert config.tuning.budget == 3
    assert config.tuning.hours == (8,)
    assert config.diagnostics.hours == (20,)
    assert config.diagnostics.regions == ('north',)
    assert config.causality.features == ('econ_gdp',)
    assert config.causality.horizons == (1, 2)


def test_search_space_uses_base():
    config = from_settings(_settings(tuning={
        'space': {'max_depth': {'choices': [3]}},
        'base': {'n_trees': 40},
    }))
    space = config.tuning.search_space()
    assert space.dimensions['max_depth'] == Choice((3,))
    assert space.base.n_trees == 40


@pytest.mark.parametrize('settings', [
    {'synthetic': {'seed': 0}},
    _settings(colour='blue'),
    _settings(tuning={'budgt': 3}),
    _settings(horizons=[0]),
    _settings(horizons=[31]),
    _settings(horizons=[]),
    _settings(variants=['GBM', 'XGB']),
    _settings(jobs=0),
    _settings(tuning={'budget': 0}),
    _settings(attribution={'hours': [24]}),
    _settings(attribution={'variant': 'GBM-S'}, variants=['GBM']),
    _settings(inputs={'dir': 'data'}),
    {'split': SPLIT},
    _settings(split={'train': SPLIT['train']}),
    _settings(seed='abc'),
], ids=[
    'no split',
    'unknown key',
    'unknown section key',
    'horizon zero',
    'horizon too far',
    'no horizons',
    'unknown variant',
    'no jobs',
    'no budget',
    'bad hour',
    'attribution variant not trained',
    'inputs and synthetic',
    'neither inputs nor synthetic',
    'incomplete split',
    'bad seed',
])
def test_invalid(settings):
    with pytest.raises(ConfigurationError):
        from_settings(settings)


def test_overlapping_split_is_rejected():
    split = dict(SPLIT, val={'start': '2021-12-01', 'end': '2022-02-28'})
    with pytest.raises(ConfigurationError):
        from_settings(_settings(split=split))


def test_relative_paths_resolve_against_root(tempdir):
    config = from_settings(
        {'inputs': {'dir': 'data'}, 'split': SPLIT, 'output_dir': 'out'},
        root=tempdir)
    assert config.inputs.demand.parent == tempdir.joinpath('data')
    assert config.output_dir == tempdir.joinpath('out')


def test_incomplete_inputs():
    with pytest.raises(ConfigurationError):
        from_settings({'inputs': {'demand': 'demand.csv'}, 'split': SPLIT})


def test_round_trip_through_settings():
    config = from_settings(_settings(
        variants=['GBM', 'GBM-S'], horizons=[1, 7], ablation=['econ_gdp'],
        features={'social_k': 'auto', 'text_smoothing_window': 3},
        output_dir='/tmp/loadscope-out'))
    again = from_settings(config.to_dict())
    assert again == config


def test_load_file(tempdir):
    path = _write(tempdir, _settings(seed=5, output_dir='out'))
    config = load_run_config(path)
    assert isinstance(config, RunConfig)
    assert isinstance(config.split, SplitSpec)
    assert config.seed == 5
    assert config.output_dir == tempdir.resolve().joinpath('out')


def test_environment_overrides_file(tempdir, monkeypatch):
    path = _write(tempdir, _settings(seed=5))
    monkeypatch.setenv('LOADSCOPE_SEED', '11')
    monkeypatch.setenv('LOADSCOPE_TUNING__BUDGET', '4')
    config = load_run_config(path)
    assert config.seed == 11
    assert config.tuning.budget == 4


def test_keyword_overrides_win(tempdir, monkeypatch):
    path = _write(tempdir, _settings(seed=5))
    monkeypatch.setenv('LOADSCOPE_SEED', '11')
    config = load_run_config(path, seed=3, jobs=None, output_dir='elsewhere')
    assert config.seed == 3
    assert config.jobs == 1
    assert config.output_dir == pathlib.Path('elsewhere')


def test_missing_file(tempdir):
    with pytest.raises(ConfigurationError) as e:
        load_run_config(tempdir.joinpath('nope.yml'))
    assert 'nope.yml' in str(e.value)


def test_empty_file(tempdir):
    path = tempdir.joinpath('empty.yml')
    path.write_text('')
    with pytest.raises(ConfigurationError):
        load_run_config(path)


def test_unknown_key_in_file(tempdir):
    path = _write(tempdir, _settings(sede=5))
    with pytest.raises(ConfigurationError):
        load_run_config(path)


def test_bad_synthetic_parameters():
    config = from_settings(_settings(synthetic={'seed': 0, 'betta': 1.0}))
    with pytest.raises(ConfigurationError):
        config.synthetic_spec()
