import click
from funcy import decorator
from stacklog import stacklog

from loadscope import __version__ as version
from loadscope.exc import ConfigurationError, DataError, TaskFailed

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4


@decorator
def exit_codes(call):
    """Map errors to the documented exit codes"""
    try:
        return call()
    except ConfigurationError as e:
        click.echo(f'Configuration error: {e}', err=True)
        raise SystemExit(EXIT_CONFIG)
    except DataError as e:
        click.echo(f'Data error: {e}', err=True)
        raise SystemExit(EXIT_DATA)
    except TaskFailed as e:
        click.echo(f'Internal error in task {e.task}: {e}', err=True)
        raise SystemExit(EXIT_INTERNAL)
    except (click.exceptions.Exit, click.ClickException, SystemExit):
        raise
    except Exception as e:
        click.echo(f'Internal error in task {call._func.__name__}: '
                   f'{type(e).__name__}: {e}', err=True)
        raise SystemExit(EXIT_INTERNAL)


config_option = click.option(
    '--config', '-c', 'config_path',
    required=True,
    type=click.Path(dir_okay=False),
    help='Run configuration file (YAML or JSON)')
seed_option = click.option(
    '--seed',
    type=int,
    default=None,
    help='Override the global seed')
jobs_option = click.option(
    '--jobs', '-j',
    type=int,
    default=None,
    help='Override the number of worker processes')
run_dir_option = click.option(
    '--run', '--model-dir', 'run_dir',
    required=True,
    type=click.Path(file_okay=False),
    help='Output directory of a finished run')


@click.group()
@click.version_option(version)
@click.option('-v', '--verbose',
              count=True,
              help='Increase verbosity')
@click.option('-q', '--quiet',
              count=True,
              help='Decrease verbosity'
              )
def cli(verbose, quiet):
    """The loadscope command line interface"""
    import loadscope.util.log

    # Process logging
    count = verbose - quiet
    if count <= -1:
        level = 'CRITICAL'
    elif count == 0:
        level = 'INFO'
    else:
        level = 'DEBUG'
    loadscope.util.log.enable(level=level,
                              format=loadscope.util.log.DETAIL_LOG_FORMAT,
                              echo=False)


@cli.command()
@config_option
@seed_option
@jobs_option
@click.option('--out', '-o',
              type=click.Path(file_okay=False),
              default=None,
              help='Override the output directory')
@exit_codes
@stacklog(click.echo, 'Running experiment')
def run(config_path, seed, jobs, out):
    """Train, evaluate and analyze every configured model"""
    import loadscope.config
    import loadscope.pipeline
    config = loadscope.config.load_run_config(
        config_path, seed=seed, jobs=jobs, output_dir=out)
    manifest = loadscope.pipeline.run(config)
    click.echo(f'Wrote {len(manifest.files)} files to {config.output_dir}')


@cli.command()
@run_dir_option
@click.option('--region', required=True, help='Demand region')
@click.option('--date', 'issue_date', required=True,
              help='Issue date, YYYY-MM-DD')
@click.option('--horizon', '-h', type=int, required=True,
              help='Days ahead, 1 to 30')
@click.option('--variant', default=None,
              help='Model variant; defaults to the richest trained one')
@click.option('--out', '-o',
              type=click.Path(dir_okay=False),
              default=None,
              help='Write the table to this CSV file instead of stdout')
@exit_codes
def forecast(run_dir, region, issue_date, horizon, variant, out):
    """Forecast the 24 hours of a target day with trained models"""
    import loadscope.pipeline
    import loadscope.util.io
    table = loadscope.pipeline.forecast(run_dir, region, issue_date,
                                        horizon, variant=variant)
    if out is None:
        click.echo(table.to_csv(index=False, float_format='%.4f'),
                   nl=False)
    else:
        loadscope.util.io.write_csv(table, out)


@cli.command()
@config_option
@click.option('--out', '-o',
              type=click.Path(file_okay=False),
              default=None,
              help='Override the output directory')
@exit_codes
@stacklog(click.echo, 'Clustering textual features')
def cluster(config_path, out):
    """Cluster the textual features into social factors"""
    import loadscope.config
    import loadscope.pipeline
    from loadscope.util.io import save_table
    config = loadscope.config.load_run_config(config_path, output_dir=out)
    social, clusters, merges = loadscope.pipeline.run_clustering(config)
    save_table(clusters, config.output_dir, 'clusters')
    save_table(merges, config.output_dir, 'merges')
    click.echo(f'Derived {social.k} social factors')


@cli.command()
@config_option
@seed_option
@jobs_option
@click.option('--out', '-o',
              type=click.Path(file_okay=False),
              default=None,
              help='Override the output directory')
@exit_codes
@stacklog(click.echo, 'Testing causality')
def causality(config_path, seed, jobs, out):
    """Granger tests and DML effects of the social and economic features"""
    import loadscope.config
    import loadscope.pipeline
    from loadscope.util.io import save_table
    config = loadscope.config.load_run_config(
        config_path, seed=seed, jobs=jobs, output_dir=out)
    panel = loadscope.pipeline.load_inputs(config)
    social = loadscope.pipeline.social_factors(panel, config,
                                               required=False)
    granger, dml = loadscope.pipeline.run_causality(panel, config, social)
    save_table(granger, config.output_dir, 'causality_granger')
    save_table(dml, config.output_dir, 'causality_dml')


@cli.command()
@run_dir_option
@click.option('--region', required=True, help='Demand region')
@click.option('--horizon', '-h', type=int, required=True,
              help='Days ahead, 1 to 30')
@click.option('--hour', type=int, default=20, show_default=True,
              help='Hour of day of the explained model')
@click.option('--variant', default=None,
              help='Model variant; defaults to the run\'s attribution '
                   'variant')
@click.option('--feature', default=None,
              help='Also write dependence data of this feature')
@click.option('--color', default=None,
              help='Coloring feature of the dependence data')
@click.option('--out', '-o',
              type=click.Path(file_okay=False),
              default=None,
              help='Output directory; defaults to the run directory')
@exit_codes
@stacklog(click.echo, 'Computing attributions')
def attribute(run_dir, region, horizon, hour, variant, feature, color, out):
    """Rank the features of a trained model by mean absolute SHAP value"""
    import pathlib

    from slugify import slugify

    import loadscope.pipeline
    from loadscope.util.io import save_table
    if (feature is None) != (color is None):
        raise click.UsageError('--feature and --color go together')
    summary, dependence = loadscope.pipeline.attribute(
        run_dir, region, horizon, hour, variant=variant, feature=feature,
        color=color)
    out = pathlib.Path(out if out is not None else run_dir)
    name = f'{slugify(region)}_h{horizon:02d}_hour{hour:02d}'
    save_table(summary, out, f'shap_{name}')
    if dependence is not None:
        save_table(dependence, out, f'dependence_{name}')


@cli.command()
@click.option('--out', '-o',
              type=click.Path(file_okay=False),
              required=True,
              help='Directory of the generated inputs and config')
@click.option('--seed',
              type=int,
              default=0,
              show_default=True,
              help='Seed of the generated panel')
@click.option('--days',
              type=int,
              default=730,
              show_default=True,
              help='Number of calendar days')
@exit_codes
@stacklog(click.echo, 'Generating synthetic inputs')
def synth(out, seed, days):
    """Write a synthetic panel with a planted textual driver"""
    import loadscope.pipeline
    path = loadscope.pipeline.write_synthetic_workspace(out, seed=seed,
                                                        days=days)
    click.echo(f'Run it with: loadscope run --config {path}')
