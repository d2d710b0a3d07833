import click

from segprompt.cli.utils import emit, handle_errors
from segprompt.core.config import Settings
from segprompt.evaluation.benchmarks import prompt_benchmark, refine_benchmark


@click.group('bench', help='Compare each stage against its baseline on synthetic scenes')
def bench():
    pass


@bench.command('prompts', help='Containment rate of generated points against box centers')
@click.option('--count', default=200, show_default=True, type=click.IntRange(min=1), help='Number of scenes')
@click.option('--seed', default=0, show_default=True, type=int, help='Scene seed')
@click.option('--jitter', default=0.15, show_default=True, type=click.FloatRange(0.0, 0.3),
              help='Relative box jitter')
@click.option('--config', 'config_path', type=click.Path(dir_okay=False), help='Settings file')
@click.option('--set', 'overrides', multiple=True, metavar='KEY=VALUE', help='Override a setting')
@click.option('--percent', is_flag=True, help='Report rates in percent')
@click.option('--output', '-o', type=click.Path(dir_okay=False), help='Write the table here instead of stdout')
@handle_errors
def bench_prompts(count, seed, jitter, config_path, overrides, percent, output):
    settings = Settings.load(config_path, overrides)
    result = prompt_benchmark(count=count, seed=seed, jitter=jitter, cfg=settings.cfpg_config())
    emit(dict(result.to_dict(percent), config_hash=settings.config_hash()), output)


@bench.command('refine', help='IoU of corrupted masks before and after refinement')
@click.option('--count', default=100, show_default=True, type=click.IntRange(min=1), help='Number of scenes')
@click.option('--seed', default=0, show_default=True, type=int, help='Scene seed')
@click.option('--dilate', default=3, show_default=True, type=click.IntRange(min=0),
              help='Dilation radius of the corruption')
@click.option('--salt', default=0.05, show_default=True, type=click.FloatRange(0.0, 1.0, max_open=True),
              help='Share of random foreground pixels')
@click.option('--config', 'config_path', type=click.Path(dir_okay=False), help='Settings file')
@click.option('--set', 'overrides', multiple=True, metavar='KEY=VALUE', help='Override a setting')
@click.option('--percent', is_flag=True, help='Report metrics in percent')
@click.option('--output', '-o', type=click.Path(dir_okay=False), help='Write the table here instead of stdout')
@handle_errors
def bench_refine(count, seed, dilate, salt, config_path, overrides, percent, output):
    settings = Settings.load(config_path, overrides)
    result = refine_benchmark(count=count, seed=seed, cfg=settings.mbo_config(), dilate_px=dilate, salt=salt,
                              thresholds=settings.thresholds)
    emit(dict(result.to_dict(percent), config_hash=settings.config_hash()), output)
