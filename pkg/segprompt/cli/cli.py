import logging
from dataclasses import replace
from pathlib import Path

import click
from click import echo

from segprompt.cfpg.generator import run_cfpg
from segprompt.cli.bench import bench
from segprompt.cli.utils import (configure_logging, emit, handle_errors, image_files, read_image, read_json,
                                 read_mask, write_image, write_json, write_mask)
from segprompt.core.config import Settings
from segprompt.core.exceptions import ImageIOError, ShapeMismatchError, SpecError
from segprompt.core.raster import BoundingBox
from segprompt.evaluation.metrics import aggregate, iou
from segprompt.mbo.refine import refine_mask
from segprompt.synth.scenes import SceneSpec, generate
from segprompt.utils.version import __version__

logger = logging.getLogger(__name__)

config_option = click.option('--config', 'config_path', type=click.Path(dir_okay=False), help='Settings file')
set_option = click.option('--set', 'overrides', multiple=True, metavar='KEY=VALUE', help='Override a setting')


@click.group('segprompt', help="The SegPrompt CLI tool")
@click.option('--verbose', '-v', count=True, help='Log progress on stderr, repeat for more detail')
def cli(verbose):
    configure_logging(verbose)


def show_version(ctx, param, value):
    if not value:
        return

    echo(f'Version: v{__version__}')
    ctx.exit()


version_options = click.Option(
    ['--version'],
    is_flag=True,
    expose_value=False,
    is_eager=True,
    callback=show_version,
    help='Show package version'
)


def _settings(config_path, overrides, **shortcuts) -> Settings:
    extra = [f'{key}={value}' for key, value in shortcuts.items() if value is not None]
    return Settings.load(config_path, list(overrides) + extra)


@cli.command('cfpg', help='Generate a foreground point prompt inside a box')
@click.argument('image', type=click.Path(dir_okay=False))
@click.option('--box', '-b', required=True, metavar='X1,Y1,X2,Y2', help='Half-open pixel box')
@config_option
@set_option
@click.option('--seed', type=int, help='Clustering seed')
@click.option('--tau', type=float, help='Marker threshold as a share of the largest distance')
@click.option('--output', '-o', type=click.Path(dir_okay=False), help='Write the prompt record here')
@click.option('--trace', is_flag=True, help='Add the intermediate regions to the record')
@handle_errors
def cmd_cfpg(image, box, config_path, overrides, seed, tau, output, trace):
    settings = _settings(config_path, overrides, CFPG_SEED=seed, CFPG_TAU=tau)
    raster = read_image(image)
    result = run_cfpg(raster, BoundingBox.parse(box), settings.cfpg_config())

    record = {
        'image': str(image),
        'box': result.box.as_list(),
        'points': [result.point.to_dict()],
        'version': __version__,
        'config_hash': settings.config_hash(),
    }
    if trace:
        record['trace'] = result.to_dict()
    emit(record, output)


@cli.command('refine', help='Refine the boundary of a coarse mask')
@click.argument('image', type=click.Path(dir_okay=False))
@click.argument('mask', type=click.Path(dir_okay=False))
@click.option('--output', '-o', required=True, type=click.Path(dir_okay=False), help='Refined mask file')
@click.option('--log', 'log_path', type=click.Path(dir_okay=False),
              help='Iteration log (default: the output path with a .json suffix)')
@config_option
@set_option
@click.option('--seed', type=int, help='Mixture seed')
@handle_errors
def cmd_refine(image, mask, output, log_path, config_path, overrides, seed):
    settings = _settings(config_path, overrides, MBO_SEED=seed)
    raster = read_image(image)
    initial = read_mask(mask)
    try:
        result = refine_mask(raster, initial, settings.mbo_config())
    except ShapeMismatchError as exc:
        exc.path = str(mask)
        raise

    write_mask(output, result.mask)
    log = {
        'image': str(image),
        'mask': str(mask),
        'output': str(output),
        'version': __version__,
        'config_hash': settings.config_hash(),
    }
    log.update(result.to_dict())
    write_json(log_path or Path(output).with_suffix('.json'), log)


@cli.command('eval', help='Compare predicted masks with ground truth masks of the same name')
@click.argument('pred_dir', type=click.Path(file_okay=False))
@click.argument('gt_dir', type=click.Path(file_okay=False))
@click.option('--categories', 'categories_path', type=click.Path(dir_okay=False),
              help='JSON object mapping file names to categories')
@config_option
@set_option
@click.option('--percent', is_flag=True, help='Report metrics in percent')
@click.option('--output', '-o', type=click.Path(dir_okay=False), help='Write the report here')
@click.pass_context
@handle_errors
def cmd_eval(ctx, pred_dir, gt_dir, categories_path, config_path, overrides, percent, output):
    settings = _settings(config_path, overrides)
    categories = read_json(categories_path) if categories_path else {}
    if not isinstance(categories, dict):
        raise ImageIOError('Category map must be a JSON object', path=categories_path)

    predictions, truths = image_files(pred_dir), image_files(gt_dir)
    skipped = sorted(set(predictions) ^ set(truths))
    records = []
    for name in sorted(set(predictions) & set(truths)):
        pred, gt = read_mask(predictions[name]), read_mask(truths[name])
        try:
            records.append(iou(pred, gt, sample_id=name, category=categories.get(name)))
        except ShapeMismatchError as exc:
            exc.path = str(predictions[name])
            raise

    if records:
        data = replace(aggregate(records, settings.thresholds), skipped=skipped).to_dict(percent)
    else:
        # no pair to score: report only what was skipped
        logger.warning('No file name is present in both %s and %s', pred_dir, gt_dir)
        data = {'n_samples': 0, 'skipped': skipped, 'scale': 'percent' if percent else 'unit'}
    data['samples'] = [{'id': r.sample_id, 'iou': r.iou, 'intersection': r.intersection, 'union': r.union}
                       for r in records]
    data['config_hash'] = settings.config_hash()
    emit(data, output)
    if skipped or not records:
        ctx.exit(4)


@cli.command('synth', help='Render synthetic scenes with ground truth masks and boxes')
@click.argument('spec_path', metavar='SPEC_JSON', type=click.Path(dir_okay=False))
@click.option('--count', '-n', default=1, show_default=True, type=click.IntRange(min=1), help='Number of scenes')
@click.option('--seed', type=int, help='Seed replacing the one of the spec')
@click.option('--out', '-o', 'out_dir', required=True, type=click.Path(file_okay=False), help='Output directory')
@handle_errors
def cmd_synth(spec_path, count, seed, out_dir):
    data = read_json(spec_path, error=SpecError)
    if not isinstance(data, dict):
        raise SpecError('Scene spec must be a JSON object', path=spec_path)
    spec = SceneSpec.from_dict(data)
    if seed is not None:
        spec = replace(spec, seed=seed)

    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ImageIOError(f'Cannot create directory: {exc.strerror}', path=out)

    for index in range(count):
        scene = generate(spec, index=index)
        stem = f'scene_{index:04d}'
        write_image(out / f'{stem}.png', scene.image)
        write_mask(out / f'{stem}_mask.png', scene.gt_mask)
        record = scene.to_dict()
        record.update(image=f'{stem}.png', mask=f'{stem}_mask.png', spec=spec.to_dict(), version=__version__)
        write_json(out / f'{stem}.json', record)
    echo(f'Wrote {count} scenes to {out}')


cli.add_command(bench)


def main():
    cli.params.append(version_options)
    cli()


if __name__ == '__main__':
    main()
