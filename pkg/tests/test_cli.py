import json
import shutil
from pathlib import Path

import click
import numpy as np
import pytest
from click.testing import CliRunner
from PIL import Image

from segprompt.cfpg.generator import contains_point
from segprompt.cli.cli import cli, version_options
from segprompt.cli.utils import read_mask, write_mask
from segprompt.core.raster import PointPrompt
from segprompt.synth.scenes import corrupt_mask
from segprompt.utils.version import __version__
from tests.fixtures import BaseCliSetup
from tests.utils import SEED


def error_details(result):
    return json.loads(result.stderr.strip().splitlines()[-1])


def padded_box(record, pad=6, size=64):
    x1, y1, x2, y2 = record['gt_box']
    return f'{max(0, x1 - pad)},{max(0, y1 - pad)},{min(size, x2 + pad)},{min(size, y2 + pad)}'


def test_version():
    probe = click.Command('probe', params=[version_options])
    result = CliRunner().invoke(probe, ['--version'])

    assert result.exit_code == 0
    assert result.output.strip() == f'Version: v{__version__}'


class TestSynth(BaseCliSetup):

    def test_files_written(self, scene_dir):
        for index in range(self.COUNT):
            stem = f'scene_{index:04d}'
            record = json.loads((scene_dir / f'{stem}.json').read_text())

            assert record['image'] == f'{stem}.png' and record['mask'] == f'{stem}_mask.png'
            assert record['spec']['shape'] == 'rectangle'
            assert record['version'] == __version__
            mask = read_mask(scene_dir / f'{stem}_mask.png')
            assert mask.count == record['gt_area']
            assert mask.bounding_box().as_list() == record['gt_box']

    def test_rerun_is_byte_identical(self, runner, workspace, spec_file, scene_dir):
        again = workspace / 'again'
        result = runner.invoke(cli, ['synth', str(spec_file), '-n', str(self.COUNT), '--seed', '0', '-o', str(again)])

        assert result.exit_code == 0
        assert sorted(p.name for p in again.iterdir()) == sorted(p.name for p in scene_dir.iterdir())
        for path in scene_dir.iterdir():
            assert (again / path.name).read_bytes() == path.read_bytes()

    def test_unsatisfiable_spec(self, runner, workspace):
        spec = workspace / 'huge.json'
        spec.write_text(json.dumps(dict(self.SCENE_SPEC, min_size=150, max_size=200)))
        result = runner.invoke(cli, ['synth', str(spec), '-o', str(workspace / 'huge')])

        assert result.exit_code == 5
        assert error_details(result)['kind'] == 'spec'

    def test_spec_must_be_object(self, runner, workspace):
        spec = workspace / 'list.json'
        spec.write_text('[1, 2]')
        result = runner.invoke(cli, ['synth', str(spec), '-o', str(workspace / 'list')])

        assert result.exit_code == 5

    def test_unwritable_output(self, runner, workspace, spec_file):
        blocker = workspace / 'blocker'
        blocker.write_text('')
        result = runner.invoke(cli, ['synth', str(spec_file), '-o', str(blocker / 'scenes')])

        assert result.exit_code == 2
        assert error_details(result)['kind'] == 'io'


class TestCfpg(BaseCliSetup):

    def test_prompt_record(self, runner, scene_dir):
        record = json.loads((scene_dir / 'scene_0000.json').read_text())
        box = padded_box(record)
        image = scene_dir / 'scene_0000.png'
        result = runner.invoke(cli, ['cfpg', str(image), '--box', box])

        assert result.exit_code == 0, result.stderr
        prompt = json.loads(result.stdout)
        assert prompt['box'] == [int(v) for v in box.split(',')]
        assert prompt['image'] == str(image)
        assert len(prompt['config_hash']) == 64
        point, = prompt['points']
        assert point['label'] == 1 and not point['fallback']

        mask = read_mask(scene_dir / 'scene_0000_mask.png')
        assert contains_point(mask, PointPrompt(point['x'], point['y']))

    def test_trace_and_output_file(self, runner, scene_dir, workspace):
        output = workspace / 'prompt.json'
        record = json.loads((scene_dir / 'scene_0001.json').read_text())
        result = runner.invoke(cli, ['cfpg', str(scene_dir / 'scene_0001.png'), '-b', padded_box(record),
                                     '--trace', '--tau', '0.4', '-o', str(output)])

        assert result.exit_code == 0, result.stderr
        assert result.stdout == ''
        prompt = json.loads(output.read_text())
        assert prompt['trace']['regions']

    def test_tau_changes_config_hash(self, runner, scene_dir):
        args = ['cfpg', str(scene_dir / 'scene_0000.png'), '-b', '0,0,64,64']
        first = json.loads(runner.invoke(cli, args).stdout)
        second = json.loads(runner.invoke(cli, args + ['--tau', '0.3']).stdout)

        assert first['config_hash'] != second['config_hash']

    def test_missing_image(self, runner, workspace):
        result = runner.invoke(cli, ['cfpg', str(workspace / 'missing.png'), '-b', '0,0,4,4'])

        assert result.exit_code == 2
        details = error_details(result)
        assert details['kind'] == 'io'
        assert details['path'].endswith('missing.png')

    @pytest.mark.parametrize('box', ['1,2,3', '10,10,10,20', '0,0,100,100', 'a,b,c,d'])
    def test_bad_box(self, runner, scene_dir, box):
        result = runner.invoke(cli, ['cfpg', str(scene_dir / 'scene_0000.png'), '--box', box])

        assert result.exit_code == 2
        assert error_details(result)['kind'] == 'box'

    def test_bad_setting(self, runner, scene_dir):
        result = runner.invoke(cli, ['cfpg', str(scene_dir / 'scene_0000.png'), '-b', '0,0,8,8',
                                     '--set', 'CFPG_TAU=2'])

        assert result.exit_code == 2
        assert error_details(result)['kind'] == 'config'


class TestRefine(BaseCliSetup):

    def test_refined_mask_and_log(self, runner, scene_dir, workspace):
        output = workspace / 'refined.png'
        result = runner.invoke(cli, ['refine', str(scene_dir / 'scene_0000.png'),
                                     str(scene_dir / 'scene_0000_mask.png'), '-o', str(output)])

        assert result.exit_code == 0, result.stderr
        refined = read_mask(output)
        assert refined.shape == (64, 64)
        log = json.loads(output.with_suffix('.json').read_text())
        assert not log['degenerate']
        assert log['iterations'] and log['output'] == str(output)
        assert log['foreground_pixels'] == refined.count

    def test_empty_mask_is_copied(self, runner, scene_dir, workspace):
        empty = workspace / 'empty.png'
        Image.fromarray(np.zeros((64, 64), dtype=np.uint8)).save(empty)
        output = workspace / 'empty_refined.png'
        log_path = workspace / 'empty_log.json'
        result = runner.invoke(cli, ['refine', str(scene_dir / 'scene_0000.png'), str(empty), '-o', str(output),
                                     '--log', str(log_path)])

        assert result.exit_code == 0
        assert read_mask(output).is_empty
        log = json.loads(log_path.read_text())
        assert log['degenerate'] and log['reason']
        assert log['iterations'] == []

    def test_size_mismatch(self, runner, scene_dir, workspace):
        small = workspace / 'small.png'
        Image.fromarray(np.full((32, 64), 255, dtype=np.uint8)).save(small)
        result = runner.invoke(cli, ['refine', str(scene_dir / 'scene_0000.png'), str(small),
                                     '-o', str(workspace / 'never.png')])

        assert result.exit_code == 3
        details = error_details(result)
        assert details['kind'] == 'shape'
        assert details['path'] == str(small)
        assert not (workspace / 'never.png').exists()


class TestEval(BaseCliSetup):

    @pytest.fixture(scope='class')
    def gt_dir(self, workspace, scene_dir):
        target = workspace / 'gt'
        target.mkdir()
        for path in scene_dir.glob('*_mask.png'):
            shutil.copy(path, target / path.name)
        return target

    def test_identical_masks(self, runner, gt_dir):
        result = runner.invoke(cli, ['eval', str(gt_dir), str(gt_dir)])

        assert result.exit_code == 0, result.stderr
        report = json.loads(result.stdout)
        assert report['n_samples'] == self.COUNT
        assert report['oiou'] == report['miou'] == 1.0
        assert report['pr@0.9'] == 1.0
        assert [sample['id'] for sample in report['samples']] == sorted(p.name for p in gt_dir.iterdir())

    def test_percent_and_categories(self, runner, gt_dir, workspace):
        categories = workspace / 'categories.json'
        categories.write_text(json.dumps({path.name: 'building' for path in gt_dir.iterdir()}))
        result = runner.invoke(cli, ['eval', str(gt_dir), str(gt_dir), '--percent', '--categories', str(categories)])

        report = json.loads(result.stdout)
        assert report['miou'] == 100.0
        assert report['category_miou'] == {'building': 100.0}
        assert report['scale'] == 'percent'

    def test_disjoint_masks(self, runner, gt_dir, workspace):
        pred = workspace / 'blank'
        pred.mkdir()
        for path in gt_dir.iterdir():
            Image.fromarray(np.zeros((64, 64), dtype=np.uint8)).save(pred / path.name)
        result = runner.invoke(cli, ['eval', str(pred), str(gt_dir)])

        report = json.loads(result.stdout)
        assert report['oiou'] == 0.0
        assert report['pr@0.5'] == 0.0

    def test_unmatched_files(self, runner, gt_dir, workspace):
        pred = workspace / 'partial'
        pred.mkdir()
        names = sorted(path.name for path in gt_dir.iterdir())
        shutil.copy(gt_dir / names[0], pred / names[0])
        shutil.copy(gt_dir / names[0], pred / 'extra.png')
        output = workspace / 'partial.json'
        result = runner.invoke(cli, ['eval', str(pred), str(gt_dir), '-o', str(output)])

        assert result.exit_code == 4
        report = json.loads(output.read_text())
        assert report['n_samples'] == 1
        assert report['skipped'] == sorted(names[1:] + ['extra.png'])

    def test_no_matching_names(self, runner, workspace):
        pred, gt = workspace / 'only_pred', workspace / 'only_gt'
        pred.mkdir()
        gt.mkdir()
        blank = Image.fromarray(np.zeros((8, 8), dtype=np.uint8))
        blank.save(pred / 'a.png')
        blank.save(gt / 'b.png')
        result = runner.invoke(cli, ['eval', str(pred), str(gt)])

        assert result.exit_code == 4
        report = json.loads(result.stdout)
        assert report['n_samples'] == 0
        assert report['skipped'] == ['a.png', 'b.png']
        assert report['samples'] == []
        assert 'oiou' not in report

    def test_missing_directory(self, runner, gt_dir, workspace):
        result = runner.invoke(cli, ['eval', str(workspace / 'nowhere'), str(gt_dir)])

        assert result.exit_code == 2
        assert error_details(result)['kind'] == 'io'


class TestBench(BaseCliSetup):

    def test_prompts(self, runner):
        result = runner.invoke(cli, ['bench', 'prompts', '--count', '3', '--seed', '1'])

        assert result.exit_code == 0, result.stderr
        table = json.loads(result.stdout)
        assert table['count'] == 3
        assert [row['variant'] for row in table['rows']] == ['box center', 'generated point']
        assert all(0.0 <= row['containment'] <= 1.0 for row in table['rows'])

    def test_refine(self, runner, workspace):
        output = workspace / 'bench.json'
        result = runner.invoke(cli, ['bench', 'refine', '--count', '2', '--percent', '-o', str(output)])

        assert result.exit_code == 0, result.stderr
        table = json.loads(output.read_text())
        assert [row['variant'] for row in table['rows']] == ['coarse mask', 'refined mask']
        assert all(row['scale'] == 'percent' for row in table['rows'])


class TestPipeline(BaseCliSetup):

    @staticmethod
    def invoke(runner, *args):
        result = runner.invoke(cli, list(args))
        assert result.exit_code == 0, result.stderr
        return result

    def run_pipeline(self, runner, spec_file, workspace):
        """synth, cfpg, refine and eval with relative paths inside a fresh directory."""
        with runner.isolated_filesystem(temp_dir=workspace) as root:
            self.invoke(runner, 'synth', str(spec_file), '-n', str(self.COUNT), '--seed', str(SEED), '-o', 'scenes')
            for name in ('gt', 'prompts', 'coarse', 'refined'):
                Path(name).mkdir()

            for index in range(self.COUNT):
                stem = f'scene_{index:04d}'
                record = json.loads(Path('scenes', f'{stem}.json').read_text())
                box = ','.join(str(value) for value in record['jittered_box'])
                shutil.copy(Path('scenes', f'{stem}_mask.png'), Path('gt', f'{stem}.png'))
                write_mask(Path('coarse', f'{stem}.png'),
                           corrupt_mask(read_mask(Path('gt', f'{stem}.png')), seed=index))

                self.invoke(runner, 'cfpg', f'scenes/{stem}.png', '--box', box, '-o', f'prompts/{stem}.json')
                self.invoke(runner, 'refine', f'scenes/{stem}.png', f'coarse/{stem}.png', '-o', f'refined/{stem}.png')

            self.invoke(runner, 'eval', 'refined', 'gt', '-o', 'report.json')
        return Path(root)

    def test_rerun_is_byte_identical(self, runner, spec_file, workspace):
        first = self.run_pipeline(runner, spec_file, workspace)
        second = self.run_pipeline(runner, spec_file, workspace)
        files = sorted(path.relative_to(first) for path in first.rglob('*') if path.is_file())

        assert Path('report.json') in files
        assert Path('prompts', 'scene_0000.json') in files
        assert Path('refined', 'scene_0000.json') in files
        assert files == sorted(path.relative_to(second) for path in second.rglob('*') if path.is_file())
        for name in files:
            assert (second / name).read_bytes() == (first / name).read_bytes(), name
