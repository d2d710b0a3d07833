import json

import pytest
from click.testing import CliRunner

from segprompt.cli.cli import cli
from segprompt.mbo import gmm
from segprompt.synth.scenes import SceneSpec, ShapeKind, generate
from tests.utils import BRIGHT, DARK, SEED, rect_mask, two_tone


class BaseSceneSetup:
    # All scene tests must specify the spec they render
    SPEC: SceneSpec = None
    COUNT = 1

    @pytest.fixture(scope='class')
    def scenes(self):
        if self.SPEC is None:
            raise ValueError('Missing scene spec')
        return [generate(self.SPEC, index=index) for index in range(self.COUNT)]

    @pytest.fixture(scope='class')
    def scene(self, scenes):
        return scenes[0]


class BaseSquareSetup:
    """A noisy bright square on a dark canvas with color models fitted to the true split."""
    WIDTH = 48
    HEIGHT = 48
    SQUARE = (14, 14, 34, 34)
    NOISE = 4.0

    @pytest.fixture(scope='class')
    def gt(self):
        return rect_mask(self.WIDTH, self.HEIGHT, *self.SQUARE)

    @pytest.fixture(scope='class')
    def image(self, gt):
        return two_tone(gt, BRIGHT, DARK, noise=self.NOISE, seed=SEED)

    @pytest.fixture(scope='class')
    def models(self, image, gt):
        colors = image.colors()
        selected = gt.bits.ravel()
        fg = gmm.fit(colors[selected], components=2, seed=SEED)
        bg = gmm.fit(colors[~selected], components=2, seed=SEED)
        return fg, bg


class BaseCliSetup:
    SCENE_SPEC = {
        'width': 64,
        'height': 64,
        'shape': ShapeKind.RECTANGLE.value,
        'min_size': 20,
        'max_size': 30,
        'aspect_max': 1.5,
        'object_color': list(BRIGHT),
        'background_color': list(DARK),
        'object_noise': 4,
        'background_noise': 4,
        'jitter': 0.1,
    }
    COUNT = 3

    @pytest.fixture(scope='class')
    def runner(self):
        return CliRunner()

    @pytest.fixture(scope='class')
    def workspace(self, tmp_path_factory):
        return tmp_path_factory.mktemp('workspace')

    @pytest.fixture(scope='class')
    def spec_file(self, workspace):
        path = workspace / 'spec.json'
        path.write_text(json.dumps(self.SCENE_SPEC))
        return path

    @pytest.fixture(scope='class')
    def scene_dir(self, runner, workspace, spec_file):
        out = workspace / 'scenes'
        result = runner.invoke(cli, ['synth', str(spec_file), '--count', str(self.COUNT), '--seed', str(SEED),
                                     '--out', str(out)])
        assert result.exit_code == 0, result.output
        return out
