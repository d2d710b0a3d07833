"""
Component ablations on synthetic ground truth.

``prompt_benchmark`` compares the generated point with the plain box center
on the same jittered boxes; ``refine_benchmark`` compares corrupted masks with
their refinements.
"""
import logging
import math
import typing as t
from dataclasses import dataclass, field, replace

from segprompt.cfpg.generator import CfpgConfig, box_center, contains_point, generate_point
from segprompt.evaluation.metrics import DEFAULT_THRESHOLDS, EvalRecord, MetricsReport, aggregate, iou
from segprompt.mbo.refine import MboConfig, refine_mask
from segprompt.synth.scenes import SceneSpec, ShapeKind, corrupt_mask, generate

logger = logging.getLogger(__name__)

# elongated noisy bars at arbitrary angles
PROMPT_SCENE = SceneSpec(width=100, height=100, shape=ShapeKind.ROTATED_RECTANGLE, min_size=40.0, max_size=70.0,
                         aspect_min=3.0, aspect_max=6.0, object_color=(210, 200, 180), background_color=(50, 70, 55),
                         object_noise=6.0, background_noise=6.0)
REFINE_SCENE = SceneSpec(width=96, height=96, shape=ShapeKind.ELLIPSE, min_size=24.0, max_size=44.0,
                         aspect_min=1.0, aspect_max=1.8, object_color=(210, 200, 180),
                         background_color=(50, 70, 55), object_noise=6.0, background_noise=6.0)


@dataclass(frozen=True)
class PromptBenchmark:
    count: int
    seed: int
    jitter: float
    cfpg_hits: int
    center_hits: int
    fallbacks: int

    @property
    def cfpg_rate(self) -> float:
        return self.cfpg_hits / self.count

    @property
    def center_rate(self) -> float:
        return self.center_hits / self.count

    def to_dict(self, percent: bool = False) -> t.Dict[str, t.Any]:
        scale = 100.0 if percent else 1.0
        return {
            'count': self.count,
            'seed': self.seed,
            'jitter': self.jitter,
            'rows': [
                {'variant': 'box center', 'containment': self.center_rate * scale},
                {'variant': 'generated point', 'containment': self.cfpg_rate * scale},
            ],
            'fallbacks': self.fallbacks,
            'scale': 'percent' if percent else 'unit',
        }


@dataclass(frozen=True)
class RefineBenchmark:
    count: int
    seed: int
    before: t.List[EvalRecord] = field(repr=False)
    after: t.List[EvalRecord] = field(repr=False)
    degenerate: int = 0
    thresholds: t.Tuple[float, ...] = DEFAULT_THRESHOLDS

    @property
    def improved_fraction(self) -> float:
        improved = sum(1 for old, new in zip(self.before, self.after) if new.iou > old.iou)
        return improved / self.count

    @property
    def mean_gain(self) -> float:
        return math.fsum(new.iou - old.iou for old, new in zip(self.before, self.after)) / self.count

    @property
    def report_before(self) -> MetricsReport:
        return aggregate(self.before, self.thresholds)

    @property
    def report_after(self) -> MetricsReport:
        return aggregate(self.after, self.thresholds)

    def to_dict(self, percent: bool = False) -> t.Dict[str, t.Any]:
        return {
            'count': self.count,
            'seed': self.seed,
            'rows': [
                dict(variant='coarse mask', **self.report_before.to_dict(percent)),
                dict(variant='refined mask', **self.report_after.to_dict(percent)),
            ],
            'improved_fraction': self.improved_fraction,
            'mean_gain': self.mean_gain,
            'degenerate': self.degenerate,
        }


def prompt_benchmark(count: int = 200, seed: int = 0, jitter: float = 0.15, cfg: t.Optional[CfpgConfig] = None,
                     spec: t.Optional[SceneSpec] = None) -> PromptBenchmark:
    """Share of scenes whose object contains the generated point, and the box center, for the same boxes."""
    if count < 1:
        raise ValueError('count must be at least 1')
    spec = replace(spec or PROMPT_SCENE, jitter=jitter, seed=seed)
    cfpg_hits = center_hits = fallbacks = 0
    for index in range(count):
        scene = generate(spec, index=index)
        point = generate_point(scene.image, scene.jittered_box, cfg)
        cfpg_hits += contains_point(scene.gt_mask, point)
        center_hits += contains_point(scene.gt_mask, box_center(scene.jittered_box))
        fallbacks += point.fallback
    logger.info('Prompt benchmark over %d scenes: generated %d hits, box center %d hits',
                count, cfpg_hits, center_hits)
    return PromptBenchmark(count=count, seed=seed, jitter=jitter, cfpg_hits=int(cfpg_hits),
                           center_hits=int(center_hits), fallbacks=int(fallbacks))


def refine_benchmark(count: int = 100, seed: int = 0, cfg: t.Optional[MboConfig] = None, dilate_px: int = 3,
                     salt: float = 0.05, spec: t.Optional[SceneSpec] = None,
                     thresholds: t.Sequence[float] = DEFAULT_THRESHOLDS) -> RefineBenchmark:
    """IoU against ground truth of corrupted masks before and after refinement."""
    if count < 1:
        raise ValueError('count must be at least 1')
    spec = replace(spec or REFINE_SCENE, seed=seed)
    before, after = [], []
    degenerate = 0
    for index in range(count):
        scene = generate(spec, index=index)
        coarse = corrupt_mask(scene.gt_mask, dilate_px=dilate_px, salt=salt, seed=[seed, index])
        result = refine_mask(scene.image, coarse, cfg)
        degenerate += result.degenerate
        sample_id = f'scene_{index:04d}'
        before.append(iou(coarse, scene.gt_mask, sample_id))
        after.append(iou(result.mask, scene.gt_mask, sample_id))
    benchmark = RefineBenchmark(count=count, seed=seed, before=before, after=after,
                                degenerate=int(degenerate), thresholds=tuple(thresholds))
    logger.info('Refinement benchmark over %d scenes: %.1f%% improved, mean gain %.4f',
                count, 100 * benchmark.improved_fraction, benchmark.mean_gain)
    return benchmark
