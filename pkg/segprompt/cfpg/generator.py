"""
Box in, foreground point out.

The pipeline crops the box, splits its colors into two clusters, cleans the
tentative foreground map, separates it into watershed regions over the
distance transform and returns the centroid of the most convex region. Every
stage that cannot proceed resolves to a flagged fallback instead of an error.
"""
import logging
import math
import typing as t
from dataclasses import dataclass, field
from enum import Enum

from segprompt.cfpg.clustering import DEFAULT_MAX_ITER, DEFAULT_SEED, DEFAULT_TOL, ClusterModel, binarize_roi, kmeans_fit
from segprompt.core.exceptions import ConfigurationError, DegenerateInputError, EmptyMarkersError, NoBackgroundError
from segprompt.core.raster import BinaryMask, BoundingBox, PointPrompt, RasterImage, crop_roi, roi_to_image
from segprompt.ops.distance import LabelMap, segment_binary
from segprompt.ops.morphology import clean
from segprompt.ops.regions import RegionStats, centroid, connected_components, select_region

logger = logging.getLogger(__name__)


class FallbackStage(str, Enum):
    CLUSTER = 'cluster'
    NO_BACKGROUND = 'no_background'
    MARKERS = 'markers'
    REGIONS = 'regions'
    THRESHOLD = 'threshold'


@dataclass(frozen=True)
class CfpgConfig:
    seed: int = DEFAULT_SEED
    tau: float = 0.5
    area_threshold: int = 16
    area_fraction: float = 0.005
    morph_radius: int = 1
    max_iter: int = DEFAULT_MAX_ITER
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if not 0.0 < self.tau < 1.0:
            raise ConfigurationError(f'tau must lie in (0, 1), got {self.tau}')
        if self.morph_radius < 1:
            raise ConfigurationError(f'morph_radius must be at least 1, got {self.morph_radius}')
        if self.area_threshold < 0 or not 0.0 <= self.area_fraction < 1.0:
            raise ConfigurationError('Area threshold must be non-negative and the area fraction in [0, 1)')
        if self.max_iter < 1 or self.tol < 0:
            raise ConfigurationError('KMeans needs max_iter >= 1 and tol >= 0')

    def area_threshold_for(self, roi_area: int) -> float:
        """Absolute floor or the relative share of the ROI, whichever is larger."""
        return max(float(self.area_threshold), self.area_fraction * roi_area)


@dataclass(frozen=True, eq=False)
class CfpgResult:
    point: PointPrompt
    box: BoundingBox
    model: t.Optional[ClusterModel] = None
    binary: t.Optional[BinaryMask] = None
    labels: t.Optional[LabelMap] = None
    regions: t.List[RegionStats] = field(default_factory=list)
    selected: t.Optional[RegionStats] = None
    fallback_stage: t.Optional[FallbackStage] = None

    @property
    def fallback(self) -> bool:
        return self.point.fallback

    def to_dict(self) -> t.Dict[str, t.Any]:
        """Trace summary, ROI frame for the region figures."""
        return {
            'fallback_stage': self.fallback_stage.value if self.fallback_stage else None,
            'foreground_pixels': self.binary.count if self.binary is not None else None,
            'regions': [
                {'label': r.label, 'area': r.area, 'hull_area': r.hull_area,
                 'convexity': r.convexity, 'centroid': list(r.centroid)}
                for r in self.regions
            ],
            'selected': self.selected.label if self.selected is not None else None,
        }


def box_center(box: BoundingBox) -> PointPrompt:
    x, y = box.center
    return PointPrompt(x=x, y=y, fallback=True)


def run_cfpg(image: RasterImage, box: BoundingBox, cfg: t.Optional[CfpgConfig] = None) -> CfpgResult:
    cfg = cfg or CfpgConfig()
    roi = crop_roi(image, box)

    def fall_back(stage: FallbackStage, **trace) -> CfpgResult:
        logger.warning('Point generation fell back to the box center at stage %r for box %s',
                       stage.value, box.as_list())
        return CfpgResult(point=box_center(box), box=box, fallback_stage=stage, **trace)

    try:
        model = kmeans_fit(roi.colors(), k=2, seed=cfg.seed, max_iter=cfg.max_iter, tol=cfg.tol)
    except DegenerateInputError:
        return fall_back(FallbackStage.CLUSTER)
    if model.degenerate:
        return fall_back(FallbackStage.CLUSTER, model=model)

    binary = clean(binarize_roi(roi, model), cfg.morph_radius)
    try:
        _, labels = segment_binary(binary, cfg.tau)
    except NoBackgroundError:
        return fall_back(FallbackStage.NO_BACKGROUND, model=model, binary=binary)
    except EmptyMarkersError:
        return fall_back(FallbackStage.MARKERS, model=model, binary=binary)

    regions = connected_components(labels)
    selected = select_region(regions, cfg.area_threshold_for(roi.width * roi.height))
    if selected is None:
        return fall_back(FallbackStage.REGIONS, model=model, binary=binary, labels=labels)

    point = roi_to_image(centroid(selected), box)
    stage = FallbackStage.THRESHOLD if selected.fallback else None
    logger.debug('Selected region %d (area %d, convexity %.3f) of %d, point (%.2f, %.2f)',
                 selected.label, selected.area, selected.convexity, len(regions), point.x, point.y)
    return CfpgResult(point=point, box=box, model=model, binary=binary, labels=labels,
                      regions=regions, selected=selected, fallback_stage=stage)


def generate_point(image: RasterImage, box: BoundingBox, cfg: t.Optional[CfpgConfig] = None) -> PointPrompt:
    """
    Foreground point prompt in full-image coordinates, always inside ``box``.

    :raises InvalidBoxError: when the box is empty or leaves the image.
    """
    return run_cfpg(image, box, cfg).point


def contains_point(mask: BinaryMask, point: PointPrompt) -> bool:
    """Whether the pixel whose center is nearest to ``point`` is foreground."""
    x, y = int(math.floor(point.x + 0.5)), int(math.floor(point.y + 0.5))
    if not (0 <= x < mask.width and 0 <= y < mask.height):
        return False
    return bool(mask.bits[y, x])
