import logging
import typing as t
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage
from scipy.spatial import ConvexHull

from segprompt.core.raster import PointPrompt
from segprompt.ops.distance import LabelMap

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RegionStats:
    label: int
    area: int
    hull_area: float
    convexity: float
    centroid: t.Tuple[float, float]
    fallback: bool = False
    pixels: np.ndarray = field(default=None, repr=False, compare=False)  # (N, 2) integer (x, y)

    @property
    def bbox(self) -> t.Tuple[int, int, int, int]:
        xs, ys = self.pixels[:, 0], self.pixels[:, 1]
        return int(xs.min()), int(ys.min()), int(xs.max()) + 1, int(ys.max()) + 1


def _hull_corners(pixels: np.ndarray) -> np.ndarray:
    # per row, the outer corners of the leftmost and rightmost pixel span the same hull
    xs, ys = pixels[:, 0], pixels[:, 1]
    rows = np.unique(ys)
    left = np.full(rows.size, np.iinfo(np.int64).max, dtype=np.int64)
    right = np.full(rows.size, np.iinfo(np.int64).min, dtype=np.int64)
    index = np.searchsorted(rows, ys)
    np.minimum.at(left, index, xs)
    np.maximum.at(right, index, xs)
    return np.concatenate([
        np.stack([left, rows], axis=1),
        np.stack([left, rows + 1], axis=1),
        np.stack([right + 1, rows], axis=1),
        np.stack([right + 1, rows + 1], axis=1),
    ]).astype(np.float64)


def shoelace(polygon: np.ndarray) -> float:
    x, y = polygon[:, 0], polygon[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def convexity(region_pixels: np.ndarray) -> t.Tuple[float, float]:
    """
    Hull area over the corner points of every member pixel, and the ratio
    ``area / hull_area``.

    :param region_pixels: (N, 2) array of integer ``(x, y)`` pixel coordinates.
    :return: ``(hull_area, kappa)``
    """
    pixels = np.unique(np.asarray(region_pixels, dtype=np.int64).reshape(-1, 2), axis=0)
    if pixels.shape[0] == 0:
        raise ValueError('Convexity of an empty pixel set is undefined')
    hull = ConvexHull(_hull_corners(pixels))
    hull_area = shoelace(hull.points[hull.vertices])
    return hull_area, pixels.shape[0] / hull_area


def _region(label: int, pixels: np.ndarray) -> RegionStats:
    hull_area, kappa = convexity(pixels)
    cx, cy = pixels.mean(axis=0)
    return RegionStats(label=int(label), area=int(pixels.shape[0]), hull_area=hull_area,
                       convexity=kappa, centroid=(float(cx), float(cy)), pixels=pixels)


def connected_components(labels: LabelMap) -> t.List[RegionStats]:
    """One :class:`RegionStats` per distinct region id; -1 and 0 pixels belong to no region."""
    regions = np.where(labels.labels >= 1, labels.labels, 0)
    stats = []
    for index, window in enumerate(ndimage.find_objects(regions), start=1):
        if window is None:
            continue
        ys, xs = np.nonzero(regions[window] == index)
        pixels = np.stack([xs + window[1].start, ys + window[0].start], axis=1).astype(np.int64)
        stats.append(_region(index, pixels))
    return stats


def select_region(stats: t.Sequence[RegionStats], area_threshold: float) -> t.Optional[RegionStats]:
    """
    The most convex region among those with ``area > area_threshold``; ties go
    to the larger area, then the smaller label. When no region passes the
    threshold the largest region is returned flagged as a fallback.
    """
    if not stats:
        return None

    candidates = [s for s in stats if s.area > area_threshold]
    if not candidates:
        largest = min(stats, key=lambda s: (-s.area, s.label))
        logger.warning('No region larger than %.1f px, falling back to region %d (%d px)',
                       area_threshold, largest.label, largest.area)
        return replace(largest, fallback=True)
    return min(candidates, key=lambda s: (-s.convexity, -s.area, s.label))


def centroid(region: RegionStats) -> PointPrompt:
    x, y = region.centroid
    return PointPrompt(x=x, y=y, fallback=region.fallback)
