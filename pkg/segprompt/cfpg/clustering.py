"""
KMeans++ seeding and Lloyd iterations over unit-interval color vectors, plus
the conversion of a two-cluster model into a tentative foreground map.
"""
import logging
import typing as t
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from segprompt.core.exceptions import DegenerateInputError
from segprompt.core.raster import BinaryMask, RasterImage

logger = logging.getLogger(__name__)

DEFAULT_SEED = 0
DEFAULT_MAX_ITER = 50
DEFAULT_TOL = 1e-4


@dataclass(frozen=True, eq=False)
class ClusterModel:
    k: int
    centroids: np.ndarray
    assignment: np.ndarray
    inertia: float
    n_iter: int = 0
    inertia_history: t.Tuple[float, ...] = field(default=(), repr=False)
    degenerate: bool = False

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.k)

    def equals(self, other: 'ClusterModel') -> bool:
        return (self.k == other.k and self.inertia == other.inertia
                and np.array_equal(self.centroids, other.centroids)
                and np.array_equal(self.assignment, other.assignment))


def _as_pixels(pixels) -> np.ndarray:
    pixels = np.asarray(pixels, dtype=np.float64)
    if pixels.ndim == 1:
        pixels = pixels[:, None]
    return pixels


def _squared_distances(pixels: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    diff = pixels[:, None, :] - centroids[None, :, :]
    return np.einsum('nkc,nkc->nk', diff, diff)


def _assign(pixels: np.ndarray, centroids: np.ndarray) -> t.Tuple[np.ndarray, np.ndarray]:
    d2 = _squared_distances(pixels, centroids)
    assignment = np.argmin(d2, axis=1)  # first minimum: ties go to the lowest index
    return assignment, d2[np.arange(pixels.shape[0]), assignment]


def _distinct_count(pixels: np.ndarray) -> int:
    return int(np.unique(pixels, axis=0).shape[0])


def kmeans_pp_init(pixels, k: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    """
    D^2-weighted seeding: the first centroid is a uniformly drawn pixel, every
    further one is drawn with probability proportional to its squared distance
    to the nearest centroid chosen so far.
    """
    pixels = _as_pixels(pixels)
    if k < 1:
        raise ValueError('k must be at least 1')
    if pixels.shape[0] < k or _distinct_count(pixels) < k:
        raise DegenerateInputError(f'Need at least {k} distinct pixels to seed {k} clusters')

    rng = np.random.default_rng(seed)
    n = pixels.shape[0]
    centroids = np.empty((k, pixels.shape[1]), dtype=np.float64)
    centroids[0] = pixels[rng.integers(n)]
    closest = _squared_distances(pixels, centroids[:1])[:, 0]

    for j in range(1, k):
        probabilities = closest / closest.sum()
        centroids[j] = pixels[rng.choice(n, p=probabilities)]
        closest = np.minimum(closest, _squared_distances(pixels, centroids[j:j + 1])[:, 0])
    return centroids


def _degenerate_model(pixels: np.ndarray, k: int) -> ClusterModel:
    distinct = np.unique(pixels, axis=0)
    padding = np.repeat(distinct[:1], k - distinct.shape[0], axis=0)
    centroids = np.concatenate([distinct, padding])
    assignment, d2 = _assign(pixels, centroids)
    inertia = float(d2.sum())
    logger.debug('Only %d distinct colors for k=%d, returning padded centroids', distinct.shape[0], k)
    return ClusterModel(k=k, centroids=centroids, assignment=assignment, inertia=inertia,
                        inertia_history=(inertia,), degenerate=True)


def kmeans_fit(pixels, k: int = 2, seed: int = DEFAULT_SEED, max_iter: int = DEFAULT_MAX_ITER,
               tol: float = DEFAULT_TOL) -> ClusterModel:
    """
    Lloyd iterations from the KMeans++ seeding. Stops when no centroid moves by
    ``tol`` or more, or after ``max_iter`` updates. An empty cluster is re-seeded
    at the point farthest from its current centroid.
    """
    pixels = _as_pixels(pixels)
    if max_iter < 1:
        raise ValueError('max_iter must be at least 1')
    if tol < 0:
        raise ValueError('tol must be non-negative')
    if pixels.shape[0] < k:
        raise DegenerateInputError(f'Cannot form {k} clusters from {pixels.shape[0]} pixels')
    if _distinct_count(pixels) < k:
        return _degenerate_model(pixels, k)

    centroids = kmeans_pp_init(pixels, k, seed)
    assignment, d2 = _assign(pixels, centroids)
    inertia = float(d2.sum())
    history = [inertia]

    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        updated = centroids.copy()
        sizes = np.bincount(assignment, minlength=k)
        for j in range(k):
            if sizes[j]:
                updated[j] = pixels[assignment == j].mean(axis=0)
        for j in np.flatnonzero(sizes == 0):
            farthest = int(np.argmax(d2))
            logger.debug('Cluster %d emptied, re-seeding at pixel %d', j, farthest)
            updated[j] = pixels[farthest]
            d2[farthest] = 0.0

        shift = float(np.sqrt(((updated - centroids) ** 2).sum(axis=1)).max())
        centroids = updated
        assignment, d2 = _assign(pixels, centroids)
        previous, inertia = inertia, float(d2.sum())
        history.append(inertia)
        logger.debug('Lloyd step %d: inertia %.6g, max centroid shift %.3g', n_iter, inertia, shift)
        if inertia > previous + 1e-9 * max(1.0, previous):
            raise AssertionError(f'Inertia increased from {previous} to {inertia}')
        if shift < tol:
            break

    return ClusterModel(k=k, centroids=centroids, assignment=assignment, inertia=inertia,
                        n_iter=n_iter, inertia_history=tuple(history))


def central_window(width: int, height: int) -> t.Tuple[slice, slice]:
    """Rows and columns of the central 50% x 50% window."""
    return slice(height // 4, height - height // 4), slice(width // 4, width - width // 4)


def foreground_cluster(model: ClusterModel, width: int, height: int) -> int:
    """
    Index of the cluster with the larger share of its members inside the
    central window; ties go to the smaller cluster, then to cluster 0.
    """
    if model.k != 2:
        raise ValueError(f'Foreground selection needs a two-cluster model, got k={model.k}')
    grid = model.assignment.reshape(height, width)
    rows, cols = central_window(width, height)
    inside = np.bincount(grid[rows, cols].ravel(), minlength=2)
    totals = np.bincount(model.assignment, minlength=2)

    # an empty cluster can never be foreground
    if not totals[1]:
        return 0
    if not totals[0]:
        return 1

    shares = [Fraction(int(inside[j]), int(totals[j])) for j in (0, 1)]
    if shares[0] != shares[1]:
        return 0 if shares[0] > shares[1] else 1
    return 1 if totals[1] < totals[0] else 0


def binarize_roi(roi: RasterImage, model: ClusterModel) -> BinaryMask:
    if model.assignment.size != roi.width * roi.height:
        raise ValueError('Cluster assignment does not cover the region of interest')
    chosen = foreground_cluster(model, roi.width, roi.height)
    return BinaryMask((model.assignment == chosen).reshape(roi.height, roi.width))
