import itertools
import math
import typing as t

import numpy as np

from segprompt.core.raster import BinaryMask, RasterImage
from segprompt.mbo.graphcut import FlowNetwork

SEED = 0
DARK = (40, 60, 50)
BRIGHT = (220, 200, 180)


def rect_mask(width: int, height: int, x1: int, y1: int, x2: int, y2: int) -> BinaryMask:
    bits = np.zeros((height, width), dtype=bool)
    bits[y1:y2, x1:x2] = True
    return BinaryMask(bits)


def disk_bits(width: int, height: int, cx: float, cy: float, radius: float) -> np.ndarray:
    ys, xs = np.mgrid[0:height, 0:width]
    return (xs - cx) ** 2 + (ys - cy) ** 2 <= radius ** 2


def two_tone(mask: BinaryMask, fg=BRIGHT, bg=DARK, noise: float = 0.0, seed: int = SEED) -> RasterImage:
    """Image painted ``fg`` over ``mask`` and ``bg`` elsewhere, plus optional gaussian noise."""
    canvas = np.empty(mask.shape + (3,), dtype=np.float64)
    canvas[...] = np.asarray(bg, dtype=np.float64)
    canvas[mask.bits] = np.asarray(fg, dtype=np.float64)
    if noise:
        canvas += np.random.default_rng(seed).normal(0.0, noise, canvas.shape)
    return RasterImage(np.clip(np.rint(canvas), 0, 255).astype(np.uint8))


def brute_force_edt(bits: np.ndarray) -> np.ndarray:
    """Per-pixel minimum Euclidean distance to any background pixel."""
    height, width = bits.shape
    out = np.zeros((height, width), dtype=np.float64)
    background = np.argwhere(~bits)
    foreground = np.argwhere(bits)
    if foreground.size == 0:
        return out
    d2 = ((foreground[:, None, :] - background[None, :, :]) ** 2).sum(axis=2).min(axis=1)
    out[foreground[:, 0], foreground[:, 1]] = np.sqrt(d2.astype(np.float64))
    return out


def enumerate_min_cut(network: FlowNetwork) -> float:
    return min(network.cut_capacity(side) for side in itertools.product((False, True), repeat=network.n))


def best_two_partition_inertia(points: np.ndarray) -> float:
    """Smallest within-cluster sum of squares over every split into two nonempty groups."""
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    labels = np.array(list(itertools.product((False, True), repeat=n)), dtype=bool)
    counts = labels.sum(axis=1)
    valid = (counts > 0) & (counts < n)
    labels, counts = labels[valid], counts[valid]

    squares = (points ** 2).sum(axis=1)
    total_sum, total_squares = points.sum(axis=0), squares.sum()
    sums = labels.astype(np.float64) @ points
    inside = labels.astype(np.float64) @ squares
    rest_sums = total_sum[None, :] - sums
    rest_counts = n - counts
    inertia = (inside - (sums ** 2).sum(axis=1) / counts
               + (total_squares - inside) - (rest_sums ** 2).sum(axis=1) / rest_counts)
    return float(inertia.min())


def monotone_chain_area(points: t.Iterable[t.Tuple[float, float]]) -> float:
    """Convex hull area by Andrew's monotone chain and the shoelace formula."""
    pts = sorted(set(points))
    if len(pts) < 3:
        return 0.0

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    area = 0.0
    for (x1, y1), (x2, y2) in zip(hull, hull[1:] + hull[:1]):
        area += x1 * y2 - x2 * y1
    return abs(area) / 2.0


def pixel_corner_hull_area(pixels: np.ndarray) -> float:
    corners = [(float(x + dx), float(y + dy)) for x, y in pixels for dx in (0, 1) for dy in (0, 1)]
    return monotone_chain_area(corners)


def gaussian_density(z: np.ndarray, mean: np.ndarray, cov: np.ndarray) -> float:
    diff = z - mean
    norm = math.sqrt((2.0 * math.pi) ** len(z) * np.linalg.det(cov))
    return float(math.exp(-0.5 * diff @ np.linalg.solve(cov, diff)) / norm)
