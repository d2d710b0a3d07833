"""
Exact Euclidean distance transform, marker extraction and marker-based
watershed over the distance field.

The transform uses the separable lower-envelope-of-parabolas method (rows,
then columns), which is exact on the integer lattice. The watershed is a
priority flood on altitude ``-d`` ordered by ``(altitude, insertion order)``.
"""
import logging
import typing as t
from dataclasses import dataclass

import numba
import numpy as np
from scipy import ndimage

from segprompt.core.exceptions import EmptyMarkersError, NoBackgroundError, ShapeMismatchError
from segprompt.core.raster import BinaryMask
from segprompt.ops.morphology import StructuringElement, dilate

logger = logging.getLogger(__name__)

BOUNDARY = -1
BACKGROUND = 0
UNLABELED = -2  # internal to marker maps, never present in watershed output

_INF = 1e20
_FOUR_CONNECTED = ndimage.generate_binary_structure(2, 1)


@dataclass(frozen=True, eq=False)
class DistanceField:
    d: np.ndarray

    def __post_init__(self):
        self.d.setflags(write=False)

    @property
    def width(self) -> int:
        return int(self.d.shape[1])

    @property
    def height(self) -> int:
        return int(self.d.shape[0])

    @property
    def max(self) -> float:
        return float(self.d.max())

    def foreground(self) -> np.ndarray:
        return self.d > 0


@dataclass(frozen=True, eq=False)
class LabelMap:
    """Signed labels: -1 watershed boundary, 0 background, >= 1 region id."""
    labels: np.ndarray

    def __post_init__(self):
        self.labels.setflags(write=False)

    @property
    def width(self) -> int:
        return int(self.labels.shape[1])

    @property
    def height(self) -> int:
        return int(self.labels.shape[0])

    @property
    def region_ids(self) -> np.ndarray:
        ids = np.unique(self.labels)
        return ids[ids >= 1]

    @property
    def n_regions(self) -> int:
        return int(self.region_ids.size)


@numba.njit(cache=True)
def _envelope_1d(f, out, v, z):
    n = f.shape[0]
    k = 0
    v[0] = 0
    z[0] = -np.inf
    z[1] = np.inf
    for q in range(1, n):
        s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k])
        while s <= z[k]:
            k -= 1
            s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k])
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = np.inf
    k = 0
    for q in range(n):
        while z[k + 1] < q:
            k += 1
        offset = q - v[k]
        out[q] = offset * offset + f[v[k]]


@numba.njit(cache=True)
def _squared_edt(grid):
    height, width = grid.shape
    size = max(height, width)
    f = np.empty(size, dtype=np.float64)
    out = np.empty(size, dtype=np.float64)
    v = np.empty(size, dtype=np.int64)
    z = np.empty(size + 1, dtype=np.float64)
    rows = np.empty((height, width), dtype=np.float64)

    for i in range(height):
        for j in range(width):
            f[j] = grid[i, j]
        _envelope_1d(f[:width], out[:width], v[:width], z[:width + 1])
        for j in range(width):
            rows[i, j] = out[j]

    result = np.empty((height, width), dtype=np.float64)
    for j in range(width):
        for i in range(height):
            f[i] = rows[i, j]
        _envelope_1d(f[:height], out[:height], v[:height], z[:height + 1])
        for i in range(height):
            result[i, j] = out[i]
    return result


def distance_transform(mask: BinaryMask) -> DistanceField:
    bits = mask.bits
    if bits.all():
        raise NoBackgroundError()
    grid = np.where(bits, _INF, 0.0)
    squared = _squared_edt(grid)
    return DistanceField(np.sqrt(squared))


def extract_markers(field: DistanceField, binary: BinaryMask, tau: float = 0.5) -> LabelMap:
    """
    Foreground markers are the 4-connected components of ``d > tau * max(d)``
    numbered in scan order; the background marker is everything outside
    ``dilate(binary, square r=2)``; the rest is unlabeled.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError(f'tau must lie in (0, 1), got {tau}')
    if binary.shape != field.d.shape:
        raise ShapeMismatchError('Distance field and binary map differ in size')

    peak = field.max
    if peak <= 0.0:
        raise EmptyMarkersError()

    cores, count = ndimage.label(field.d > tau * peak, structure=_FOUR_CONNECTED)
    labels = np.full(field.d.shape, UNLABELED, dtype=np.int32)
    labels[~dilate(binary, StructuringElement.square(2)).bits] = BACKGROUND
    labels[cores > 0] = cores[cores > 0]
    logger.debug('Extracted %d foreground markers at threshold %.3f', count, tau * peak)
    return LabelMap(labels)


@numba.njit(cache=True)
def _heap_less(alt, order, a, b):
    if alt[a] != alt[b]:
        return alt[a] < alt[b]
    return order[a] < order[b]


@numba.njit(cache=True)
def _heap_push(heap, size, alt, order, node):
    heap[size] = node
    child = size
    while child > 0:
        parent = (child - 1) // 2
        if _heap_less(alt, order, heap[child], heap[parent]):
            heap[child], heap[parent] = heap[parent], heap[child]
            child = parent
        else:
            break
    return size + 1


@numba.njit(cache=True)
def _heap_pop(heap, size, alt, order):
    top = heap[0]
    size -= 1
    heap[0] = heap[size]
    parent = 0
    while True:
        left = 2 * parent + 1
        right = left + 1
        smallest = parent
        if left < size and _heap_less(alt, order, heap[left], heap[smallest]):
            smallest = left
        if right < size and _heap_less(alt, order, heap[right], heap[smallest]):
            smallest = right
        if smallest == parent:
            break
        heap[parent], heap[smallest] = heap[smallest], heap[parent]
        parent = smallest
    return top, size


@numba.njit(cache=True)
def _may_enter(label, is_foreground):
    # region basins flood the foreground, the background basin floods the rest
    if label >= 1:
        return is_foreground
    if label == 0:
        return not is_foreground
    return False


@numba.njit(cache=True)
def _flood(altitude, labels, foreground):
    height, width = labels.shape
    n = height * width
    alt = altitude.ravel()
    lab = labels.ravel().copy()
    fg = foreground.ravel()
    order = np.zeros(n, dtype=np.int64)
    queued = np.zeros(n, dtype=np.bool_)
    heap = np.empty(n, dtype=np.int64)
    size = 0
    counter = 0
    dy = (-1, 0, 0, 1)
    dx = (0, -1, 1, 0)

    for p in range(n):
        if lab[p] != -2:
            continue
        i = p // width
        j = p - i * width
        for m in range(4):
            ni = i + dy[m]
            nj = j + dx[m]
            if ni < 0 or ni >= height or nj < 0 or nj >= width:
                continue
            q = ni * width + nj
            if lab[q] != -2 and _may_enter(lab[q], fg[p]):
                order[p] = counter
                counter += 1
                queued[p] = True
                size = _heap_push(heap, size, alt, order, p)
                break

    while size > 0:
        p, size = _heap_pop(heap, size, alt, order)
        i = p // width
        j = p - i * width
        first = -2
        meets = False
        for m in range(4):
            ni = i + dy[m]
            nj = j + dx[m]
            if ni < 0 or ni >= height or nj < 0 or nj >= width:
                continue
            neighbor = lab[ni * width + nj]
            if neighbor == -2 or neighbor == -1 or not _may_enter(neighbor, fg[p]):
                continue
            if first == -2:
                first = neighbor
            elif neighbor != first:
                meets = True
        if meets:
            lab[p] = -1
            continue
        lab[p] = first
        for m in range(4):
            ni = i + dy[m]
            nj = j + dx[m]
            if ni < 0 or ni >= height or nj < 0 or nj >= width:
                continue
            q = ni * width + nj
            if lab[q] == -2 and not queued[q] and _may_enter(first, fg[q]):
                order[q] = counter
                counter += 1
                queued[q] = True
                size = _heap_push(heap, size, alt, order, q)

    for p in range(n):
        if lab[p] == -2:
            lab[p] = -1 if fg[p] else 0
    return lab.reshape(height, width)


def watershed(field: DistanceField, markers: LabelMap) -> LabelMap:
    """
    Flood the basins of altitude ``-d`` from the markers. A pixel reached while
    two different region labels touch it in 4-adjacency becomes a boundary (-1).
    """
    if markers.labels.shape != field.d.shape:
        raise ShapeMismatchError('Distance field and marker map differ in size')
    if not (markers.labels >= 1).any():
        raise EmptyMarkersError()

    labels = np.ascontiguousarray(markers.labels, dtype=np.int64)
    flooded = _flood(np.ascontiguousarray(-field.d), labels, np.ascontiguousarray(field.foreground()))
    return LabelMap(flooded.astype(np.int32))


def segment_binary(binary: BinaryMask, tau: float = 0.5) -> t.Tuple[DistanceField, LabelMap]:
    """Distance transform, markers and watershed in one call."""
    field = distance_transform(binary)
    markers = extract_markers(field, binary, tau)
    return field, watershed(field, markers)
