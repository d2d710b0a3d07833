"""
Deterministic synthetic scenes with exact ground truth.

A single object is rendered over a noisy, optionally graded background.
Coverage is decided by whether a pixel center falls inside the analytic shape,
so the ground-truth mask is exact.
"""
import logging
import math
import typing as t
from dataclasses import asdict, dataclass, field, fields
from enum import Enum

import numpy as np

from segprompt.core.exceptions import SpecError
from segprompt.core.raster import BinaryMask, BoundingBox, RasterImage
from segprompt.ops.morphology import StructuringElement, dilate

logger = logging.getLogger(__name__)

Seed = t.Union[int, t.Sequence[int]]
Color = t.Tuple[int, int, int]

MAX_JITTER = 0.3
_JITTER_ATTEMPTS = 8
_L_ARM = 0.4


class ShapeKind(str, Enum):
    RECTANGLE = 'rectangle'
    ROTATED_RECTANGLE = 'rotated_rectangle'
    ELLIPSE = 'ellipse'
    L_SHAPE = 'l_shape'


def _color(value, name: str) -> Color:
    try:
        color = tuple(int(channel) for channel in value)
    except (TypeError, ValueError):
        raise SpecError(f'{name} must be three integers')
    if len(color) != 3 or not all(0 <= channel <= 255 for channel in color):
        raise SpecError(f'{name} must be three integers in [0, 255], got {value!r}')
    return color


@dataclass(frozen=True)
class SceneSpec:
    """
    Scene parameters. ``size`` is the object's long side in pixels, drawn from
    ``[min_size, max_size]``; ``aspect`` (long / short) is drawn from
    ``[aspect_min, aspect_max]``. ``object_size``, ``angle`` and ``center``
    pin those draws when given. For ellipses the sides are the full axes.
    """
    width: int = 100
    height: int = 100
    shape: ShapeKind = ShapeKind.RECTANGLE
    min_size: float = 20.0
    max_size: float = 40.0
    aspect_min: float = 1.0
    aspect_max: float = 2.0
    object_color: Color = (200, 190, 170)
    background_color: Color = (60, 80, 60)
    object_noise: float = 6.0
    background_noise: float = 6.0
    gradient: float = 0.0
    distractors: int = 0
    distractor_color: Color = (120, 120, 130)
    jitter: float = 0.0
    seed: int = 0
    object_size: t.Optional[t.Tuple[float, float]] = None
    angle: t.Optional[float] = None
    center: t.Optional[t.Tuple[float, float]] = None

    def __post_init__(self):
        try:
            object.__setattr__(self, 'shape', ShapeKind(self.shape))
        except ValueError:
            raise SpecError(f'Unknown shape {self.shape!r}, expected one of '
                            f'{", ".join(kind.value for kind in ShapeKind)}')
        for name in ('object_color', 'background_color', 'distractor_color'):
            object.__setattr__(self, name, _color(getattr(self, name), name))
        if self.object_size is not None:
            object.__setattr__(self, 'object_size', tuple(float(v) for v in self.object_size))
        if self.center is not None:
            object.__setattr__(self, 'center', tuple(float(v) for v in self.center))

        if self.width < 1 or self.height < 1:
            raise SpecError('Canvas must be at least 1 x 1')
        if not 0 < self.min_size <= self.max_size:
            raise SpecError(f'Need 0 < min_size <= max_size, got {self.min_size} and {self.max_size}')
        if not 1.0 <= self.aspect_min <= self.aspect_max:
            raise SpecError('Need 1 <= aspect_min <= aspect_max')
        if not 0.0 <= self.jitter <= MAX_JITTER:
            raise SpecError(f'Box jitter must lie in [0, {MAX_JITTER}], got {self.jitter}')
        if self.object_noise < 0 or self.background_noise < 0 or self.distractors < 0:
            raise SpecError('Noise levels and distractor count must be non-negative')
        if self.object_size is not None and (len(self.object_size) != 2 or min(self.object_size) <= 0):
            raise SpecError('object_size must be two positive lengths')
        if self.max_size > max(self.width, self.height) * math.sqrt(2.0) and self.object_size is None:
            raise SpecError(f'Objects up to {self.max_size}px cannot fit a {self.width}x{self.height} canvas')

    @classmethod
    def from_dict(cls, data: t.Mapping[str, t.Any]) -> 'SceneSpec':
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise SpecError(f'Unknown scene spec keys: {", ".join(unknown)}')
        try:
            return cls(**data)
        except (TypeError, ValueError) as exc:
            raise SpecError(str(exc))

    def to_dict(self) -> t.Dict[str, t.Any]:
        data = asdict(self)
        data['shape'] = self.shape.value
        return data


@dataclass(frozen=True, eq=False)
class Scene:
    image: RasterImage
    gt_mask: BinaryMask
    gt_box: BoundingBox
    jittered_box: BoundingBox
    spec: SceneSpec = field(repr=False)
    index: t.Optional[int] = None

    def to_dict(self) -> t.Dict[str, t.Any]:
        return {
            'index': self.index,
            'seed': self.spec.seed,
            'shape': self.spec.shape.value,
            'width': self.image.width,
            'height': self.image.height,
            'gt_box': self.gt_box.as_list(),
            'jittered_box': self.jittered_box.as_list(),
            'gt_area': self.gt_mask.count,
        }


def _rng(seed: Seed, index: t.Optional[int] = None) -> np.random.Generator:
    if index is None:
        return np.random.default_rng(seed)
    base = list(seed) if isinstance(seed, (list, tuple)) else [seed]
    return np.random.default_rng(base + [index])


def _extent(sides: t.Tuple[float, float], angle: float) -> t.Tuple[float, float]:
    """Axis-aligned width and height of a rotated ``sides`` rectangle."""
    a, b = sides
    c, s = abs(math.cos(angle)), abs(math.sin(angle))
    return a * c + b * s, a * s + b * c


def shape_coverage(kind: ShapeKind, width: int, height: int, center: t.Tuple[float, float],
                   sides: t.Tuple[float, float], angle: float = 0.0) -> np.ndarray:
    """Boolean H x W coverage of an analytic shape by the pixel-center test."""
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    dx, dy = xs - center[0], ys - center[1]
    c, s = math.cos(angle), math.sin(angle)
    u = dx * c + dy * s
    v = -dx * s + dy * c
    a, b = sides

    if kind is ShapeKind.ELLIPSE:
        return (u / (a / 2.0)) ** 2 + (v / (b / 2.0)) ** 2 <= 1.0
    inside = (np.abs(u) < a / 2.0) & (np.abs(v) < b / 2.0)
    if kind is ShapeKind.L_SHAPE:
        # vertical arm on the left, horizontal arm along the bottom
        inside &= (u < -a / 2.0 + _L_ARM * a) | (v > b / 2.0 - _L_ARM * b)
    return inside


def _draw_geometry(spec: SceneSpec, rng: np.random.Generator):
    if spec.object_size is not None:
        sides = spec.object_size
    else:
        long_side = rng.uniform(spec.min_size, spec.max_size)
        sides = (long_side, long_side / rng.uniform(spec.aspect_min, spec.aspect_max))

    if spec.angle is not None:
        angle = math.radians(spec.angle)
    elif spec.shape is ShapeKind.ROTATED_RECTANGLE:
        angle = rng.uniform(0.0, math.pi)
    else:
        angle = 0.0

    extent_x, extent_y = _extent(sides, angle)
    if extent_x > spec.width or extent_y > spec.height:
        raise SpecError(f'Object of extent {extent_x:.1f}x{extent_y:.1f} does not fit a '
                        f'{spec.width}x{spec.height} canvas')
    if spec.center is not None:
        center = spec.center
    else:
        center = (rng.uniform(extent_x / 2.0, spec.width - extent_x / 2.0),
                  rng.uniform(extent_y / 2.0, spec.height - extent_y / 2.0))
    return sides, angle, center


def _background(spec: SceneSpec, rng: np.random.Generator) -> np.ndarray:
    base = np.broadcast_to(np.asarray(spec.background_color, dtype=np.float64),
                           (spec.height, spec.width, 3)).copy()
    if spec.gradient:
        direction = rng.uniform(0.0, 2.0 * math.pi)
        ys, xs = np.mgrid[0:spec.height, 0:spec.width].astype(np.float64)
        ramp = xs / max(spec.width - 1, 1) * math.cos(direction) + ys / max(spec.height - 1, 1) * math.sin(direction)
        base += spec.gradient * (ramp - ramp.min())[:, :, None]
    return base + rng.normal(0.0, spec.background_noise, base.shape) if spec.background_noise else base


def _distractors(spec: SceneSpec, rng: np.random.Generator, gt: np.ndarray) -> np.ndarray:
    covered = np.zeros_like(gt)
    ys, xs = np.mgrid[0:spec.height, 0:spec.width]
    for _ in range(spec.distractors):
        radius = rng.uniform(2.0, 4.0)
        cx, cy = rng.uniform(0, spec.width), rng.uniform(0, spec.height)
        covered |= (xs - cx) ** 2 + (ys - cy) ** 2 <= radius ** 2
    return covered & ~gt


def jitter_box(box: BoundingBox, jitter: float, width: int, height: int, gt: BinaryMask,
               rng: np.random.Generator) -> BoundingBox:
    """
    Move every edge of ``box`` by ``uniform(-jitter, jitter)`` times the box
    size, clamp to the canvas and halve the jitter until the box still
    overlaps ``gt``.
    """
    if jitter == 0:
        return box
    offsets = rng.uniform(-1.0, 1.0, size=4)
    scale = jitter
    for _ in range(_JITTER_ATTEMPTS):
        x1 = int(round(box.x1 + offsets[0] * scale * box.width))
        y1 = int(round(box.y1 + offsets[1] * scale * box.height))
        x2 = int(round(box.x2 + offsets[2] * scale * box.width))
        y2 = int(round(box.y2 + offsets[3] * scale * box.height))
        x1, x2 = max(0, min(x1, width - 1)), max(1, min(x2, width))
        y1, y2 = max(0, min(y1, height - 1)), max(1, min(y2, height))
        if x1 < x2 and y1 < y2:
            candidate = BoundingBox(x1, y1, x2, y2)
            if candidate.intersects(gt):
                return candidate
        scale /= 2.0
    logger.debug('Jitter could not keep overlap with the object, using the tight box')
    return box


def generate(spec: SceneSpec, index: t.Optional[int] = None) -> Scene:
    """
    Render one scene. The random stream depends on ``spec.seed`` alone, or on
    ``(spec.seed, index)`` when an index is given.

    :raises SpecError: when the object cannot be placed on the canvas.
    """
    rng = _rng(spec.seed, index)
    sides, angle, center = _draw_geometry(spec, rng)
    gt = shape_coverage(spec.shape, spec.width, spec.height, center, sides, angle)
    if not gt.any():
        raise SpecError(f'Object of sides {sides[0]:.1f}x{sides[1]:.1f} covers no pixel center')

    canvas = _background(spec, rng)
    distractors = _distractors(spec, rng, gt)
    if distractors.any():
        canvas[distractors] = np.asarray(spec.distractor_color, dtype=np.float64)
    obj = np.asarray(spec.object_color, dtype=np.float64)
    if spec.object_noise:
        obj = obj + rng.normal(0.0, spec.object_noise, (int(gt.sum()), 3))
    canvas[gt] = obj

    image = RasterImage(np.clip(np.rint(canvas), 0, 255).astype(np.uint8))
    gt_mask = BinaryMask(gt)
    gt_box = gt_mask.bounding_box()
    jittered = jitter_box(gt_box, spec.jitter, spec.width, spec.height, gt_mask, rng)
    return Scene(image=image, gt_mask=gt_mask, gt_box=gt_box, jittered_box=jittered, spec=spec, index=index)


def corrupt_mask(gt: BinaryMask, dilate_px: int = 3, salt: float = 0.05, seed: Seed = 0) -> BinaryMask:
    """Coarse mask model: ``gt`` dilated by a disk of ``dilate_px`` plus a ``salt`` share of random foreground pixels."""
    if dilate_px < 0 or not 0.0 <= salt < 1.0:
        raise SpecError('Corruption needs dilate_px >= 0 and salt in [0, 1)')
    mask = dilate(gt, StructuringElement.disk(dilate_px)) if dilate_px else gt
    if salt:
        noise = _rng(seed).random(gt.shape) < salt
        mask = mask | BinaryMask(noise)
    return mask