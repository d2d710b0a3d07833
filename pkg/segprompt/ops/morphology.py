"""
Binary morphology with square and disk structuring elements.

Pixels outside the frame count as background for every operation.
"""
import math
import typing as t
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import ndimage

from segprompt.core.raster import BinaryMask


class Shape(str, Enum):
    SQUARE = 'square'
    DISK = 'disk'


class MorphKind(str, Enum):
    ERODE = 'erode'
    DILATE = 'dilate'
    OPEN = 'open'
    CLOSE = 'close'


@dataclass(frozen=True)
class StructuringElement:
    shape: Shape = Shape.SQUARE
    radius: int = 1

    def __post_init__(self):
        object.__setattr__(self, 'shape', Shape(self.shape))
        if int(self.radius) != self.radius or self.radius < 1:
            raise ValueError(f'Structuring element radius must be an integer >= 1, got {self.radius}')

    @classmethod
    def square(cls, radius: int = 1) -> 'StructuringElement':
        return cls(Shape.SQUARE, radius)

    @classmethod
    def disk(cls, radius: int = 1) -> 'StructuringElement':
        return cls(Shape.DISK, radius)

    @property
    def footprint(self) -> np.ndarray:
        r = int(self.radius)
        if self.shape is Shape.SQUARE:
            return np.ones((2 * r + 1, 2 * r + 1), dtype=bool)
        yy, xx = np.mgrid[-r:r + 1, -r:r + 1]
        return xx * xx + yy * yy <= r * r


def _erode(bits: np.ndarray, footprint: np.ndarray) -> np.ndarray:
    return ndimage.binary_erosion(bits, structure=footprint, border_value=0)


def _dilate(bits: np.ndarray, footprint: np.ndarray) -> np.ndarray:
    return ndimage.binary_dilation(bits, structure=footprint, border_value=0)


def morph(kind: t.Union[MorphKind, str], mask: BinaryMask, se: StructuringElement) -> BinaryMask:
    kind = MorphKind(kind)
    footprint = se.footprint
    bits = mask.bits

    if kind is MorphKind.ERODE:
        out = _erode(bits, footprint)
    elif kind is MorphKind.DILATE:
        out = _dilate(bits, footprint)
    elif kind is MorphKind.OPEN:
        out = _dilate(_erode(bits, footprint), footprint)
    else:
        out = _erode(_dilate(bits, footprint), footprint)
    return BinaryMask(out)


def erode(mask: BinaryMask, se: StructuringElement) -> BinaryMask:
    return morph(MorphKind.ERODE, mask, se)


def dilate(mask: BinaryMask, se: StructuringElement) -> BinaryMask:
    return morph(MorphKind.DILATE, mask, se)


def opening(mask: BinaryMask, se: StructuringElement) -> BinaryMask:
    return morph(MorphKind.OPEN, mask, se)


def closing(mask: BinaryMask, se: StructuringElement) -> BinaryMask:
    return morph(MorphKind.CLOSE, mask, se)


def clean(mask: BinaryMask, radius: int = 1) -> BinaryMask:
    """Opening then closing with a square element, the cleanup applied to clustered ROIs."""
    se = StructuringElement.square(radius)
    return closing(opening(mask, se), se)


def scaled_radius(mask: BinaryMask, fraction: float = 0.02) -> int:
    """``max(1, floor(fraction * min(bbox width, bbox height)))`` of the mask's foreground."""
    box = mask.bounding_box()
    if box is None:
        return 1
    return max(1, int(math.floor(fraction * min(box.width, box.height))))
