"""
Raster value types shared by every stage.

Pixel coordinates follow the image convention: ``x`` is the column, ``y`` is
the row, and the center of pixel ``(x, y)`` sits at the integer point
``(x, y)``. Arrays are stored row-major as ``[y, x]``.
"""
import typing as t
from dataclasses import dataclass, replace

import numpy as np

from segprompt.core.exceptions import CoordinateError, InvalidBoxError, RasterError, ShapeMismatchError

FOREGROUND = 1


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


class RasterImage:
    """
    An H x W x 3 8-bit color raster. The pixel buffer is read-only.
    """
    channels = 3

    def __init__(self, data: np.ndarray) -> None:
        data = np.asarray(data)
        if data.ndim != 3 or data.shape[2] != self.channels:
            raise RasterError(f'Expected an H x W x 3 array, got shape {data.shape}')
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise RasterError('Raster must be at least 1 x 1')
        if data.dtype != np.uint8:
            raise RasterError(f'Raster samples must be 8-bit, got {data.dtype}')
        self._data = _frozen(np.array(data, dtype=np.uint8, copy=True))

    @classmethod
    def from_bytes(cls, width: int, height: int, payload: bytes) -> 'RasterImage':
        if len(payload) != width * height * cls.channels:
            raise RasterError('Payload length must equal width * height * 3')
        array = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, cls.channels)
        return cls(array)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RasterImage):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._data, other._data))

    def __repr__(self) -> str:
        return f'RasterImage(width={self.width}, height={self.height})'

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def width(self) -> int:
        return int(self._data.shape[1])

    @property
    def height(self) -> int:
        return int(self._data.shape[0])

    @property
    def shape(self) -> t.Tuple[int, int]:
        return self.height, self.width

    def pixel(self, x: int, y: int) -> t.Tuple[int, int, int]:
        r, g, b = self._data[y, x]
        return int(r), int(g), int(b)

    def to_unit(self) -> np.ndarray:
        """Samples as float64 in [0, 1], shape H x W x 3."""
        return self._data.astype(np.float64) / 255.0

    def colors(self) -> np.ndarray:
        """Flattened N x 3 unit-interval color matrix in row-major pixel order."""
        return self.to_unit().reshape(-1, self.channels)


class BinaryMask:
    """
    One foreground bit per pixel. Any nonzero input value counts as foreground.
    """

    def __init__(self, bits: np.ndarray) -> None:
        bits = np.asarray(bits)
        if bits.ndim != 2 or bits.shape[0] < 1 or bits.shape[1] < 1:
            raise RasterError(f'Mask must be a non-empty 2-D array, got shape {bits.shape}')
        self._bits = _frozen(np.array(bits != 0, dtype=bool, copy=True))

    @classmethod
    def empty(cls, width: int, height: int) -> 'BinaryMask':
        return cls(np.zeros((height, width), dtype=bool))

    @classmethod
    def full(cls, width: int, height: int) -> 'BinaryMask':
        return cls(np.ones((height, width), dtype=bool))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._bits, other._bits))

    def __repr__(self) -> str:
        return f'BinaryMask(width={self.width}, height={self.height}, count={self.count})'

    def __invert__(self) -> 'BinaryMask':
        return BinaryMask(~self._bits)

    def __and__(self, other: 'BinaryMask') -> 'BinaryMask':
        self.check_shape(other)
        return BinaryMask(self._bits & other.bits)

    def __or__(self, other: 'BinaryMask') -> 'BinaryMask':
        self.check_shape(other)
        return BinaryMask(self._bits | other.bits)

    @property
    def bits(self) -> np.ndarray:
        return self._bits

    @property
    def width(self) -> int:
        return int(self._bits.shape[1])

    @property
    def height(self) -> int:
        return int(self._bits.shape[0])

    @property
    def shape(self) -> t.Tuple[int, int]:
        return self.height, self.width

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self._bits))

    @property
    def is_empty(self) -> bool:
        return self.count == 0

    @property
    def is_full(self) -> bool:
        return self.count == self._bits.size

    def issubset(self, other: 'BinaryMask') -> bool:
        self.check_shape(other)
        return not bool(np.any(self._bits & ~other.bits))

    def bounding_box(self) -> t.Optional['BoundingBox']:
        """Tight half-open box around the foreground, ``None`` when empty."""
        rows = np.flatnonzero(self._bits.any(axis=1))
        cols = np.flatnonzero(self._bits.any(axis=0))
        if rows.size == 0:
            return None
        return BoundingBox(int(cols[0]), int(rows[0]), int(cols[-1]) + 1, int(rows[-1]) + 1)

    def check_shape(self, other: t.Union['BinaryMask', RasterImage]) -> None:
        if self.shape != other.shape:
            raise ShapeMismatchError(f'Dimensions {self.width}x{self.height} and '
                                     f'{other.width}x{other.height} differ')


@dataclass(frozen=True)
class BoundingBox:
    """Half-open pixel box ``[x1, x2) x [y1, y2)``."""
    x1: int
    y1: int
    x2: int
    y2: int

    @classmethod
    def parse(cls, text: str) -> 'BoundingBox':
        """Parse ``"x1,y1,x2,y2"``."""
        parts = [part.strip() for part in str(text).split(',')]
        if len(parts) != 4:
            raise InvalidBoxError(f'Box must have four comma separated integers, got {text!r}')
        try:
            x1, y1, x2, y2 = (int(part) for part in parts)
        except ValueError:
            raise InvalidBoxError(f'Box coordinates must be integers, got {text!r}')
        return cls(x1, y1, x2, y2)

    @property
    def width(self) -> int:
        return self.x2 - self.x1

    @property
    def height(self) -> int:
        return self.y2 - self.y1

    @property
    def area(self) -> int:
        return max(self.width, 0) * max(self.height, 0)

    @property
    def center(self) -> t.Tuple[float, float]:
        """Mean of the member pixel centers."""
        return (self.x1 + self.x2 - 1) / 2.0, (self.y1 + self.y2 - 1) / 2.0

    def as_list(self) -> t.List[int]:
        return [self.x1, self.y1, self.x2, self.y2]

    def contains(self, x: float, y: float) -> bool:
        return self.x1 <= x < self.x2 and self.y1 <= y < self.y2

    def validate(self, width: int, height: int) -> 'BoundingBox':
        if not (0 <= self.x1 < self.x2 <= width and 0 <= self.y1 < self.y2 <= height):
            raise InvalidBoxError(f'Box {self.as_list()} is empty or outside a {width}x{height} image')
        return self

    def intersects(self, mask: BinaryMask) -> bool:
        return bool(mask.bits[self.y1:self.y2, self.x1:self.x2].any())


@dataclass(frozen=True)
class PointPrompt:
    """A labeled point prompt; ``fallback`` marks points produced by a degenerate-input rule."""
    x: float
    y: float
    label: int = FOREGROUND
    fallback: bool = False

    def to_dict(self) -> t.Dict[str, t.Any]:
        return {'x': float(self.x), 'y': float(self.y), 'label': int(self.label), 'fallback': bool(self.fallback)}


def crop_roi(image: RasterImage, box: BoundingBox) -> RasterImage:
    box.validate(image.width, image.height)
    return RasterImage(image.data[box.y1:box.y2, box.x1:box.x2])


def crop_mask(mask: BinaryMask, box: BoundingBox) -> BinaryMask:
    box.validate(mask.width, mask.height)
    return BinaryMask(mask.bits[box.y1:box.y2, box.x1:box.x2])


def roi_to_image(point_in_roi: PointPrompt, box: BoundingBox) -> PointPrompt:
    if not (0 <= point_in_roi.x < box.width and 0 <= point_in_roi.y < box.height):
        raise CoordinateError(f'Point ({point_in_roi.x}, {point_in_roi.y}) is outside a '
                              f'{box.width}x{box.height} region of interest')
    return replace(point_in_roi, x=point_in_roi.x + box.x1, y=point_in_roi.y + box.y1)
