"""
Segmentation metrics: per-sample IoU, pooled (overall) IoU, mean IoU and the
share of samples whose IoU exceeds each threshold.
"""
import logging
import math
import typing as t
from collections import defaultdict
from dataclasses import dataclass, field

from segprompt.core.exceptions import EmptyInputError
from segprompt.core.raster import BinaryMask

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLDS = (0.5, 0.6, 0.7, 0.8, 0.9)


@dataclass(frozen=True)
class EvalRecord:
    sample_id: str
    intersection: int
    union: int
    iou: float
    category: t.Optional[str] = None

    def __post_init__(self):
        if not 0 <= self.intersection <= self.union:
            raise ValueError(f'Record {self.sample_id!r} needs 0 <= intersection <= union')

    @classmethod
    def from_counts(cls, sample_id: str, intersection: int, union: int,
                    category: t.Optional[str] = None) -> 'EvalRecord':
        value = 1.0 if union == 0 else intersection / union
        return cls(sample_id, int(intersection), int(union), value, category)


def iou(pred: BinaryMask, gt: BinaryMask, sample_id: str = '', category: t.Optional[str] = None) -> EvalRecord:
    """IoU of two masks of equal size; two empty masks agree perfectly (1.0)."""
    pred.check_shape(gt)
    intersection = int((pred.bits & gt.bits).sum())
    union = int((pred.bits | gt.bits).sum())
    return EvalRecord.from_counts(sample_id, intersection, union, category)


def _label(threshold: float) -> str:
    return f'pr@{threshold:g}'


@dataclass(frozen=True)
class MetricsReport:
    oiou: float
    miou: float
    precision: t.Dict[float, float]
    n_samples: int
    category_miou: t.Optional[t.Dict[str, float]] = None
    category_mean: t.Optional[float] = None
    skipped: t.List[str] = field(default_factory=list)

    def to_dict(self, percent: bool = False) -> t.Dict[str, t.Any]:
        """JSON-ready report; ``percent`` scales every ratio to 0-100."""
        scale = 100.0 if percent else 1.0
        data: t.Dict[str, t.Any] = {
            'n_samples': self.n_samples,
            'oiou': self.oiou * scale,
            'miou': self.miou * scale,
        }
        for threshold in sorted(self.precision):
            data[_label(threshold)] = self.precision[threshold] * scale
        if self.category_miou is not None:
            data['category_miou'] = {name: self.category_miou[name] * scale for name in sorted(self.category_miou)}
            data['category_mean'] = self.category_mean * scale
        if self.skipped:
            data['skipped'] = sorted(self.skipped)
        data['scale'] = 'percent' if percent else 'unit'
        return data


def aggregate(records: t.Sequence[EvalRecord],
              thresholds: t.Sequence[float] = DEFAULT_THRESHOLDS) -> MetricsReport:
    """
    Fold per-sample records into a report. ``miou`` is the per-sample mean;
    when every record carries a category a per-category table and the mean of
    its entries are added.

    :raises EmptyInputError: when ``records`` is empty.
    """
    records = list(records)
    if not records:
        raise EmptyInputError('Cannot aggregate an empty record list')

    n = len(records)
    total_union = sum(record.union for record in records)
    total_intersection = sum(record.intersection for record in records)
    oiou = 1.0 if total_union == 0 else total_intersection / total_union
    miou = math.fsum(record.iou for record in records) / n
    precision = {float(x): sum(1 for record in records if record.iou > x) / n for x in thresholds}

    category_miou = category_mean = None
    if all(record.category is not None for record in records):
        groups: t.Dict[str, t.List[float]] = defaultdict(list)
        for record in records:
            groups[record.category].append(record.iou)
        category_miou = {name: math.fsum(values) / len(values) for name, values in groups.items()}
        category_mean = math.fsum(category_miou.values()) / len(category_miou)

    logger.debug('Aggregated %d records: oIoU %.4f, mIoU %.4f', n, oiou, miou)
    return MetricsReport(oiou=oiou, miou=miou, precision=precision, n_samples=n,
                         category_miou=category_miou, category_mean=category_mean)
