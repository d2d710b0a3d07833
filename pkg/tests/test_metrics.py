import numpy as np
import pytest

from segprompt.core.exceptions import EmptyInputError, ShapeMismatchError
from segprompt.core.raster import BinaryMask
from segprompt.evaluation.metrics import DEFAULT_THRESHOLDS, EvalRecord, aggregate, iou
from tests.utils import SEED, rect_mask


def record(value):
    return EvalRecord.from_counts('', int(round(value * 1000)), 1000)


def test_iou_examples():
    a = rect_mask(10, 10, 0, 0, 4, 4)
    b = rect_mask(10, 10, 2, 0, 6, 4)

    assert iou(a, a).iou == 1.0
    assert iou(a, b).iou == pytest.approx(8 / 24)
    assert iou(a, rect_mask(10, 10, 6, 6, 8, 8)).iou == 0.0
    assert iou(BinaryMask.empty(5, 5), BinaryMask.empty(5, 5)).iou == 1.0


def test_iou_shape_mismatch():
    with pytest.raises(ShapeMismatchError):
        iou(BinaryMask.empty(5, 5), BinaryMask.empty(5, 6))


def test_large_object_bias():
    report = aggregate([EvalRecord.from_counts('a', 10, 10), EvalRecord.from_counts('b', 0, 200)])

    assert report.miou == pytest.approx(0.5, abs=1e-12)
    assert report.oiou == pytest.approx(10 / 210, abs=1e-12)


def test_precision_is_strict():
    report = aggregate([record(0.6), record(0.4), record(0.9)], thresholds=(0.5, 0.6))

    assert report.precision[0.5] == pytest.approx(2 / 3)
    assert report.precision[0.6] == pytest.approx(1 / 3)


def test_single_perfect_record():
    report = aggregate([EvalRecord.from_counts('only', 42, 42)])

    assert report.oiou == report.miou == 1.0
    assert all(value == 1.0 for value in report.precision.values())


def test_random_record_sets():
    rng = np.random.default_rng(SEED)
    for _ in range(1000):
        n = int(rng.integers(1, 20))
        unions = rng.integers(0, 500, size=n)
        records = [EvalRecord.from_counts(f's{i}', int(rng.integers(0, u + 1)), int(u)) for i, u in enumerate(unions)]
        report = aggregate(records)
        ious = [r.iou for r in records]

        assert min(ious) - 1e-12 <= report.miou <= max(ious) + 1e-12
        values = [report.precision[x] for x in DEFAULT_THRESHOLDS]
        assert all(a >= b for a, b in zip(values, values[1:]))
        assert 0.0 <= report.oiou <= 1.0

        shuffled = [records[i] for i in rng.permutation(n)]
        assert aggregate(shuffled).oiou == pytest.approx(report.oiou, abs=1e-12)
        assert aggregate(records + records).miou == pytest.approx(report.miou, abs=1e-12)


def test_categories():
    records = [EvalRecord.from_counts('a', 1, 1, 'car'), EvalRecord.from_counts('b', 0, 1, 'car'),
               EvalRecord.from_counts('c', 1, 2, 'ship')]
    report = aggregate(records)

    assert report.category_miou == {'car': 0.5, 'ship': 0.5}
    assert report.category_mean == pytest.approx(0.5)
    assert report.to_dict()['category_miou'] == {'car': 0.5, 'ship': 0.5}


def test_partial_categories_are_ignored():
    records = [EvalRecord.from_counts('a', 1, 1, 'car'), EvalRecord.from_counts('b', 0, 1)]
    report = aggregate(records)

    assert report.category_miou is None
    assert 'category_miou' not in report.to_dict()


def test_empty_input():
    with pytest.raises(EmptyInputError):
        aggregate([])


def test_percent_report():
    report = aggregate([EvalRecord.from_counts('a', 1, 4), EvalRecord.from_counts('b', 3, 4)])
    data = report.to_dict(percent=True)

    assert data['miou'] == pytest.approx(50.0)
    assert data['pr@0.5'] == pytest.approx(50.0)
    assert data['pr@0.9'] == 0.0
    assert data['scale'] == 'percent'
    assert report.to_dict()['scale'] == 'unit'


def test_record_validation():
    with pytest.raises(ValueError):
        EvalRecord.from_counts('bad', 5, 3)
    with pytest.raises(ValueError):
        EvalRecord.from_counts('bad', -1, 3)
