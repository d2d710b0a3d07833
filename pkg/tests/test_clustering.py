import numpy as np
import pytest

from segprompt.cfpg.clustering import (binarize_roi, central_window, foreground_cluster, kmeans_fit,
                                       kmeans_pp_init)
from segprompt.core.exceptions import DegenerateInputError
from segprompt.core.raster import RasterImage
from tests.utils import SEED, best_two_partition_inertia, rect_mask, two_tone


def gray(values):
    return np.array([[v, v, v] for v in values], dtype=np.float64)


@pytest.mark.parametrize('seed', range(10))
def test_pp_init_picks_one_centroid_per_group(seed):
    pixels = np.concatenate([np.zeros((50, 3)), np.ones((50, 3))])
    centroids = kmeans_pp_init(pixels, 2, seed)

    assert sorted(centroids[:, 0].tolist()) == [0.0, 1.0]


def test_pp_init_single_cluster_is_a_pixel():
    pixels = np.random.default_rng(SEED).random((20, 3))
    centroids = kmeans_pp_init(pixels, 1, SEED)

    assert any(np.array_equal(centroids[0], row) for row in pixels)


def test_pp_init_needs_distinct_pixels():
    with pytest.raises(DegenerateInputError):
        kmeans_pp_init(gray([0.1, 0.2, 0.3]), 4)


def test_fit_two_values():
    pixels = np.concatenate([np.zeros((4, 3)), np.ones((4, 3))])
    model = kmeans_fit(pixels, k=2, seed=SEED)

    assert sorted(model.centroids[:, 0].tolist()) == [0.0, 1.0]
    assert model.inertia == 0.0
    assert model.sizes().tolist() == [4, 4]


def test_fit_gray_partition():
    pixels = gray([.01, .02, .03, .10, .11, .12])
    model = kmeans_fit(pixels, k=2, seed=SEED)

    low = model.assignment[0]
    assert model.assignment.tolist() == [low] * 3 + [1 - low] * 3
    assert sorted(model.centroids[:, 0].tolist()) == pytest.approx([0.02, 0.11], abs=1e-12)


def test_fit_uniform_is_degenerate():
    pixels = np.tile([0.4, 0.5, 0.6], (30, 1))
    model = kmeans_fit(pixels, k=2, seed=SEED)

    assert model.degenerate
    assert np.array_equal(model.centroids, np.tile([0.4, 0.5, 0.6], (2, 1)))
    assert not model.assignment.any()


def test_fit_too_few_pixels():
    with pytest.raises(DegenerateInputError):
        kmeans_fit(gray([0.5]), k=2)


def test_fit_rejects_bad_parameters():
    with pytest.raises(ValueError):
        kmeans_fit(gray([0.1, 0.9]), max_iter=0)
    with pytest.raises(ValueError):
        kmeans_fit(gray([0.1, 0.9]), tol=-1.0)


def test_fit_inertia_never_increases():
    pixels = np.random.default_rng(SEED).random((300, 3))
    model = kmeans_fit(pixels, k=4, seed=SEED)
    history = model.inertia_history

    assert all(after <= before + 1e-12 for before, after in zip(history, history[1:]))
    assert model.inertia == history[-1]


def test_fit_is_deterministic():
    pixels = np.random.default_rng(SEED).random((200, 3))
    assert kmeans_fit(pixels, k=3, seed=7).equals(kmeans_fit(pixels, k=3, seed=7))


def test_fit_matches_exhaustive_optimum():
    rng = np.random.default_rng(SEED)
    for _ in range(200):
        first = rng.random(3)
        direction = rng.normal(size=3)
        second = first + 0.6 * direction / np.linalg.norm(direction)
        sizes = rng.integers(2, 7, size=2)
        points = np.concatenate([
            first + rng.normal(0.0, 0.01, (sizes[0], 3)),
            second + rng.normal(0.0, 0.01, (sizes[1], 3)),
        ])
        model = kmeans_fit(points, k=2, seed=int(rng.integers(1000)))
        assert model.inertia == pytest.approx(best_two_partition_inertia(points), rel=1e-9, abs=1e-12)


def test_central_window():
    rows, cols = central_window(60, 40)
    assert (rows.start, rows.stop, cols.start, cols.stop) == (10, 30, 15, 45)


def test_binarize_picks_centered_square():
    square = rect_mask(60, 60, 20, 20, 40, 40)
    roi = two_tone(square, fg=(230, 230, 230), bg=(20, 20, 20))
    model = kmeans_fit(roi.colors(), k=2, seed=SEED)

    assert binarize_roi(roi, model) == square


def test_binarize_split_halves_tie():
    halves = rect_mask(10, 10, 0, 0, 5, 10)
    roi = two_tone(halves, fg=(200, 0, 0), bg=(0, 0, 200))
    model = kmeans_fit(roi.colors(), k=2, seed=SEED)

    assert foreground_cluster(model, 10, 10) == 0
    assert binarize_roi(roi, model) == binarize_roi(roi, model)
    assert binarize_roi(roi, model).count == 50


def test_binarize_uniform_roi_is_all_foreground():
    roi = RasterImage(np.full((12, 12, 3), 128, dtype=np.uint8))
    model = kmeans_fit(roi.colors(), k=2, seed=SEED)

    assert binarize_roi(roi, model).is_full
