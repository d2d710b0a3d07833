"""
Iterative mask boundary refinement.

The eroded initial mask is hard foreground, everything beyond a wider dilation
is hard background and the band between them is left to the energy minimizer.
Each outer iteration refits the two color mixtures on the current labeling and
recomputes the minimum cut.
"""
import logging
import typing as t
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from segprompt.core.exceptions import ConfigurationError
from segprompt.core.raster import BinaryMask, RasterImage
from segprompt.mbo import gmm
from segprompt.mbo.graphcut import (EnergyParams, TrimapLabel, build_graph, data_costs, labeling_energy, max_flow,
                                     smoothness_weights)
from segprompt.ops.morphology import StructuringElement, dilate, erode, scaled_radius

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MboConfig:
    erosion_fraction: float = 0.02
    band_factor: int = 3
    components: int = gmm.DEFAULT_COMPONENTS
    max_outer_iters: int = 5
    epsilon: float = 0.001
    em_max_iter: int = gmm.DEFAULT_MAX_ITER
    em_tol: float = gmm.DEFAULT_TOL
    reg_eps: float = gmm.DEFAULT_REG_EPS
    fit_samples: int = gmm.DEFAULT_FIT_SAMPLES
    seed: int = 0
    energy: EnergyParams = field(default_factory=EnergyParams)

    def __post_init__(self):
        if self.max_outer_iters < 1:
            raise ConfigurationError(f'max_outer_iters must be at least 1, got {self.max_outer_iters}')
        if not 0.0 <= self.epsilon < 1.0:
            raise ConfigurationError(f'epsilon must lie in [0, 1), got {self.epsilon}')
        if self.erosion_fraction <= 0 or self.band_factor < 1:
            raise ConfigurationError('Erosion fraction must be positive and the band factor at least 1')
        if self.fit_samples < 0:
            raise ConfigurationError(f'fit_samples must be non-negative, got {self.fit_samples}')
        if self.components < 1 or self.em_max_iter < 1 or self.em_tol < 0 or self.reg_eps <= 0:
            raise ConfigurationError('Mixture settings need components >= 1, em_max_iter >= 1, '
                                     'em_tol >= 0 and reg_eps > 0')

    def radii(self, mask: BinaryMask) -> t.Tuple[int, int]:
        """Erosion radius of the hard foreground and dilation radius of the free band."""
        erosion = scaled_radius(mask, self.erosion_fraction)
        return erosion, self.band_factor * erosion


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    energy_before: float
    energy_after: float
    flow: float
    changed_pixels: int
    changed_fraction: float

    def to_dict(self) -> t.Dict[str, t.Any]:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class RefineResult:
    mask: BinaryMask
    iterations: t.List[IterationRecord] = field(default_factory=list)
    degenerate: bool = False
    reason: t.Optional[str] = None
    erosion_radius: t.Optional[int] = None
    band_radius: t.Optional[int] = None
    trimap: t.Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def converged(self) -> bool:
        return bool(self.iterations) and self.iterations[-1].changed_pixels == 0

    def to_dict(self) -> t.Dict[str, t.Any]:
        return {
            'degenerate': self.degenerate,
            'reason': self.reason,
            'erosion_radius': self.erosion_radius,
            'band_radius': self.band_radius,
            'foreground_pixels': self.mask.count,
            'iterations': [record.to_dict() for record in self.iterations],
        }


def build_trimap(initial: BinaryMask, erosion_radius: int, band_radius: int) -> np.ndarray:
    trimap = np.full(initial.shape, TrimapLabel.FREE, dtype=np.int8)
    trimap[~dilate(initial, StructuringElement.disk(band_radius)).bits] = TrimapLabel.HARD_BG
    trimap[erode(initial, StructuringElement.disk(erosion_radius)).bits] = TrimapLabel.HARD_FG
    return trimap


def _fit_side(pixels: np.ndarray, cfg: MboConfig, init: t.Optional[gmm.GmmModel]) -> gmm.GmmModel:
    components = min(cfg.components, pixels.shape[0])
    return gmm.fit(pixels, components=components, seed=cfg.seed, max_iter=cfg.em_max_iter,
                   tol=cfg.em_tol, reg_eps=cfg.reg_eps, init=init, max_samples=cfg.fit_samples)


def refine_mask(image: RasterImage, initial: BinaryMask, cfg: t.Optional[MboConfig] = None) -> RefineResult:
    """
    Refine ``initial`` against ``image``. Degenerate inputs (empty or full
    masks, or a mask whose erosion leaves no seed) come back unchanged with
    ``degenerate`` set.

    :raises ShapeMismatchError: when mask and image differ in size.
    """
    cfg = cfg or MboConfig()
    initial.check_shape(image)

    def unchanged(reason: str, **extra) -> RefineResult:
        logger.warning('Mask refinement skipped: %s', reason)
        return RefineResult(mask=initial, degenerate=True, reason=reason, **extra)

    if initial.is_empty:
        return unchanged('empty mask')
    if initial.is_full:
        return unchanged('mask covers the whole image')

    erosion_radius, band_radius = cfg.radii(initial)
    trimap = build_trimap(initial, erosion_radius, band_radius)
    radii = {'erosion_radius': erosion_radius, 'band_radius': band_radius}
    if not (trimap == TrimapLabel.HARD_FG).any():
        return unchanged(f'erosion with radius {erosion_radius} leaves no foreground seed', **radii)

    params = replace(cfg.energy, beta=cfg.energy.resolve_beta(image))
    weights = smoothness_weights(image, params)
    colors = image.colors()
    total = initial.bits.size
    current = initial
    fg_model: t.Optional[gmm.GmmModel] = None
    bg_model: t.Optional[gmm.GmmModel] = None
    records: t.List[IterationRecord] = []

    for iteration in range(1, cfg.max_outer_iters + 1):
        selected = current.bits.ravel()
        fg_model = _fit_side(colors[selected], cfg, fg_model)
        bg_model = _fit_side(colors[~selected], cfg, bg_model)

        costs = data_costs(image, fg_model, bg_model)
        energy_before = labeling_energy(image, current, fg_model, bg_model, params, trimap,
                                        costs=costs, weights=weights)
        result = max_flow(build_graph(image, fg_model, bg_model, trimap, params, costs=costs, weights=weights))
        updated = BinaryMask(result.source_side)
        energy_after = labeling_energy(image, updated, fg_model, bg_model, params, trimap,
                                       costs=costs, weights=weights)

        changed = int(np.count_nonzero(updated.bits != current.bits))
        record = IterationRecord(iteration=iteration, energy_before=energy_before, energy_after=energy_after,
                                 flow=result.flow_value, changed_pixels=changed, changed_fraction=changed / total)
        records.append(record)
        logger.debug('Refinement iteration %d: energy %.6g -> %.6g, %d pixels changed',
                     iteration, energy_before, energy_after, changed)
        current = updated

        if changed == 0 or record.changed_fraction < cfg.epsilon:
            break
        if current.is_empty or current.is_full:
            logger.warning('Refinement iteration %d left a single label, stopping', iteration)
            break

    return RefineResult(mask=current, iterations=records, trimap=trimap, **radii)
