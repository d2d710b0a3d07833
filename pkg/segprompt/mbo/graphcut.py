"""
Segmentation energy on the 8-connected pixel lattice and its exact
minimization by max-flow/min-cut.

The source terminal stands for foreground. A pixel left on the sink side pays
its source t-link, so ``cap(source -> i)`` is the cost of labeling ``i``
background and ``cap(i -> sink)`` the cost of labeling it foreground.
"""
import logging
import math
import typing as t
from dataclasses import dataclass, field
from enum import IntEnum

import maxflow
import numpy as np

from segprompt.core.exceptions import ConfigurationError, ShapeMismatchError
from segprompt.core.raster import BinaryMask, RasterImage
from segprompt.mbo.gmm import GmmModel

logger = logging.getLogger(__name__)

HARD = 1e9
DEFAULT_GAMMA = 50.0
DEFAULT_LAMBDA = 1.0

Costs = t.Tuple[np.ndarray, np.ndarray]

# the four forward 8-neighbor directions and their lengths
_DIRECTIONS = (
    ('right', 1.0),
    ('down', 1.0),
    ('down_right', math.sqrt(2.0)),
    ('down_left', math.sqrt(2.0)),
)


class TrimapLabel(IntEnum):
    FREE = 0
    HARD_FG = 1
    HARD_BG = 2


@dataclass(frozen=True)
class EnergyParams:
    gamma: float = DEFAULT_GAMMA
    lam: float = DEFAULT_LAMBDA
    beta: t.Optional[float] = None  # None: derived from the image contrast

    def __post_init__(self):
        if self.gamma <= 0 or self.lam <= 0:
            raise ConfigurationError('Energy gamma and lambda must be positive')
        if self.beta is not None and self.beta < 0:
            raise ConfigurationError('Energy beta must be non-negative')

    def resolve_beta(self, image: RasterImage) -> float:
        return contrast_beta(image) if self.beta is None else float(self.beta)


def _neighbor_differences(z: np.ndarray) -> t.Dict[str, np.ndarray]:
    """Squared color differences per forward direction, shaped like the edge arrays of :class:`GridGraph`."""
    return {
        'right': ((z[:, 1:] - z[:, :-1]) ** 2).sum(axis=2),
        'down': ((z[1:, :] - z[:-1, :]) ** 2).sum(axis=2),
        'down_right': ((z[1:, 1:] - z[:-1, :-1]) ** 2).sum(axis=2),
        # edge (i, j + 1) - (i + 1, j)
        'down_left': ((z[1:, :-1] - z[:-1, 1:]) ** 2).sum(axis=2),
    }


def contrast_beta(image: RasterImage) -> float:
    """
    ``1 / (2 * mean squared difference)`` over every 8-neighbor pair; 0 for a
    uniform image so that every smoothness weight equals ``lam * gamma / dist``.
    """
    differences = _neighbor_differences(image.to_unit())
    total = math.fsum(float(values.sum()) for values in differences.values())
    pairs = sum(values.size for values in differences.values())
    if pairs == 0 or total == 0.0:
        return 0.0
    return 1.0 / (2.0 * total / pairs)


def smoothness_weights(image: RasterImage, params: EnergyParams) -> t.Dict[str, np.ndarray]:
    beta = params.resolve_beta(image)
    differences = _neighbor_differences(image.to_unit())
    return {
        name: params.lam * params.gamma / distance * np.exp(-beta * differences[name])
        for name, distance in _DIRECTIONS
    }


@dataclass(frozen=True, eq=False)
class GridGraph:
    """
    Terminal capacities per pixel and symmetric n-link capacities per forward
    direction. ``constant`` is the data cost removed from the t-links when
    making them non-negative, so ``labeling energy = cut capacity + constant``.
    """
    source_caps: np.ndarray
    sink_caps: np.ndarray
    right: np.ndarray
    down: np.ndarray
    down_right: np.ndarray
    down_left: np.ndarray
    constant: float = 0.0

    @property
    def width(self) -> int:
        return int(self.source_caps.shape[1])

    @property
    def height(self) -> int:
        return int(self.source_caps.shape[0])

    def edges(self) -> t.Dict[str, np.ndarray]:
        return {'right': self.right, 'down': self.down, 'down_right': self.down_right, 'down_left': self.down_left}

    def cut_capacity(self, source_side: np.ndarray) -> float:
        """Capacity of the s-t cut that keeps ``source_side`` with the source."""
        source_side = np.asarray(source_side, dtype=bool)
        total = float(self.source_caps[~source_side].sum()) + float(self.sink_caps[source_side].sum())
        return total + _cut_links(source_side, self.edges())


@dataclass(frozen=True)
class FlowResult:
    flow_value: float
    source_side: np.ndarray = field(repr=False)


@dataclass
class FlowNetwork:
    """A general s-t network over ``n`` inner nodes."""
    n: int
    source_caps: t.List[float] = field(default_factory=list)
    sink_caps: t.List[float] = field(default_factory=list)
    arcs: t.List[t.Tuple[int, int, float, float]] = field(default_factory=list)

    def __post_init__(self):
        self.source_caps = list(self.source_caps) or [0.0] * self.n
        self.sink_caps = list(self.sink_caps) or [0.0] * self.n

    def add_terminal(self, node: int, source: float, sink: float) -> None:
        self.source_caps[node] += source
        self.sink_caps[node] += sink

    def add_arc(self, u: int, v: int, capacity: float, reverse: float = 0.0) -> None:
        self.arcs.append((u, v, capacity, reverse))

    def cut_capacity(self, source_side: t.Sequence[bool]) -> float:
        total = sum(self.source_caps[i] for i in range(self.n) if not source_side[i])
        total += sum(self.sink_caps[i] for i in range(self.n) if source_side[i])
        for u, v, capacity, reverse in self.arcs:
            if source_side[u] and not source_side[v]:
                total += capacity
            elif source_side[v] and not source_side[u]:
                total += reverse
        return total


def _cut_links(source_side: np.ndarray, edges: t.Dict[str, np.ndarray]) -> float:
    cuts = {
        'right': source_side[:, 1:] != source_side[:, :-1],
        'down': source_side[1:, :] != source_side[:-1, :],
        'down_right': source_side[1:, 1:] != source_side[:-1, :-1],
        'down_left': source_side[1:, :-1] != source_side[:-1, 1:],
    }
    return math.fsum(float(edges[name][cut].sum()) for name, cut in cuts.items())


def _as_trimap(trimap, shape: t.Tuple[int, int]) -> np.ndarray:
    if trimap is None:
        return np.full(shape, TrimapLabel.FREE, dtype=np.int8)
    trimap = np.asarray(trimap, dtype=np.int8)
    if trimap.shape != shape:
        raise ShapeMismatchError(f'Trimap of shape {trimap.shape} does not match image {shape}')
    return trimap


def data_costs(image: RasterImage, fg: GmmModel, bg: GmmModel) -> Costs:
    """``(-log P_F, -log P_B)`` per pixel, shaped like the image."""
    z = image.colors()
    shape = image.shape
    return -fg.log_prob(z).reshape(shape), -bg.log_prob(z).reshape(shape)


def build_graph(image: RasterImage, fg: GmmModel, bg: GmmModel, trimap=None,
                params: t.Optional[EnergyParams] = None, *, costs: t.Optional[Costs] = None,
                weights: t.Optional[t.Dict[str, np.ndarray]] = None) -> GridGraph:
    """
    Grid graph of the energy. ``costs`` and ``weights`` take the output of
    :func:`data_costs` and :func:`smoothness_weights` when already computed.
    """
    params = params or EnergyParams()
    trimap = _as_trimap(trimap, image.shape)
    cost_fg, cost_bg = costs if costs is not None else data_costs(image, fg, bg)

    free = trimap == TrimapLabel.FREE
    hard_fg = trimap == TrimapLabel.HARD_FG
    hard_bg = trimap == TrimapLabel.HARD_BG

    shift = np.where(free, np.minimum(cost_fg, cost_bg), 0.0)
    source_caps = np.where(free, cost_bg - shift, 0.0)
    sink_caps = np.where(free, cost_fg - shift, 0.0)
    source_caps[hard_fg] = HARD
    sink_caps[hard_bg] = HARD

    if weights is None:
        weights = smoothness_weights(image, params)
    return GridGraph(source_caps=source_caps, sink_caps=sink_caps, constant=math.fsum(shift.ravel()), **weights)


def _padded(values: np.ndarray, shape: t.Tuple[int, int], rows: slice, cols: slice) -> np.ndarray:
    out = np.zeros(shape, dtype=np.float64)
    out[rows, cols] = values
    return out


def _structure(dy: int, dx: int) -> np.ndarray:
    structure = np.zeros((3, 3), dtype=np.int64)
    structure[1 + dy, 1 + dx] = 1
    return structure


def _solve_grid(graph: GridGraph) -> FlowResult:
    shape = (graph.height, graph.width)
    g = maxflow.Graph[float]()
    nodes = g.add_grid_nodes(shape)
    g.add_grid_tedges(nodes, graph.source_caps, graph.sink_caps)

    # each weight sits on the node the edge leaves from
    g.add_grid_edges(nodes, weights=_padded(graph.right, shape, slice(None), slice(0, -1)),
                     structure=_structure(0, 1), symmetric=True)
    g.add_grid_edges(nodes, weights=_padded(graph.down, shape, slice(0, -1), slice(None)),
                     structure=_structure(1, 0), symmetric=True)
    g.add_grid_edges(nodes, weights=_padded(graph.down_right, shape, slice(0, -1), slice(0, -1)),
                     structure=_structure(1, 1), symmetric=True)
    g.add_grid_edges(nodes, weights=_padded(graph.down_left, shape, slice(0, -1), slice(1, None)),
                     structure=_structure(1, -1), symmetric=True)

    flow = float(g.maxflow())
    # get_grid_segments is True on the sink side
    source_side = ~np.asarray(g.get_grid_segments(nodes), dtype=bool)
    return FlowResult(flow_value=flow, source_side=source_side)


def _solve_network(network: FlowNetwork) -> FlowResult:
    g = maxflow.Graph[float]()
    nodes = g.add_nodes(network.n)
    for index in range(network.n):
        g.add_tedge(nodes[index], network.source_caps[index], network.sink_caps[index])
    for u, v, capacity, reverse in network.arcs:
        g.add_edge(nodes[u], nodes[v], capacity, reverse)
    flow = float(g.maxflow())
    source_side = np.array([g.get_segment(nodes[index]) == 0 for index in range(network.n)], dtype=bool)
    return FlowResult(flow_value=flow, source_side=source_side)


def max_flow(graph: t.Union[GridGraph, FlowNetwork]) -> FlowResult:
    """
    Exact maximum flow and a minimum cut. Nodes the solver leaves in neither
    search tree are reported on the source side.
    """
    if isinstance(graph, FlowNetwork):
        return _solve_network(graph)
    return _solve_grid(graph)


def segment(image: RasterImage, fg: GmmModel, bg: GmmModel, trimap=None,
            params: t.Optional[EnergyParams] = None) -> BinaryMask:
    graph = build_graph(image, fg, bg, trimap, params)
    result = max_flow(graph)
    logger.debug('Min cut of %dx%d grid: flow %.6g, %d foreground pixels',
                 graph.width, graph.height, result.flow_value, int(result.source_side.sum()))
    return BinaryMask(result.source_side)


def labeling_energy(image: RasterImage, mask: BinaryMask, fg: GmmModel, bg: GmmModel,
                    params: t.Optional[EnergyParams] = None, trimap=None, *, costs: t.Optional[Costs] = None,
                    weights: t.Optional[t.Dict[str, np.ndarray]] = None) -> float:
    """
    Data cost of the free pixels under their labels plus every cut n-link.
    Labels that contradict a hard trimap entry cost ``HARD`` each.
    """
    params = params or EnergyParams()
    mask.check_shape(image)
    trimap = _as_trimap(trimap, image.shape)
    labels = mask.bits
    cost_fg, cost_bg = costs if costs is not None else data_costs(image, fg, bg)

    free = trimap == TrimapLabel.FREE
    data = math.fsum(np.where(labels, cost_fg, cost_bg)[free].ravel())
    violations = int(np.count_nonzero((trimap == TrimapLabel.HARD_FG) & ~labels))
    violations += int(np.count_nonzero((trimap == TrimapLabel.HARD_BG) & labels))
    if weights is None:
        weights = smoothness_weights(image, params)
    return data + violations * HARD + _cut_links(labels, weights)
