from segprompt.mbo.gmm import GmmModel, fit, log_prob, posterior
from segprompt.mbo.graphcut import (HARD, EnergyParams, FlowNetwork, FlowResult, GridGraph, TrimapLabel, build_graph,
                                    labeling_energy, max_flow, segment)
from segprompt.mbo.refine import IterationRecord, MboConfig, RefineResult, build_trimap, refine_mask

__all__ = (
    "GmmModel",
    "fit",
    "log_prob",
    "posterior",
    "HARD",
    "EnergyParams",
    "FlowNetwork",
    "FlowResult",
    "GridGraph",
    "TrimapLabel",
    "build_graph",
    "max_flow",
    "segment",
    "labeling_energy",
    "IterationRecord",
    "MboConfig",
    "RefineResult",
    "build_trimap",
    "refine_mask",
)
