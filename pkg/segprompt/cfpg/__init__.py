from segprompt.cfpg.clustering import ClusterModel, binarize_roi, kmeans_fit, kmeans_pp_init
from segprompt.cfpg.generator import CfpgConfig, CfpgResult, FallbackStage, contains_point, generate_point, run_cfpg

__all__ = (
    "ClusterModel",
    "kmeans_pp_init",
    "kmeans_fit",
    "binarize_roi",
    "CfpgConfig",
    "CfpgResult",
    "FallbackStage",
    "run_cfpg",
    "generate_point",
    "contains_point",
)
