from segprompt.ops.distance import (BACKGROUND, BOUNDARY, DistanceField, LabelMap, distance_transform,
                                    extract_markers, segment_binary, watershed)
from segprompt.ops.morphology import (MorphKind, Shape, StructuringElement, clean, closing, dilate, erode, morph,
                                      opening, scaled_radius)
from segprompt.ops.regions import RegionStats, centroid, connected_components, convexity, select_region

__all__ = (
    "BACKGROUND",
    "BOUNDARY",
    "DistanceField",
    "LabelMap",
    "distance_transform",
    "extract_markers",
    "watershed",
    "segment_binary",
    "MorphKind",
    "Shape",
    "StructuringElement",
    "morph",
    "erode",
    "dilate",
    "opening",
    "closing",
    "clean",
    "scaled_radius",
    "RegionStats",
    "connected_components",
    "convexity",
    "select_region",
    "centroid",
)
