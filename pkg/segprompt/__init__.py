import sys

from segprompt.about import PY_VERSION
from segprompt.core.exceptions import PyVersionInvalid

# Python Version check
if sys.version_info[:2] < tuple(int(part) for part in PY_VERSION.split('.')[:2]):
    raise PyVersionInvalid(f'Python version must be greater than or equal to {PY_VERSION}')


from segprompt.core import exceptions
from segprompt.core.raster import BinaryMask, BoundingBox, PointPrompt, RasterImage, crop_roi, roi_to_image
from segprompt.cfpg import CfpgConfig, generate_point, run_cfpg
from segprompt.mbo import MboConfig, refine_mask
from segprompt.evaluation.metrics import aggregate, iou
from segprompt.synth import SceneSpec, generate

__all__ = (
    "exceptions",
    "RasterImage",
    "BoundingBox",
    "PointPrompt",
    "BinaryMask",
    "crop_roi",
    "roi_to_image",
    "CfpgConfig",
    "generate_point",
    "run_cfpg",
    "MboConfig",
    "refine_mask",
    "iou",
    "aggregate",
    "SceneSpec",
    "generate",
)
