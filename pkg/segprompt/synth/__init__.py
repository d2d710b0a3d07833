from segprompt.synth.scenes import Scene, SceneSpec, ShapeKind, corrupt_mask, generate, jitter_box, shape_coverage

__all__ = (
    "Scene",
    "SceneSpec",
    "ShapeKind",
    "generate",
    "corrupt_mask",
    "jitter_box",
    "shape_coverage",
)
