"""Focus-contrast agglomeration classification toolkit.

Given instance masks with per-instance focus levels, the pipeline builds a
touching-neighbor graph, measures each instance's contrast focus against
its neighbors, and thresholds it into agglomerated / non-agglomerated
classes.  Supporting modules cover classical focus measures, mask
post-processing, instance-blur augmentation, synthetic ground-truth
generation and evaluation metrics.
"""

from .contrast import (
    ClassificationConfig,
    ContrastMethod,
    ContrastResult,
    classify_agglomeration,
    contrast1,
    contrast2,
)
from .interchange import (
    AggloClass,
    BinaryMask,
    FocusLevel,
    InstanceRecord,
    Scene,
    SceneRole,
    load_scene,
    save_scene,
)

__all__ = [
    "AggloClass",
    "BinaryMask",
    "ClassificationConfig",
    "ContrastMethod",
    "ContrastResult",
    "FocusLevel",
    "InstanceRecord",
    "Scene",
    "SceneRole",
    "classify_agglomeration",
    "contrast1",
    "contrast2",
    "load_scene",
    "save_scene",
]

__version__ = "0.1.0"
