"""Bridge between instance-segmentation detectors and the scene-interchange
JSON format: prediction export and polygon training-label export."""

from .config import AdapterConfig, MappingError, parse_class_map
from .export import (
    UnlabeledScenesError,
    export_predictions,
    export_training_set,
    polygonize,
    rasterize,
)
from .models import Detection, ModelLoadError, load_model, threshold_detector
from .scenefile import SceneDoc, SceneFileError, SceneInstance, load_scene

__version__ = "0.1.0"

__all__ = [
    "AdapterConfig",
    "Detection",
    "MappingError",
    "ModelLoadError",
    "SceneDoc",
    "SceneFileError",
    "SceneInstance",
    "UnlabeledScenesError",
    "export_predictions",
    "export_training_set",
    "load_model",
    "load_scene",
    "parse_class_map",
    "polygonize",
    "rasterize",
    "threshold_detector",
]
