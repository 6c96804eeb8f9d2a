"""Detector loading.

A "model" is any callable ``(gray_image) -> list[Detection]``.  Two
reference forms are supported:

* ``builtin:threshold`` — a dependency-free blob detector (background
  deviation threshold + connected components), useful for smoke tests and
  as a plumbing reference;
* ``module.path:attribute`` — an importable callable, e.g. a thin wrapper
  around a trained segmentation network.  The network itself stays a black
  box to this package.
"""

from __future__ import annotations

import importlib
from dataclasses import dataclass
from typing import Callable, List

import cv2
import numpy as np


class ModelLoadError(RuntimeError):
    """The requested model could not be loaded."""


@dataclass
class Detection:
    mask: np.ndarray     # bool (H, W)
    class_id: int
    score: float


def threshold_detector(min_area: int = 20, deviation: float = 0.1) -> Callable:
    """Blob detector: pixels deviating from the median intensity, labeled."""

    def detect(img: np.ndarray) -> List[Detection]:
        img = np.asarray(img, dtype=np.float64)
        fg = (np.abs(img - np.median(img)) > deviation).astype(np.uint8)
        n_labels, labels = cv2.connectedComponents(fg, connectivity=8)
        out: List[Detection] = []
        for label in range(1, n_labels):
            mask = labels == label
            if mask.sum() < min_area:
                continue
            strength = float(np.abs(img[mask] - np.median(img)).mean())
            out.append(Detection(mask=mask, class_id=0,
                                 score=min(1.0, round(4.0 * strength, 6))))
        return out

    return detect


def load_model(spec: str) -> Callable:
    """Resolve a model spec string to a detection callable."""
    if spec == "builtin:threshold":
        return threshold_detector()
    if ":" not in spec:
        raise ModelLoadError(
            f"model spec {spec!r} is neither builtin:threshold nor module:attribute")
    module_name, attr = spec.rsplit(":", 1)
    try:
        module = importlib.import_module(module_name)
        obj = getattr(module, attr)
    except (ImportError, AttributeError) as exc:
        raise ModelLoadError(f"cannot load model {spec!r}: {exc}") from exc
    if not callable(obj):
        raise ModelLoadError(f"model {spec!r} is not callable")
    return obj
