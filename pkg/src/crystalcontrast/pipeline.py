"""Glue between scenes, images, focus measures and contrast computation.

These helpers back the CLI subcommands: per-instance focus scoring for a
whole scene, focus-source resolution (binary labels vs a traditional
measure), and assembly of the class-separation report over a corpus.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

import numpy as np

from . import graph as graphmod
from . import raster
from .contrast import (
    ClassificationConfig,
    ContrastMethod,
    ReportRow,
    contrast_report,
    scene_contrasts,
)
from .errors import MissingLabelError, UsageError
from .focusmeas import FocusScore, Measure, load_gray, brenner, laplacian_variance, normalize_scores, reblur
from .interchange import FocusLevel, Scene, load_scene

FOCUS_SOURCES = ("label", "laplacian-mask", "laplacian-contour", "brenner", "reblur")


def _reblur_bbox(bbox, width, height):
    """Grow a bbox to at least 3x3, staying inside the image."""
    x0, y0, x1, y1 = bbox
    while x1 - x0 + 1 < 3:
        x0, x1 = max(0, x0 - 1), min(width - 1, x1 + 1)
    while y1 - y0 + 1 < 3:
        y0, y1 = max(0, y0 - 1), min(height - 1, y1 + 1)
    return x0, y0, x1, y1


def instance_focus_scores(
    img: np.ndarray, scene: Scene, measure: Measure
) -> dict[int, FocusScore]:
    """One focus score per instance, region semantics per measure."""
    out: dict[int, FocusScore] = {}
    for inst in scene.instances:
        mask = inst.mask.to_array()
        if measure is Measure.LAPLACIAN_MASK:
            out[inst.id] = laplacian_variance(img, mask, measure)
        elif measure is Measure.LAPLACIAN_CONTOUR:
            out[inst.id] = laplacian_variance(img, raster.contour(mask), measure)
        elif measure is Measure.BRENNER:
            out[inst.id] = brenner(img, mask)
        elif measure is Measure.REBLUR:
            out[inst.id] = reblur(img, _reblur_bbox(inst.bbox, scene.width, scene.height))
        else:
            raise ValueError(f"unknown measure {measure!r}")
    return out


def normalized_focus_values(
    img: np.ndarray, scene: Scene, measure: Measure
) -> dict[int, float]:
    """Per-scene normalized, sharper-is-higher focus values in [0, 1]."""
    ids = sorted(i.id for i in scene.instances)
    scores = instance_focus_scores(img, scene, measure)
    normalized = normalize_scores([scores[i] for i in ids])
    return dict(zip(ids, normalized))


def resolve_image(scene: Scene, scene_path: str | Path) -> np.ndarray:
    if scene.image_path is None:
        raise UsageError(f"{scene_path}: scene has no image_path; a measure-based "
                         "focus source needs the image")
    img_path = Path(scene_path).parent / scene.image_path
    return load_gray(img_path)


def focus_values_for_source(
    scene: Scene, source: str, img: Optional[np.ndarray] = None,
    scene_path: str | Path = "",
) -> Optional[dict[int, float]]:
    """Focus value map for a CLI focus source; None means "use labels"."""
    if source == "label":
        return None
    if img is None:
        img = resolve_image(scene, scene_path)
    return normalized_focus_values(img, scene, Measure(source))


def corpus_contrast_report(
    scene_dir: str | Path,
    touch_radius: int = graphmod.DEFAULT_TOUCH_RADIUS,
    methods: tuple[str, ...] = (
        "laplacian-mask", "laplacian-contour", "brenner", "reblur",
        "contrast1-label", "contrast2-label",
    ),
) -> list[ReportRow]:
    """Class-separation rows over a directory of labeled scenes.

    Traditional measures are per-scene normalized and fed through the
    mean-deviation contrast rule; the label methods use the binary focus
    labels directly.  Only instances with >= 1 neighbor contribute.
    """
    scene_dir = Path(scene_dir)
    per_method: dict[str, list] = {m: [] for m in methods}
    scene_files = sorted(p for p in scene_dir.glob("*.json") if p.name != "manifest.json")
    if not scene_files:
        raise UsageError(f"no scene files in {scene_dir}")
    for path in scene_files:
        scene = load_scene(path)
        for inst in scene.instances:
            if inst.agglo is None:
                raise MissingLabelError(f"{path.name}: instance {inst.id} lacks an agglo label")
        adj = graphmod.build_adjacency(scene, touch_radius)
        neighbor_counts = {i: len(v) for i, v in adj.neighbor_map().items()}
        img = None
        for method in methods:
            if method == "contrast2-label":
                cfg = ClassificationConfig(method=ContrastMethod.CONTRAST2,
                                           touch_radius=touch_radius)
                results = scene_contrasts(scene, cfg, graph=adj)
            elif method == "contrast1-label":
                cfg = ClassificationConfig(method=ContrastMethod.CONTRAST1,
                                           touch_radius=touch_radius)
                results = scene_contrasts(scene, cfg, graph=adj)
            else:
                if img is None:
                    img = resolve_image(scene, path)
                values = normalized_focus_values(img, scene, Measure(method))
                cfg = ClassificationConfig(method=ContrastMethod.CONTRAST1,
                                           touch_radius=touch_radius)
                results = scene_contrasts(scene, cfg, focus_values=values,
                                          graph=adj, focus_source=method)
            for inst in scene.instances:
                if neighbor_counts.get(inst.id, 0) >= 1:
                    per_method[method].append((inst.agglo, results[inst.id].contrast))
    return contrast_report(per_method)
