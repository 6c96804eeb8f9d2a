"""Prediction export and training-set export.

``export_predictions`` runs a detector over an image directory and writes
one interchange scene per image.  ``export_training_set`` goes the other
way: labeled interchange scenes become polygon label files (one text file
per scene, ``class x0 y0 x1 y1 ...`` per instance with coordinates
normalized to [0, 1]).  Polygonization is lossy; a JSON report records the
per-instance raster round-trip IoU and the worst boundary deviation.
"""

from __future__ import annotations

import json
from pathlib import Path

import cv2
import numpy as np

from .config import DROP, AdapterConfig
from .models import load_model
from .scenefile import (
    ROLE_PREDICTION,
    SceneDoc,
    SceneInstance,
    load_scene,
    scene_files,
)

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff")

LAYOUT_CLASSES = {
    "focus": {"in": 0, "out": 1},
    "agglo": {"non": 0, "agg": 1},
}


class UnlabeledScenesError(ValueError):
    """Scenes lack the labels the requested layout needs."""

    def __init__(self, missing: dict[str, list[int]]):
        self.missing = missing
        detail = "; ".join(f"{name}: instances {ids}" for name, ids in missing.items())
        super().__init__(f"scenes without required labels: {detail}")


def image_files(images_dir: str | Path) -> list[Path]:
    return sorted(
        p for p in Path(images_dir).iterdir() if p.suffix.lower() in IMAGE_SUFFIXES
    )


def export_predictions(
    images_dir: str | Path, out_dir: str | Path, config: AdapterConfig
) -> list[Path]:
    """One interchange scene file per image; returns the written paths."""
    model = load_model(config.model)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for img_path in image_files(images_dir):
        img = cv2.imread(str(img_path), cv2.IMREAD_GRAYSCALE)
        if img is None:
            raise FileNotFoundError(f"cannot read image {img_path}")
        img = img.astype(np.float64) / 255.0
        height, width = img.shape
        instances = []
        for det in model(img):
            if det.score < config.score_floor:
                continue
            target = config.resolve(det.class_id)
            if target == DROP:
                continue
            instances.append(SceneInstance(
                id=len(instances),
                mask=det.mask,
                focus=target if config.attribute == "focus" else None,
                agglo=target if config.attribute == "agglo" else None,
                score=max(0.0, min(1.0, det.score)),
            ))
        scene = SceneDoc(width=width, height=height, role=ROLE_PREDICTION,
                         image_path=img_path.name, instances=instances)
        out_path = out_dir / f"{img_path.stem}.json"
        scene.save(out_path)
        written.append(out_path)
    return written


# ---------------------------------------------------------------------------
# training export


def polygonize(mask: np.ndarray) -> np.ndarray:
    """Outer boundary of the largest contour, as an (N, 2) int array."""
    contours, _ = cv2.findContours(
        mask.astype(np.uint8), cv2.RETR_EXTERNAL, cv2.CHAIN_APPROX_NONE)
    largest = max(contours, key=cv2.contourArea)
    return largest.reshape(-1, 2)


def rasterize(polygon: np.ndarray, width: int, height: int) -> np.ndarray:
    canvas = np.zeros((height, width), dtype=np.uint8)
    cv2.fillPoly(canvas, [polygon.astype(np.int32)], 1)
    return canvas.astype(bool)


def _mask_iou(a: np.ndarray, b: np.ndarray) -> float:
    union = np.count_nonzero(a | b)
    return np.count_nonzero(a & b) / union if union else 0.0


def _boundary_deviation(original: np.ndarray, roundtrip: np.ndarray) -> float:
    """Worst Chebyshev distance from a disagreeing pixel to the other mask."""
    worst = 0.0
    for src, dst in ((original, roundtrip), (roundtrip, original)):
        extra = src & ~dst
        if not extra.any():
            continue
        dist = cv2.distanceTransform(
            (~dst).astype(np.uint8), cv2.DIST_C, 3).astype(np.float64)
        worst = max(worst, float(dist[extra].max()))
    return worst


def export_training_set(
    scenes_dir: str | Path, out_dir: str | Path, layout: str,
    report_path: str | Path | None = None,
) -> dict:
    """Write polygon label files for every scene; returns the loss report."""
    if layout not in LAYOUT_CLASSES:
        raise ValueError(f"layout must be one of {sorted(LAYOUT_CLASSES)}")
    classes = LAYOUT_CLASSES[layout]
    attribute = "focus" if layout == "focus" else "agglo"
    files = scene_files(scenes_dir)
    if not files:
        raise FileNotFoundError(f"no scene files in {scenes_dir}")

    missing: dict[str, list[int]] = {}
    scenes = []
    for path in files:
        scene = load_scene(path)
        unlabeled = [i.id for i in scene.instances if getattr(i, attribute) is None]
        if unlabeled:
            missing[path.name] = unlabeled
        scenes.append((path, scene))
    if missing:
        raise UnlabeledScenesError(missing)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = {"layout": layout, "scenes": [], "min_iou": 1.0, "max_deviation": 0.0}
    for path, scene in scenes:
        lines = []
        entries = []
        for inst in scene.instances:
            polygon = polygonize(inst.mask)
            coords = []
            for x, y in polygon:
                coords.append(f"{x / scene.width:.6f}")
                coords.append(f"{y / scene.height:.6f}")
            lines.append(" ".join([str(classes[getattr(inst, attribute)])] + coords))
            back = rasterize(polygon, scene.width, scene.height)
            iou = _mask_iou(inst.mask, back)
            deviation = _boundary_deviation(inst.mask, back)
            entries.append({"id": inst.id, "iou": round(iou, 6),
                            "deviation": deviation})
            report["min_iou"] = min(report["min_iou"], iou)
            report["max_deviation"] = max(report["max_deviation"], deviation)
        (out_dir / f"{path.stem}.txt").write_text(
            "\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
        report["scenes"].append({"scene": path.name, "instances": entries})
    report["min_iou"] = round(report["min_iou"], 6)
    if report_path is not None:
        Path(report_path).write_text(
            json.dumps(report, sort_keys=True, separators=(",", ":")) + "\n",
            encoding="utf-8")
    return report
