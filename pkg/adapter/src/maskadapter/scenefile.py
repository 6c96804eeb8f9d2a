"""Reading and writing the scene-interchange JSON format.

This is a self-contained implementation of the published file format: masks
are row-major RLE (alternating zero-run then one-run lengths, leading zero
run may be 0), documents are serialized with sorted keys, compact
separators and a trailing newline so identical scenes produce identical
bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1
ROLE_PREDICTION = "pred"
ROLE_GROUND_TRUTH = "gt"


class SceneFileError(ValueError):
    """A scene document violates the interchange format."""


def encode_rle(mask: np.ndarray) -> list[int]:
    flat = np.asarray(mask, dtype=bool).ravel()
    if not flat.any():
        raise SceneFileError("mask has no on-pixels")
    changes = np.flatnonzero(np.diff(flat.astype(np.int8))) + 1
    bounds = np.concatenate(([0], changes, [flat.size]))
    runs = np.diff(bounds).tolist()
    if flat[0]:
        runs = [0] + runs
    return [int(r) for r in runs]


def decode_rle(runs: list[int], width: int, height: int) -> np.ndarray:
    if sum(runs) != width * height:
        raise SceneFileError(f"RLE sums to {sum(runs)}, expected {width * height}")
    flat = np.zeros(width * height, dtype=bool)
    pos = 0
    for i, run in enumerate(runs):
        if i % 2 == 1:
            flat[pos:pos + run] = True
        pos += run
    return flat.reshape(height, width)


def tight_bbox(mask: np.ndarray) -> list[int]:
    ys, xs = np.nonzero(mask)
    return [int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max())]


@dataclass
class SceneInstance:
    id: int
    mask: np.ndarray
    focus: str | None = None   # "in" / "out"
    agglo: str | None = None   # "non" / "agg"
    score: float | None = None

    def to_doc(self) -> dict:
        return {
            "id": self.id,
            "rle": encode_rle(self.mask),
            "bbox": tight_bbox(self.mask),
            "focus": self.focus,
            "agglo": self.agglo,
            "score": None if self.score is None else round(float(self.score), 6),
        }


@dataclass
class SceneDoc:
    width: int
    height: int
    role: str
    image_path: str | None = None
    instances: list[SceneInstance] = field(default_factory=list)

    def to_json_bytes(self) -> bytes:
        doc = {
            "version": SCHEMA_VERSION,
            "width": self.width,
            "height": self.height,
            "role": self.role,
            "image_path": self.image_path,
            "instances": [inst.to_doc() for inst in self.instances],
        }
        return (json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n").encode("utf-8")

    def save(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_json_bytes())


def load_scene(path: str | Path) -> SceneDoc:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SceneFileError(f"{path}: not valid JSON: {exc}") from exc
    try:
        width, height = int(doc["width"]), int(doc["height"])
        instances = [
            SceneInstance(
                id=int(d["id"]),
                mask=decode_rle([int(r) for r in d["rle"]], width, height),
                focus=d.get("focus"),
                agglo=d.get("agglo"),
                score=d.get("score"),
            )
            for d in doc["instances"]
        ]
        return SceneDoc(
            width=width, height=height, role=doc["role"],
            image_path=doc.get("image_path"), instances=instances,
        )
    except (KeyError, TypeError) as exc:
        raise SceneFileError(f"{path}: malformed scene document: {exc}") from exc


def scene_files(directory: str | Path) -> list[Path]:
    return sorted(
        p for p in Path(directory).glob("*.json") if p.name != "manifest.json"
    )
