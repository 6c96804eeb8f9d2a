"""Data model and JSON interchange format for crystal scenes.

A scene file holds one image's worth of instances (ground truth or
prediction).  Masks travel as row-major RLE with alternating zero/one run
lengths, always starting with the zero run (which may be 0), so each mask
has exactly one encoding and saved files are byte-reproducible.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Optional

import numpy as np

from .errors import (
    DuplicateIdError,
    EmptyMaskError,
    RleLengthMismatchError,
    SceneFormatError,
)

SCHEMA_VERSION = 1


class FocusLevel(enum.Enum):
    IN_FOCUS = "in"
    OUT_OF_FOCUS = "out"

    @property
    def numeric(self) -> float:
        """Fixed numeric encoding: in-focus 1.0, out-of-focus 0.0."""
        return 1.0 if self is FocusLevel.IN_FOCUS else 0.0

    @property
    def flipped(self) -> "FocusLevel":
        return FocusLevel.OUT_OF_FOCUS if self is FocusLevel.IN_FOCUS else FocusLevel.IN_FOCUS


class AggloClass(enum.Enum):
    NON_AGGLOMERATED = "non"
    AGGLOMERATED = "agg"


class SceneRole(enum.Enum):
    GROUND_TRUTH = "gt"
    PREDICTION = "pred"


def tight_bbox(arr: np.ndarray) -> tuple[int, int, int, int]:
    """Inclusive (x_min, y_min, x_max, y_max) of the on-pixels of ``arr``."""
    ys, xs = np.nonzero(arr)
    if ys.size == 0:
        raise EmptyMaskError("mask has no on-pixels")
    return int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max())


@dataclass(frozen=True)
class BinaryMask:
    """RLE-encoded binary raster, row-major, leading zero-run first."""

    width: int
    height: int
    runs: tuple[int, ...]

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise SceneFormatError("mask dimensions must be positive")
        if any(r < 0 for r in self.runs):
            raise SceneFormatError("negative run length")
        total = sum(self.runs)
        if total != self.width * self.height:
            raise RleLengthMismatchError(
                f"runs sum to {total}, expected {self.width * self.height}"
            )
        for i in range(1, len(self.runs) - 1):
            if self.runs[i] == 0 and self.runs[i + 1] == 0:
                raise SceneFormatError("two consecutive zero runs")
        # one-run total > 0 <=> at least one on-pixel
        if sum(self.runs[1::2]) == 0:
            raise EmptyMaskError("decoded mask has no on-pixels")

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "BinaryMask":
        return encode_rle(arr)

    def to_array(self) -> np.ndarray:
        """Decode to a (height, width) boolean array."""
        flat = np.zeros(self.width * self.height, dtype=bool)
        pos = 0
        val = False
        for run in self.runs:
            if val:
                flat[pos:pos + run] = True
            pos += run
            val = not val
        return flat.reshape(self.height, self.width)

    @property
    def area(self) -> int:
        return sum(self.runs[1::2])


def encode_rle(arr: np.ndarray) -> BinaryMask:
    """Encode a dense binary raster into canonical RLE.

    Raises EmptyMaskError on an all-zero raster.
    """
    arr = np.asarray(arr)
    if arr.ndim != 2 or arr.size == 0:
        raise SceneFormatError("raster must be a non-empty 2-D array")
    flat = arr.reshape(-1).astype(bool)
    if not flat.any():
        raise EmptyMaskError("cannot encode an all-zero raster")
    # run boundaries where the value changes
    change = np.nonzero(flat[1:] != flat[:-1])[0] + 1
    bounds = np.concatenate(([0], change, [flat.size]))
    lengths = np.diff(bounds).tolist()
    runs = lengths if not flat[0] else [0] + lengths
    height, width = arr.shape
    return BinaryMask(width=width, height=height, runs=tuple(int(r) for r in runs))


@dataclass(frozen=True)
class InstanceRecord:
    """One crystal: mask, tight bbox, optional labels and score."""

    id: int
    mask: BinaryMask
    bbox: tuple[int, int, int, int]
    focus: Optional[FocusLevel] = None
    agglo: Optional[AggloClass] = None
    score: Optional[float] = None

    def validate(self, width: int, height: int) -> None:
        if self.id < 0:
            raise SceneFormatError("id must be non-negative", field=f"instances[{self.id}].id")
        if (self.mask.width, self.mask.height) != (width, height):
            raise SceneFormatError(
                f"mask is {self.mask.width}x{self.mask.height}, scene is {width}x{height}",
                field=f"instances[{self.id}].rle",
            )
        if self.score is not None and not (0.0 <= self.score <= 1.0):
            raise SceneFormatError("score outside [0,1]", field=f"instances[{self.id}].score")
        actual = tight_bbox(self.mask.to_array())
        if tuple(self.bbox) != actual:
            raise SceneFormatError(
                f"stored bbox {tuple(self.bbox)} != tight bbox {actual}",
                field=f"instances[{self.id}].bbox",
            )


@dataclass(frozen=True)
class Scene:
    """An image plus its instances, either ground truth or prediction."""

    width: int
    height: int
    instances: tuple[InstanceRecord, ...]
    role: SceneRole = SceneRole.GROUND_TRUTH
    image_path: Optional[str] = None

    def validate(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise SceneFormatError("scene dimensions must be positive")
        seen: set[int] = set()
        for inst in self.instances:
            if inst.id in seen:
                raise DuplicateIdError(f"instance id {inst.id} appears twice")
            seen.add(inst.id)
            inst.validate(self.width, self.height)

    def instance(self, inst_id: int) -> InstanceRecord:
        for inst in self.instances:
            if inst.id == inst_id:
                return inst
        raise KeyError(inst_id)

    def with_instances(self, instances: Iterable[InstanceRecord]) -> "Scene":
        return replace(self, instances=tuple(instances))


def make_instance(
    inst_id: int,
    mask_array: np.ndarray,
    focus: Optional[FocusLevel] = None,
    agglo: Optional[AggloClass] = None,
    score: Optional[float] = None,
) -> InstanceRecord:
    """Build a record from a dense mask, computing the tight bbox."""
    mask = encode_rle(mask_array)
    return InstanceRecord(
        id=inst_id, mask=mask, bbox=tight_bbox(np.asarray(mask_array).astype(bool)),
        focus=focus, agglo=agglo, score=score,
    )


def _round6(x: float) -> float:
    return round(float(x) + 0.0, 6)


def scene_to_dict(scene: Scene) -> dict[str, Any]:
    scene.validate()
    return {
        "version": SCHEMA_VERSION,
        "width": scene.width,
        "height": scene.height,
        "image_path": scene.image_path,
        "role": scene.role.value,
        "instances": [
            {
                "id": inst.id,
                "bbox": list(inst.bbox),
                "focus": inst.focus.value if inst.focus is not None else None,
                "agglo": inst.agglo.value if inst.agglo is not None else None,
                "score": _round6(inst.score) if inst.score is not None else None,
                "rle": list(inst.mask.runs),
            }
            for inst in scene.instances
        ],
    }


def _expect(cond: bool, message: str, fld: str) -> None:
    if not cond:
        raise SceneFormatError(message, field=fld)


def scene_from_dict(doc: Any) -> Scene:
    _expect(isinstance(doc, dict), "scene must be a JSON object", "$")
    _expect(doc.get("version") == SCHEMA_VERSION, f"unsupported version {doc.get('version')!r}", "version")
    for key in ("width", "height"):
        _expect(isinstance(doc.get(key), int) and doc[key] > 0, "must be a positive integer", key)
    role_raw = doc.get("role")
    try:
        role = SceneRole(role_raw)
    except ValueError:
        raise SceneFormatError(f"must be 'gt' or 'pred', got {role_raw!r}", field="role")
    image_path = doc.get("image_path")
    _expect(image_path is None or isinstance(image_path, str), "must be a string or null", "image_path")
    raw_instances = doc.get("instances")
    _expect(isinstance(raw_instances, list), "must be a list", "instances")

    instances = []
    for i, raw in enumerate(raw_instances):
        fld = f"instances[{i}]"
        _expect(isinstance(raw, dict), "must be an object", fld)
        _expect(isinstance(raw.get("id"), int) and raw["id"] >= 0, "must be a non-negative integer", f"{fld}.id")
        bbox = raw.get("bbox")
        _expect(
            isinstance(bbox, list) and len(bbox) == 4 and all(isinstance(v, int) for v in bbox),
            "must be a list of 4 integers", f"{fld}.bbox",
        )
        runs = raw.get("rle")
        _expect(
            isinstance(runs, list) and all(isinstance(v, int) and v >= 0 for v in runs),
            "must be a list of non-negative integers", f"{fld}.rle",
        )
        focus_raw = raw.get("focus")
        focus = None
        if focus_raw is not None:
            try:
                focus = FocusLevel(focus_raw)
            except ValueError:
                raise SceneFormatError(f"must be 'in', 'out' or null, got {focus_raw!r}", field=f"{fld}.focus")
        agglo_raw = raw.get("agglo")
        agglo = None
        if agglo_raw is not None:
            try:
                agglo = AggloClass(agglo_raw)
            except ValueError:
                raise SceneFormatError(f"must be 'non', 'agg' or null, got {agglo_raw!r}", field=f"{fld}.agglo")
        score = raw.get("score")
        _expect(score is None or isinstance(score, (int, float)), "must be a number or null", f"{fld}.score")
        try:
            mask = BinaryMask(width=doc["width"], height=doc["height"], runs=tuple(runs))
        except (RleLengthMismatchError, EmptyMaskError, SceneFormatError) as exc:
            raise type(exc)(str(exc), field=f"{fld}.rle") from exc
        instances.append(
            InstanceRecord(
                id=raw["id"], mask=mask, bbox=tuple(bbox), focus=focus, agglo=agglo,
                score=float(score) if score is not None else None,
            )
        )

    scene = Scene(
        width=doc["width"], height=doc["height"], instances=tuple(instances),
        role=role, image_path=image_path,
    )
    scene.validate()
    return scene


def scene_to_json_bytes(scene: Scene) -> bytes:
    """Canonical serialization: sorted keys, compact separators, trailing newline."""
    doc = scene_to_dict(scene)
    return (json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n").encode("utf-8")


def save_scene(scene: Scene, path: str | Path) -> None:
    Path(path).write_bytes(scene_to_json_bytes(scene))


def load_scene(path: str | Path) -> Scene:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SceneFormatError(f"not valid JSON: {exc}", field=str(path))
    return scene_from_dict(doc)
