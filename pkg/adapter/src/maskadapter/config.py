"""Adapter configuration: model reference, class mapping, score floor."""

from __future__ import annotations

from dataclasses import dataclass, field

FOCUS_TARGETS = ("in", "out")
AGGLO_TARGETS = ("non", "agg")
DROP = "drop"


class MappingError(ValueError):
    """Class mapping is incomplete or inconsistent."""


@dataclass(frozen=True)
class AdapterConfig:
    """How to run a detector and translate its classes.

    ``class_map`` sends every model class index to a focus level ("in"/
    "out"), an agglomeration class ("non"/"agg"), or "drop".  Mixing focus
    and agglomeration targets in one mapping is rejected; a detection whose
    class is absent from the mapping is an error, not a silent skip.
    """

    model: str = "builtin:threshold"
    class_map: dict[int, str] = field(default_factory=lambda: {0: "in"})
    score_floor: float = 0.0
    device: str = "cpu"

    def __post_init__(self):
        targets = set(self.class_map.values())
        bad = targets - set(FOCUS_TARGETS) - set(AGGLO_TARGETS) - {DROP}
        if bad:
            raise MappingError(f"unknown mapping targets: {sorted(bad)}")
        kept = targets - {DROP}
        if kept & set(FOCUS_TARGETS) and kept & set(AGGLO_TARGETS):
            raise MappingError("mapping mixes focus and agglomeration targets")
        if not kept:
            raise MappingError("mapping drops every class")

    @property
    def attribute(self) -> str:
        """Which instance field the mapping populates: "focus" or "agglo"."""
        kept = set(self.class_map.values()) - {DROP}
        return "focus" if kept & set(FOCUS_TARGETS) else "agglo"

    def resolve(self, class_id: int) -> str:
        if class_id not in self.class_map:
            raise MappingError(f"model class {class_id} is not covered by the mapping")
        return self.class_map[class_id]


def parse_class_map(text: str) -> dict[int, str]:
    """Parse "0:in,1:out" style mapping flags."""
    out: dict[int, str] = {}
    for part in text.split(","):
        try:
            idx, target = part.split(":")
            out[int(idx)] = target.strip()
        except ValueError:
            raise MappingError(f"expected idx:target pairs, got {part!r}")
    return out
