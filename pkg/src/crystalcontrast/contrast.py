"""Contrast focus and agglomeration classification.

Contrast focus measures how much an instance's focus level deviates from
its touching neighbors'.  Two rules are provided:

* contrast1: absolute difference between the instance's focus value and the
  mean focus value of its neighbors.
* contrast2: 0 when any neighbor shares the instance's binary focus level,
  1 when neighbors exist and all differ.

An instance is classified agglomerated when it has at least one neighbor
and its contrast is strictly below the threshold (default 0.5).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

import numpy as np

from . import graph as graphmod
from . import raster
from .errors import EmptyReportError, MissingFocusError
from .graph import AdjacencyGraph
from .interchange import AggloClass, FocusLevel, Scene, SceneRole, make_instance

DEFAULT_THRESHOLD = 0.5


class ContrastMethod(enum.Enum):
    CONTRAST1 = "c1"
    CONTRAST2 = "c2"


@dataclass(frozen=True)
class ContrastResult:
    instance_id: int
    contrast: float
    method: ContrastMethod
    neighbor_count: int
    focus_source: str = "label"


@dataclass(frozen=True)
class ClassificationConfig:
    method: ContrastMethod = ContrastMethod.CONTRAST2
    threshold: float = DEFAULT_THRESHOLD
    touch_radius: int = graphmod.DEFAULT_TOUCH_RADIUS
    postprocess_order: str = "fill-first"

    def __post_init__(self):
        if not (0.0 <= self.threshold <= 1.0):
            raise ValueError("threshold must be in [0,1]")


def _focus_value(focus_of: Mapping[int, float], inst_id: int) -> float:
    try:
        return float(focus_of[inst_id])
    except KeyError:
        raise MissingFocusError(f"no focus value for instance {inst_id}")


def contrast1(
    focus_of: Mapping[int, float], graph: AdjacencyGraph, inst_id: int,
    focus_source: str = "label",
) -> ContrastResult:
    """|own focus - mean neighbor focus|; 0 for isolated instances."""
    nbrs = graphmod.neighbors(graph, inst_id)
    if not nbrs:
        return ContrastResult(inst_id, 0.0, ContrastMethod.CONTRAST1, 0, focus_source)
    own = _focus_value(focus_of, inst_id)
    mean = float(np.mean([_focus_value(focus_of, n) for n in nbrs]))
    return ContrastResult(
        inst_id, abs(own - mean), ContrastMethod.CONTRAST1, len(nbrs), focus_source
    )


def contrast2(
    focus_of: Mapping[int, FocusLevel], graph: AdjacencyGraph, inst_id: int,
) -> ContrastResult:
    """0 when any neighbor shares the focus level, 1 when all differ."""
    nbrs = graphmod.neighbors(graph, inst_id)
    if not nbrs:
        return ContrastResult(inst_id, 0.0, ContrastMethod.CONTRAST2, 0)
    try:
        own = focus_of[inst_id]
        same = any(focus_of[n] == own for n in nbrs)
    except KeyError as exc:
        raise MissingFocusError(f"no focus level for instance {exc.args[0]}")
    return ContrastResult(
        inst_id, 0.0 if same else 1.0, ContrastMethod.CONTRAST2, len(nbrs)
    )


def scene_contrasts(
    scene: Scene,
    config: ClassificationConfig,
    focus_values: Optional[Mapping[int, float]] = None,
    graph: Optional[AdjacencyGraph] = None,
    focus_source: str = "label",
) -> dict[int, ContrastResult]:
    """Contrast results for every instance of a scene.

    With contrast2 (or contrast1 without explicit ``focus_values``) the
    scene's focus labels are used; contrast1 also accepts real-valued focus
    scores from the focus measures.
    """
    if graph is None:
        graph = graphmod.build_adjacency(scene, config.touch_radius)
    if config.method is ContrastMethod.CONTRAST2:
        levels: dict[int, FocusLevel] = {}
        for inst in scene.instances:
            if inst.focus is None:
                raise MissingFocusError(f"instance {inst.id} has no focus label")
            levels[inst.id] = inst.focus
        return {i: contrast2(levels, graph, i) for i in sorted(graph.nodes)}
    if focus_values is None:
        focus_values = {}
        for inst in scene.instances:
            if inst.focus is None:
                raise MissingFocusError(f"instance {inst.id} has no focus label")
            focus_values[inst.id] = inst.focus.numeric
    return {
        i: contrast1(focus_values, graph, i, focus_source)
        for i in sorted(graph.nodes)
    }


def classify_agglomeration(
    scene: Scene,
    config: ClassificationConfig = ClassificationConfig(),
    focus_values: Optional[Mapping[int, float]] = None,
) -> Scene:
    """Label each instance agglomerated / non-agglomerated.

    Masks are post-processed (hole infilling + largest component) before the
    adjacency is built; bboxes are recomputed accordingly.  The result is a
    prediction scene with ``agglo`` populated for every instance.
    """
    if not scene.instances:
        return replace(scene, role=SceneRole.PREDICTION)

    cleaned = {}
    for inst in scene.instances:
        cleaned[inst.id] = raster.postprocess(
            inst.mask.to_array(), config.postprocess_order
        )
    adj = graphmod.build_adjacency_from_masks(cleaned, config.touch_radius)
    results = scene_contrasts(scene, config, focus_values, graph=adj)

    out = []
    for inst in scene.instances:
        res = results[inst.id]
        agglomerated = res.neighbor_count >= 1 and res.contrast < config.threshold
        rebuilt = make_instance(
            inst.id, cleaned[inst.id],
            focus=inst.focus,
            agglo=AggloClass.AGGLOMERATED if agglomerated else AggloClass.NON_AGGLOMERATED,
            score=inst.score,
        )
        out.append(rebuilt)
    return replace(scene, instances=tuple(out), role=SceneRole.PREDICTION)


@dataclass(frozen=True)
class ReportRow:
    method: str
    agglo_class: str  # "non", "agg" or "diff"
    normalized_mean_contrast: float
    n_instances: int


def contrast_report(
    per_method: Mapping[str, Sequence[tuple[AggloClass, float]]],
) -> list[ReportRow]:
    """Class-separation table over instances that have >= 1 neighbor.

    ``per_method`` maps a method name to (ground-truth class, contrast)
    pairs, one per instance with neighbors.  Per class the mean contrast is
    divided by the method's maximum contrast over all instances; a "diff"
    row carries the between-class difference.
    """
    rows: list[ReportRow] = []
    any_data = False
    for method in per_method:
        entries = list(per_method[method])
        if not entries:
            continue
        any_data = True
        top = max(c for _, c in entries)
        means: dict[str, float] = {}
        for cls in (AggloClass.NON_AGGLOMERATED, AggloClass.AGGLOMERATED):
            values = [c for g, c in entries if g == cls]
            mean = float(np.mean(values)) if values else 0.0
            norm = mean / top if top > 0 else 0.0
            means[cls.value] = norm
            rows.append(ReportRow(method, cls.value, norm, len(values)))
        rows.append(ReportRow(
            method, "diff", means["non"] - means["agg"], len(entries)
        ))
    if not any_data:
        raise EmptyReportError("no instances with neighbors to report on")
    return rows
