"""Neighbor adjacency over a scene's instances.

Two instances are neighbors when the minimum Chebyshev distance between
their pixel sets is at most the touch radius (equivalently, one mask dilated
by the radius intersects the other).  The default radius of 2 tolerates
1-pixel annotation gaps between hand-drawn masks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import raster
from .errors import UnknownInstanceError
from .interchange import Scene

DEFAULT_TOUCH_RADIUS = 2


@dataclass(frozen=True)
class AdjacencyGraph:
    nodes: frozenset[int]
    edges: frozenset[tuple[int, int]]
    touch_radius: int

    def neighbor_map(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {n: [] for n in self.nodes}
        for a, b in self.edges:
            out[a].append(b)
            out[b].append(a)
        return {n: sorted(v) for n, v in out.items()}


def _bboxes_within(b1, b2, radius: int) -> bool:
    ax0, ay0, ax1, ay1 = b1
    bx0, by0, bx1, by1 = b2
    return not (ax1 + radius < bx0 or bx1 + radius < ax0
                or ay1 + radius < by0 or by1 + radius < ay0)


def build_adjacency_from_masks(
    masks: dict[int, np.ndarray], touch_radius: int = DEFAULT_TOUCH_RADIUS
) -> AdjacencyGraph:
    """Adjacency over dense masks keyed by instance id."""
    if touch_radius < 0:
        raise ValueError("touch_radius must be >= 0")
    ids = sorted(masks)
    bboxes = {}
    dilated = {}
    for i in ids:
        m = np.asarray(masks[i], dtype=bool)
        ys, xs = np.nonzero(m)
        bboxes[i] = (int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max()))
        dilated[i] = raster.dilate(m, touch_radius)
    edges = set()
    for ai in range(len(ids)):
        for bi in range(ai + 1, len(ids)):
            a, b = ids[ai], ids[bi]
            if not _bboxes_within(bboxes[a], bboxes[b], touch_radius):
                continue
            if np.any(dilated[a] & np.asarray(masks[b], dtype=bool)):
                edges.add((a, b))
    return AdjacencyGraph(
        nodes=frozenset(ids), edges=frozenset(edges), touch_radius=touch_radius
    )


def build_adjacency(scene: Scene, touch_radius: int = DEFAULT_TOUCH_RADIUS) -> AdjacencyGraph:
    masks = {inst.id: inst.mask.to_array() for inst in scene.instances}
    return build_adjacency_from_masks(masks, touch_radius)


def neighbors(graph: AdjacencyGraph, inst_id: int) -> list[int]:
    """Sorted neighbor ids of ``inst_id``; empty when isolated."""
    if inst_id not in graph.nodes:
        raise UnknownInstanceError(f"instance {inst_id} not in graph")
    out = []
    for a, b in graph.edges:
        if a == inst_id:
            out.append(b)
        elif b == inst_id:
            out.append(a)
    return sorted(out)
