import numpy as np
import pytest

from crystalcontrast.errors import UnknownInstanceError
from crystalcontrast.graph import (
    AdjacencyGraph,
    build_adjacency,
    build_adjacency_from_masks,
    neighbors,
)
from crystalcontrast.interchange import Scene, SceneRole, make_instance

from conftest import random_blob
from oracles import mask_to_set, min_chebyshev_distance


def block(w, h, x0, y0, x1, y1):
    m = np.zeros((h, w), dtype=bool)
    m[y0:y1 + 1, x0:x1 + 1] = True
    return m


class TestBuildAdjacency:
    def test_overlap_is_edge_at_radius_zero(self):
        masks = {0: block(10, 10, 1, 1, 4, 4), 1: block(10, 10, 3, 3, 6, 6)}
        g = build_adjacency_from_masks(masks, touch_radius=0)
        assert g.edges == frozenset({(0, 1)})

    def test_gap_three_needs_radius_three(self):
        # columns 0..2 and 5..7: Chebyshev gap 3
        masks = {0: block(12, 5, 0, 1, 2, 3), 1: block(12, 5, 5, 1, 7, 3)}
        assert build_adjacency_from_masks(masks, 2).edges == frozenset()
        assert build_adjacency_from_masks(masks, 3).edges == frozenset({(0, 1)})

    def test_single_instance_no_edges(self):
        g = build_adjacency_from_masks({5: block(4, 4, 0, 0, 1, 1)}, 2)
        assert g.edges == frozenset() and g.nodes == frozenset({5})

    def test_scene_wrapper(self):
        insts = (
            make_instance(0, block(10, 10, 0, 0, 2, 2)),
            make_instance(1, block(10, 10, 2, 2, 5, 5)),
        )
        scene = Scene(width=10, height=10, instances=insts, role=SceneRole.GROUND_TRUTH)
        assert build_adjacency(scene, 0).edges == frozenset({(0, 1)})


class TestNeighbors:
    def _triangle(self):
        return AdjacencyGraph(nodes=frozenset({1, 2, 3}),
                              edges=frozenset({(1, 2), (2, 3), (1, 3)}),
                              touch_radius=2)

    def test_isolated(self):
        g = AdjacencyGraph(nodes=frozenset({7}), edges=frozenset(), touch_radius=2)
        assert neighbors(g, 7) == []

    def test_triangle(self):
        assert neighbors(self._triangle(), 2) == [1, 3]

    def test_chain(self):
        g = AdjacencyGraph(nodes=frozenset({1, 2, 3}),
                           edges=frozenset({(1, 2), (2, 3)}), touch_radius=2)
        assert neighbors(g, 1) == [2]

    def test_unknown_id(self):
        with pytest.raises(UnknownInstanceError):
            neighbors(self._triangle(), 99)


class TestProperties:
    def test_symmetry_and_bruteforce_agreement(self, rng):
        for _ in range(40):
            n = int(rng.integers(1, 8))
            masks = {i: random_blob(rng, 20, 20) for i in range(n)}
            radius = int(rng.integers(0, 4))
            g = build_adjacency_from_masks(masks, radius)
            nm = g.neighbor_map()
            sets = {i: mask_to_set(masks[i].tolist()) for i in masks}
            for a in masks:
                for b in masks:
                    if a >= b:
                        continue
                    expected = min_chebyshev_distance(sets[a], sets[b]) <= radius
                    assert ((a, b) in g.edges) == expected
                    assert (b in nm[a]) == (a in nm[b]) == expected

    def test_monotone_in_radius(self, rng):
        masks = {i: random_blob(rng, 16, 16) for i in range(5)}
        prev = frozenset()
        for r in range(4):
            edges = build_adjacency_from_masks(masks, r).edges
            assert prev <= edges
            prev = edges
