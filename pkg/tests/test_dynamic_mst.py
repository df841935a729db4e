"""
Tests de l'application d'arêtes candidates et de Boruvka à double arbre.
"""

import pytest

from clustering.dynamic_mst import (BoruvkaState, UnionFind, apply_candidate_edge,
                                    dual_tree_boruvka, find_component_neighbors, remove_edges,
                                    update_tree)
from clustering.link_cut_forest import LinkCutForest
from clustering.metric_core import brute_core_distances, brute_mst, total_weight
from index.ss_index import IndexConfig, SSIndex
from models.point import ReachEdge
from utils.exceptions import InputError, StateError


def _index_with_core(points, min_pts, m=2, M=4):
    index = SSIndex(IndexConfig(min_pts=min_pts, m=m, M=M))
    records = brute_core_distances(points, min_pts)
    for p in points:
        index.insert(p, records[p.id].core_distance)
    return index, records


def _forest(vertices, edges):
    forest = LinkCutForest(vertices)
    for e in edges:
        forest.link(e.u, e.v, e.weight)
    return forest


class TestUnionFind:
    """Partition union-find."""

    def test_union_and_components(self):
        union_find = UnionFind(range(5))
        assert union_find.union(0, 1)
        assert union_find.union(3, 4)
        assert not union_find.union(1, 0)
        assert union_find.num_components == 3
        assert sorted(sorted(c) for c in union_find.retrieve_components()) == [[0, 1], [2], [3, 4]]

    def test_find_compresses(self):
        union_find = UnionFind(range(4))
        union_find.union(0, 1)
        union_find.union(2, 3)
        union_find.union(1, 3)
        root = union_find.find(3)
        assert all(union_find.find(i) == root for i in range(4))


class TestApplyCandidateEdge:
    """Application d'une arête candidate."""

    def test_tie_is_rejected(self):
        forest = _forest(range(3), [ReachEdge(0, 1, 2.0), ReachEdge(1, 2, 2.0)])
        assert apply_candidate_edge(forest, ReachEdge(0, 2, 2.0)) == "rejected"
        assert forest.total_weight() == 4.0

    def test_lighter_edge_replaces(self):
        forest = _forest(range(3), [ReachEdge(0, 1, 2.0), ReachEdge(1, 2, 2.0)])
        outcome = apply_candidate_edge(forest, ReachEdge(0, 2, 1.0))
        assert outcome[0] == "replaced"
        assert outcome[1].weight == 2.0
        assert forest.total_weight() == 3.0
        assert forest.is_spanning_tree()

    def test_link_across_components(self):
        forest = LinkCutForest(["a", "b"])
        assert apply_candidate_edge(forest, ReachEdge("a", "b", 4.0)) == "linked"
        assert forest.edge_count() == 1

    def test_self_loop(self):
        forest = LinkCutForest([0])
        with pytest.raises(InputError):
            apply_candidate_edge(forest, ReachEdge(0, 0, 1.0))


class TestRemoveEdges:
    """Coupe des arêtes selon un prédicat."""

    def test_edges_of_outlier(self, d1):
        records = brute_core_distances(d1, 2)
        forest = _forest(range(4), brute_mst(d1, records))
        removed = remove_edges(forest, lambda e: 3 in (e.u, e.v))
        assert [e.weight for e in removed] == [9.0]
        assert forest.component_count() == 2
        assert forest.neighbors(3) == set()

    def test_nothing_matches(self, d1):
        forest = _forest(range(4), brute_mst(d1, brute_core_distances(d1, 2)))
        assert remove_edges(forest, lambda e: False) == []
        assert forest.edge_count() == 3

    def test_remove_all(self, d1):
        forest = _forest(range(4), brute_mst(d1, brute_core_distances(d1, 2)))
        remove_edges(forest, lambda e: True)
        assert forest.edge_count() == 0
        assert forest.component_count() == 4


class TestDualTreeBoruvka:
    """Reconnexion par Boruvka à double arbre."""

    def test_from_empty_forest(self, d1):
        index, _ = _index_with_core(d1, 2)
        forest = dual_tree_boruvka(index, LinkCutForest(range(4)))
        assert forest.is_spanning_tree()
        assert forest.total_weight() == 13.0

    def test_spanning_forest_unchanged(self, d1):
        index, records = _index_with_core(d1, 2)
        edges = brute_mst(d1, records)
        forest = dual_tree_boruvka(index, _forest(range(4), edges))
        assert sorted(forest.edges()) == sorted(ReachEdge(*e.endpoints(), e.weight) for e in edges)

    def test_single_round_restores_outlier_edge(self, d1):
        index, records = _index_with_core(d1, 2)
        forest = _forest(range(4), [e for e in brute_mst(d1, records) if e.weight < 9.0])
        dual_tree_boruvka(index, forest)
        assert forest.is_spanning_tree()
        assert forest.total_weight() == 13.0
        assert [forest.edge_weight(3, v) for v in forest.neighbors(3)] == [9.0]

    def test_vertex_mismatch(self, d1):
        index, _ = _index_with_core(d1, 2)
        with pytest.raises(StateError):
            dual_tree_boruvka(index, LinkCutForest(range(3)))

    def test_matches_oracle_weight(self, random_points):
        index, records = _index_with_core(random_points, 4, m=2, M=5)
        forest = dual_tree_boruvka(index, LinkCutForest(p.id for p in random_points))
        assert forest.is_spanning_tree()
        assert forest.total_weight() == pytest.approx(total_weight(brute_mst(random_points, records)), rel=1e-12)


class TestComponentNeighbors:
    """Recherche des meilleures arêtes sortantes."""

    def test_two_components(self, d1):
        index, _ = _index_with_core(d1, 2)
        union_find = UnionFind(range(4))
        union_find.union(0, 1)
        union_find.union(2, 3)
        state = BoruvkaState(union_find)
        update_tree(index.root, state)
        candidates = find_component_neighbors(index.root, index.root, state)
        best = candidates[union_find.find(0)]
        assert best.weight == 2.0
        assert {best.u, best.v} & {0, 1} and {best.u, best.v} & {2, 3}

    def test_single_component_pruned(self, d1):
        index, _ = _index_with_core(d1, 2)
        union_find = UnionFind(range(4))
        for i in range(3):
            union_find.union(i, i + 1)
        state = BoruvkaState(union_find)
        update_tree(index.root, state)
        assert find_component_neighbors(index.root, index.root, state) == {}

    def test_first_round_singletons(self, d1):
        index, _ = _index_with_core(d1, 2)
        state = BoruvkaState(UnionFind(range(4)))
        update_tree(index.root, state)
        candidates = find_component_neighbors(index.root, index.root, state)
        assert set(candidates) == {0, 1, 2, 3}
        # d_m(1,3) = d_m(2,3) = 9 : l'ordre (poids, min, max) retient (1, 3)
        assert candidates[3] == ReachEdge(1, 3, 9.0)
        assert all(candidates[i].weight == 2.0 for i in range(3))
