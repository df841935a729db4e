"""
Tests de l'arbre de résumés et de sa maintenance de compression.
"""

import numpy as np
import pytest

from index.bubble_tree import BubbleTree, classify_quality
from models.clustering_feature import ClusteringFeature
from models.point import Point
from tests.conftest import make_points
from utils.exceptions import ConflictError, InputError, NotFoundError


def _tree(points, rho=0.1, m=2, M=4):
    tree = BubbleTree(rho, m=m, M=M)
    for p in points:
        tree.insert(p)
    return tree


def _cf_of(points):
    return ClusteringFeature.of_points(np.vstack([p.coords for p in points]))


class TestInsertDelete:
    """Insertion et suppression de points."""

    def test_first_insert(self):
        tree = BubbleTree(0.5, m=2, M=4)
        tree.insert(Point(0, [1.0, 2.0]))
        assert tree.root.is_leaf
        assert tree.root_cf() == ClusteringFeature.of_point([1.0, 2.0])

    def test_duplicate_id(self):
        tree = _tree(make_points([0.0, 1.0]))
        with pytest.raises(ConflictError):
            tree.insert(Point(1, [5.0]))

    def test_dimension_mismatch(self):
        tree = _tree(make_points([0.0, 1.0]))
        with pytest.raises(InputError):
            tree.insert(Point(5, [5.0, 1.0]))

    def test_duplicate_coordinates_absorbed(self):
        tree = _tree(make_points([0.0, 0.0]), rho=0.5)
        assert len(tree) == 2
        assert tree.root_cf().n == 2
        tree.audit()

    def test_insert_then_delete(self):
        tree = BubbleTree(0.5, m=2, M=4)
        tree.insert(Point(0, [1.0]))
        tree.delete(0)
        assert tree.root is None
        assert tree.leaf_count() == 0
        assert tree.leaf_cfs() == ()
        tree.audit()

    def test_delete_unknown(self):
        tree = _tree(make_points([0.0, 1.0]))
        with pytest.raises(NotFoundError):
            tree.delete(9)

    def test_delete_sole_member(self, d1):
        tree = _tree(d1, rho=1.0)
        assert tree.leaf_count() == 4
        tree.delete(3)
        assert tree.leaf_count() == 3
        tree.audit()

    def test_random_churn_conserves_totals(self, rng):
        points = make_points(rng.normal(size=(100, 3)))
        tree = _tree(points, rho=0.1, m=2, M=5)
        removed = set(int(k) for k in rng.permutation(100)[:50])
        for k in sorted(removed):
            tree.delete(k)
        survivors = [p for p in points if p.id not in removed]
        assert tree.root_cf().is_close(_cf_of(survivors))
        tree.audit()

    def test_invalid_parameters(self):
        with pytest.raises(InputError):
            BubbleTree(0.0)
        with pytest.raises(InputError):
            BubbleTree(0.5, m=3, M=4)


class TestCompression:
    """Convergence du nombre de feuilles vers ⌈ρ·N⌉."""

    def test_full_resolution(self, d1):
        tree = _tree(d1, rho=1.0)
        cfs = tree.leaf_cfs()
        assert len(cfs) == 4
        assert all(cf.n == 1 for cf, _ in cfs)
        assert sorted(next(iter(members)) for _, members in cfs) == [0, 1, 2, 3]

    def test_full_resolution_random(self, random_points):
        tree = _tree(random_points, rho=1.0, m=2, M=5)
        assert tree.leaf_count() == len(random_points)
        tree.audit()

    def test_target_leaves(self, random_points):
        tree = _tree(random_points[:30], rho=0.1)
        assert tree.target_leaves == 3
        assert tree.leaf_count() == 3
        tree.audit()

    def test_removes_surplus_leaf(self, random_points):
        tree = _tree(random_points[:50], rho=0.1)
        assert tree.leaf_count() == 5
        tree.rho = 0.08
        assert tree.maintain_compression() == "removed_leaf"
        assert tree.leaf_count() == 4
        tree.audit()

    def test_splits_fullest_leaf(self, random_points):
        tree = _tree(random_points[:30], rho=0.1)
        tree.rho = 0.13
        assert tree.maintain_compression() == "split_leaf"
        assert tree.leaf_count() == 4
        tree.audit()

    def test_reorganization_keeps_totals(self, random_points):
        tree = _tree(random_points[:30], rho=0.1)
        before = tree.root_cf()
        assert tree.maintain_compression() == "reorganized"
        assert tree.leaf_count() == 3
        assert tree.root_cf().is_close(before)
        tree.audit()

    def test_empty_tree(self):
        assert BubbleTree(0.5).maintain_compression() == "none"

    def test_lazy_maintenance_skips_equal_leaves(self, d1):
        tree = _tree(d1, rho=1.0)
        assert tree.maintain_compression(lazy=True) == "none"

    def test_lazy_maintenance_waits_for_quality_change(self, random_points):
        tree = _tree(random_points[:30], rho=0.1)
        assert tree.maintain_compression() == "reorganized"
        assert tree.maintain_compression(lazy=True) == "none"
        assert tree.maintain_compression(lazy=True) == "none"

    def test_reorganization_keeps_leaf_summaries_exact(self, random_points):
        tree = _tree(random_points[:60], rho=0.1)
        by_id = {p.id: p for p in random_points}
        for _ in range(5):
            assert tree.maintain_compression() == "reorganized"
        for cf, members in tree.leaf_cfs():
            assert cf.is_close(_cf_of([by_id[i] for i in members]))
        tree.audit()

    def test_updates_mostly_skip_reorganization(self, rng):
        tree = BubbleTree(0.05, m=2, M=5)
        actions = [tree.insert(p) for p in make_points(rng.normal(size=(400, 2)))]
        assert actions.count("reorganized") < actions.count("none")
        tree.audit()

    def test_quality_summary_counts_leaves(self, random_points):
        tree = _tree(random_points, rho=0.05, m=2, M=5)
        summary = tree.quality_summary()
        assert sum(summary.values()) == tree.leaf_count()


class TestQualityClassification:
    """Classement des bulles selon leur effectif."""

    def test_one_heavy_bubble(self):
        assert classify_quality([100, 100, 100, 700], 1000) == ["good", "good", "good", "over"]

    def test_equal_weights(self):
        assert classify_quality([5, 5, 5], 15, k=0.5) == ["good"] * 3

    def test_two_bubbles(self):
        assert classify_quality([1, 999], 1000) == ["under", "over"]

    def test_empty(self):
        with pytest.raises(InputError):
            classify_quality([], 10)


class TestLongWorkloads:
    """Conservation et compression sur de longues séquences de mises à jour."""

    @pytest.mark.slow
    def test_ten_thousand_operations(self):
        rng = np.random.default_rng(seed=10_000)
        tree = BubbleTree(0.05)
        alive = {}
        next_id = 0
        for _ in range(10_000):
            if len(alive) < 200 or rng.random() < 0.55:
                point = Point(next_id, rng.normal(size=3))
                next_id += 1
                tree.insert(point)
                alive[point.id] = point
            else:
                victim = list(alive)[int(rng.integers(0, len(alive)))]
                tree.delete(victim)
                del alive[victim]
            assert abs(tree.leaf_count() - tree.target_leaves) <= 1
        assert tree.root_cf().is_close(_cf_of(alive.values()))
        assert len(tree) == len(alive)
        tree.audit()

    def test_insertion_order_does_not_matter(self):
        rng = np.random.default_rng(seed=5)
        coords = rng.random((400, 2))
        for seed in (1, 2):
            order = np.random.default_rng(seed).permutation(len(coords))
            tree = BubbleTree(0.05)
            for k in order:
                tree.insert(Point(int(k), coords[k]))
            assert tree.leaf_count() == 20
            sizes = [cf.n for cf, _ in tree.leaf_cfs()]
            assert sum(sizes) == 400
            assert max(sizes) <= 5 * 400 / 20
            tree.audit()
