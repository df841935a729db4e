"""
Tests de l'index spatial à sphères englobantes.
"""

import numpy as np
import pytest

from clustering.metric_core import brute_core_distances, brute_knn, brute_rknn
from index.sphere_node import SphereNode
from index.ss_index import IndexConfig, SSIndex, min_node_distance
from models.point import Point
from tests.conftest import make_points
from utils.exceptions import ConflictError, InputError, InsufficientDataError, NotFoundError


def _loaded_index(points, min_pts=2, m=2, M=4, with_core=True):
    index = SSIndex(IndexConfig(min_pts=min_pts, m=m, M=M))
    records = brute_core_distances(points, min_pts) if with_core else {}
    for p in points:
        index.insert(p, records[p.id].core_distance if with_core else 0.0)
    return index, records


class TestIndexConfig:
    """Validation des paramètres."""

    def test_fanout_constraint(self):
        with pytest.raises(InputError):
            IndexConfig(min_pts=2, m=3, M=4)

    def test_min_pts_positive(self):
        with pytest.raises(InputError):
            IndexConfig(min_pts=0)


class TestInsertDelete:
    """Insertion et suppression."""

    def test_first_insert(self):
        index = SSIndex(IndexConfig(min_pts=2, m=2, M=4))
        index.insert(Point(0, [1.0, 2.0]))
        assert len(index) == 1
        assert index.root.is_leaf
        assert index.root.size == 1
        index.audit()

    def test_forced_split(self):
        index, _ = _loaded_index(make_points([[float(k), 0.0] for k in range(5)]), with_core=False)
        assert not index.root.is_leaf
        assert len(index.root.children) == 2
        index.audit()

    def test_duplicate_id(self, d1):
        index, _ = _loaded_index(d1)
        with pytest.raises(ConflictError):
            index.insert(Point(0, [5.0]))

    def test_dimension_mismatch(self, d1):
        index, _ = _loaded_index(d1)
        with pytest.raises(InputError):
            index.insert(Point(9, [5.0, 1.0]))

    def test_delete_only_point(self):
        index = SSIndex()
        index.insert(Point(0, [1.0]))
        removed = index.delete(0)
        assert removed.id == 0
        assert len(index) == 0
        assert index.root.is_leaf
        index.audit()

    def test_delete_unknown(self, d1):
        index, _ = _loaded_index(d1)
        with pytest.raises(NotFoundError):
            index.delete(42)

    def test_delete_then_knn(self, d1):
        index, _ = _loaded_index(d1)
        index.delete(3)
        assert index.knn([10.0], 2) == brute_knn(d1[:3], [10.0], 2)

    def test_random_churn_keeps_invariants(self, random_points, rng):
        index, _ = _loaded_index(random_points, min_pts=3, m=2, M=5, with_core=False)
        order = rng.permutation(len(random_points))
        for k in order[:70]:
            index.delete(random_points[k].id)
            index.audit()
        assert len(index) == 50
        assert set(index.ids()) == {random_points[k].id for k in order[70:]}


class TestKnn:
    """Requête des k plus proches voisins."""

    def test_reference_example(self, d1):
        index, _ = _loaded_index(d1)
        assert index.knn([0.0], 2, exclude_id=0) == [(1, 1.0), (2, 2.0)]

    def test_whole_index(self, d1):
        index, _ = _loaded_index(d1)
        assert [i for i, _ in index.knn([0.0], 4)] == [0, 1, 2, 3]

    def test_query_on_stored_point(self, d1):
        index, _ = _loaded_index(d1)
        assert index.knn([2.0], 1) == [(2, 0.0)]

    def test_not_enough_points(self, d1):
        index, _ = _loaded_index(d1)
        with pytest.raises(InsufficientDataError):
            index.knn([0.0], 4, exclude_id=0)

    def test_matches_oracle(self, random_points, rng):
        index, _ = _loaded_index(random_points, min_pts=5, m=2, M=5)
        for q in rng.uniform(-2.0, 7.0, size=(15, 2)):
            assert index.knn(q, 5) == brute_knn(random_points, q, 5)
        for p in random_points[:15]:
            assert index.knn(p.coords, 5, exclude_id=p.id) == brute_knn(random_points, p.coords, 5, exclude_id=p.id)


class TestRknn:
    """Requête des plus proches voisins inverses."""

    def test_reference_examples(self, d1):
        index, _ = _loaded_index(d1)
        assert index.rknn([1.5]) == {0, 1, 2, 3}
        assert index.rknn([100.0]) == set()

    def test_single_point(self):
        index = SSIndex(IndexConfig(min_pts=1, m=1, M=2))
        index.insert(Point(7, [0.0]), core_distance=3.0)
        assert index.rknn([1.0]) == {7}

    def test_matches_oracle(self, random_points, rng):
        index, records = _loaded_index(random_points, min_pts=5, m=2, M=5)
        for q in rng.uniform(-2.0, 7.0, size=(20, 2)):
            assert index.rknn(q) == brute_rknn(random_points, records, q)
            assert index.rknn(q, inclusive=True) == brute_rknn(random_points, records, q, inclusive=True)

    @pytest.mark.parametrize("min_pts", [3, 5, 10])
    @pytest.mark.parametrize("dim", [2, 8])
    def test_uniform_cloud_matches_oracles(self, min_pts, dim):
        rng = np.random.default_rng(min_pts * 10 + dim)
        points = make_points(rng.random((300, dim)))
        index, records = _loaded_index(points, min_pts=min_pts, m=5, M=10)
        queries = rng.random((50, dim))
        for k, q in enumerate(queries):
            assert index.rknn(q) == brute_rknn(points, records, q)
            assert index.knn(q, min_pts) == brute_knn(points, q, min_pts)
            stored = points[k]
            assert index.knn(stored.coords, min_pts, exclude_id=stored.id) == brute_knn(
                points, stored.coords, min_pts, exclude_id=stored.id
            )


class TestCoreAggregates:
    """Agrégats de distance de cœur."""

    def test_raise_above_maximum(self, d1):
        index, _ = _loaded_index(d1)
        index.refresh_cd(1, 50.0)
        assert index.root.cd_max == 50.0
        index.audit()

    def test_lower_non_maximal(self, d1):
        index, _ = _loaded_index(d1)
        before = index.root.cd_max
        index.refresh_cd(1, 0.5)
        assert index.root.cd_max == before
        assert index.core_distance(1) == 0.5
        index.audit()

    def test_unknown_point(self, d1):
        index, _ = _loaded_index(d1)
        with pytest.raises(NotFoundError):
            index.refresh_cd(99, 1.0)


class TestNodeDistance:
    """Borne inférieure entre un point et une sphère."""

    def _sphere(self, center, radius):
        node = SphereNode(is_leaf=True)
        node.centroid = np.array(center, dtype=np.float64)
        node.radius = radius
        return node

    def test_outside(self):
        assert min_node_distance([0.0], self._sphere([5.0], 2.0)) == 3.0

    def test_inside(self):
        assert min_node_distance([4.0], self._sphere([5.0], 2.0)) == 0.0

    def test_bound_below_every_point(self, random_points):
        index, _ = _loaded_index(random_points, min_pts=3, m=2, M=5)
        q = np.array([10.0, -3.0])
        for leaf in index.leaves():
            bound = min_node_distance(q, leaf)
            for point_id in leaf.entries:
                assert np.linalg.norm(index.coords(point_id) - q) >= bound - 1e-12
