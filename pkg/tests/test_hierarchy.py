"""
Tests du dendrogramme, de l'extraction des clusters plats et du score NMI.
"""

import pytest

from clustering.hierarchy import build_dendrogram, extract_flat, nmi
from clustering.metric_core import brute_core_distances, brute_mst
from models.hierarchy_types import NOISE, Dendrogram
from models.point import ReachEdge
from tests.conftest import make_points
from utils.exceptions import InputError


def _flat(points, min_pts, min_cluster_weight, **kwargs):
    edges = brute_mst(points, brute_core_distances(points, min_pts))
    return extract_flat(build_dendrogram(edges), min_cluster_weight, **kwargs)


class TestBuildDendrogram:
    """Liaison simple sur l'arbre couvrant."""

    def test_reference_dataset(self, d1):
        dendrogram = build_dendrogram(brute_mst(d1, brute_core_distances(d1, 2)))
        assert dendrogram.merge_weights() == [2.0, 2.0, 9.0]
        assert dendrogram.merges[-1].size == 4.0
        assert sorted(dendrogram.leaves_under(6)) == [0, 1, 2, 3]

    def test_single_edge(self):
        dendrogram = build_dendrogram([ReachEdge(4, 7, 1.5)])
        assert dendrogram.leaf_ids == (4, 7)
        assert len(dendrogram.merges) == 1

    def test_weighted_leaves(self):
        dendrogram = build_dendrogram([ReachEdge(0, 1, 1.0)], {0: 3.0, 1: 5.0})
        assert dendrogram.merges[0].size == 8.0
        assert dendrogram.total_weight == 8.0

    def test_not_spanning(self):
        with pytest.raises(InputError):
            build_dendrogram([ReachEdge(0, 1, 1.0)], {0: 1.0, 1: 1.0, 2: 1.0})

    def test_cycle(self):
        edges = [ReachEdge(0, 1, 1.0), ReachEdge(1, 0, 2.0)]
        with pytest.raises(InputError):
            build_dendrogram(edges, {0: 1.0, 1: 1.0, 2: 1.0})


class TestExtractFlat:
    """Sélection des clusters par excès de masse."""

    def test_reference_dataset(self, d1):
        flat = _flat(d1, 2, 2)
        assert flat.labels_for([0, 1, 2]) == [0, 0, 0]
        assert flat.label_of(3) == NOISE
        assert flat.noise_weight == 1.0

    def test_two_identical_groups(self):
        points = make_points([[0.0, 0.0]] * 5 + [[100.0, 100.0]] * 5)
        flat = _flat(points, 3, 3)
        assert flat.n_clusters == 2
        assert sorted(flat.cluster_weights.values()) == [5.0, 5.0]
        assert flat.noise_weight == 0.0
        assert len(set(flat.labels_for(range(5)))) == 1
        assert flat.label_of(0) != flat.label_of(9)

    def test_everything_noise(self, d1):
        flat = _flat(d1, 2, 5)
        assert set(flat.labels.values()) == {NOISE}
        assert flat.n_clusters == 0

    def test_three_blobs(self, random_points):
        flat = _flat(random_points, 5, 15)
        assert flat.n_clusters == 3

    def test_labels_independent_of_edge_order(self):
        points = make_points([0.0, 1.0, 2.0, 3.0, 20.0, 21.0, 22.0, 23.0])
        edges = brute_mst(points, brute_core_distances(points, 2))
        forward = extract_flat(build_dendrogram(edges), 2)
        backward = extract_flat(build_dendrogram(list(reversed(edges))), 2)
        assert forward.labels == backward.labels
        assert forward.n_clusters == 2

    def test_single_leaf(self):
        dendrogram = Dendrogram([3], [4.0], [])
        assert extract_flat(dendrogram, 2).labels == {3: 0}
        assert extract_flat(dendrogram, 5).labels == {3: NOISE}

    def test_allow_single_cluster(self):
        points = make_points([0.0, 1.0, 2.0, 3.0, 20.0, 21.0, 22.0, 23.0])
        flat = _flat(points, 2, 5, allow_single_cluster=True)
        assert flat.n_clusters == 1

    def test_invalid_minimum(self, d1):
        with pytest.raises(InputError):
            _flat(d1, 2, 0.5)


class TestNmi:
    """Information mutuelle normalisée."""

    def test_identical(self):
        assert nmi([0, 0, 1, 1, 2], [0, 0, 1, 1, 2]) == pytest.approx(1.0)

    def test_permutation(self):
        assert nmi([0, 0, 1, 1], [1, 1, 0, 0]) == pytest.approx(1.0)

    def test_independent(self):
        assert nmi([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(0.0, abs=1e-12)

    def test_noise_is_a_class(self):
        assert nmi([NOISE, NOISE, 0, 0], [5, 5, 7, 7]) == pytest.approx(1.0)

    def test_length_mismatch(self):
        with pytest.raises(InputError):
            nmi([0, 1], [0])

    def test_empty(self):
        with pytest.raises(InputError):
            nmi([], [])
