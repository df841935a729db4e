"""
Tests de la composante hors ligne sur les bulles de données.
"""

import math

import numpy as np
import pytest

from clustering.bubble_offline import (assign_points, bubble_core_distance, bubble_distance,
                                       bubble_distance_matrix, bubble_mutual_reachability,
                                       bubbles_from_leaves, cluster_bubbles, derive_bubble)
from clustering.dynamic_hdbscan import DynamicClusterer
from clustering.hierarchy import build_dendrogram, extract_flat, nmi
from clustering.static_hdbscan import run_static
from harness.datasets import gen_gaussian_mixture
from index.bubble_tree import BubbleTree
from models.clustering_feature import ClusteringFeature, DataBubble
from tests.conftest import make_points
from utils.exceptions import InputError, InsufficientDataError


class TestDeriveBubble:
    """Dérivation d'une bulle à partir d'un résumé."""

    def test_two_points(self):
        bubble = derive_bubble(ClusteringFeature([2.0, 0.0], 4.0, 2), dim=2)
        np.testing.assert_array_equal(bubble.rep, [1.0, 0.0])
        assert bubble.extent == pytest.approx(2.0)
        assert bubble.nn_dist(1) == pytest.approx(1.41421, abs=1e-5)

    def test_single_point(self):
        bubble = derive_bubble(ClusteringFeature.of_point([3.0, 4.0]))
        assert bubble.extent == 0.0
        assert bubble.nn_dist(5) == 0.0

    def test_reference_dataset(self):
        bubble = derive_bubble(ClusteringFeature([13.0], 105.0, 4), dim=1)
        assert bubble.rep[0] == 3.25
        assert bubble.extent == pytest.approx(math.sqrt(502.0 / 12.0))
        assert bubble.extent == pytest.approx(6.468, abs=1e-3)

    def test_empty_feature(self):
        with pytest.raises(InputError):
            derive_bubble(ClusteringFeature.zero(2))

    def test_identical_points(self):
        bubble = derive_bubble(ClusteringFeature.of_points(np.ones((5, 2))))
        assert bubble.extent == 0.0


class TestBubbleDistance:
    """Distance entre bulles."""

    def test_separated(self):
        b = DataBubble(0, [0.0], 3, 1.0)
        c = DataBubble(1, [10.0], 3, 1.0)
        assert bubble_distance(b, c) == pytest.approx(8.667, abs=1e-3)
        assert bubble_distance(c, b) == bubble_distance(b, c)

    def test_overlapping(self):
        b = DataBubble(0, [0.0], 2, 1.0)
        c = DataBubble(1, [1.0], 2, 1.0)
        assert bubble_distance(b, c) == 0.5

    def test_same_bubble(self):
        b = DataBubble(0, [4.0], 3, 1.0)
        assert bubble_distance(b, b) == 0.0

    def test_matrix_matches_pairwise(self, rng):
        bubbles = [DataBubble(k, rng.normal(size=2), int(rng.integers(1, 9)), float(rng.uniform(0, 1)))
                   for k in range(6)]
        matrix = bubble_distance_matrix(bubbles)
        for i, b in enumerate(bubbles):
            for j, c in enumerate(bubbles):
                assert matrix[i, j] == pytest.approx(bubble_distance(b, c), abs=1e-12)


class TestBubbleCoreDistance:
    """Distance de cœur d'une bulle."""

    def test_self_sufficient(self):
        b = DataBubble(0, [0.0], 3, 1.0)
        assert bubble_core_distance(b, [b], 2) == pytest.approx(2.0 / 3.0)

    def test_neighbor_completes(self):
        b = DataBubble(0, [0.0], 1, 0.0)
        c = DataBubble(1, [10.0], 3, 1.0)
        assert bubble_distance(b, c) == pytest.approx(9.333, abs=1e-3)
        assert bubble_core_distance(b, [b, c], 2) == pytest.approx(9.667, abs=1e-3)

    def test_insufficient_weight(self):
        b = DataBubble(0, [0.0], 1, 0.0)
        with pytest.raises(InsufficientDataError):
            bubble_core_distance(b, [b], 2)

    def test_mutual_reachability(self):
        b = DataBubble(0, [0.0], 1, 0.0)
        c = DataBubble(1, [10.0], 3, 1.0)
        cds = {0: bubble_core_distance(b, [b, c], 2), 1: bubble_core_distance(c, [b, c], 2)}
        assert bubble_mutual_reachability(b, c, cds) == max(cds[0], cds[1], bubble_distance(b, c))
        assert bubble_mutual_reachability(b, b, {0: 1.0}) == 1.0


class TestClusterBubbles:
    """Clustering hiérarchique des bulles."""

    def test_two_far_groups(self):
        bubbles = [DataBubble(k, [0.1 * k, 0.0], 4, 0.05) for k in range(3)]
        bubbles += [DataBubble(3 + k, [50.0 + 0.1 * k, 0.0], 5, 0.05) for k in range(3)]
        dendrogram, _ = cluster_bubbles(bubbles, 3)
        flat = extract_flat(dendrogram, 5)
        assert flat.n_clusters == 2
        assert sorted(flat.cluster_weights.values()) == [12.0, 15.0]

    def test_identical_reps(self):
        bubbles = [DataBubble(k, [1.0, 1.0], 3, 0.0) for k in range(4)]
        dendrogram, _ = cluster_bubbles(bubbles, 2)
        flat = extract_flat(dendrogram, 2)
        assert flat.n_clusters == 1
        assert set(flat.labels.values()) == {0}

    def test_two_bubbles(self):
        bubbles = [DataBubble(0, [0.0], 3, 1.0), DataBubble(1, [10.0], 3, 1.0)]
        dendrogram, _ = cluster_bubbles(bubbles, 2)
        assert len(dendrogram.merges) == 1
        assert dendrogram.merges[0].size == 6.0

    def test_single_bubble(self):
        with pytest.raises(InsufficientDataError):
            cluster_bubbles([DataBubble(0, [0.0], 3, 1.0)], 2)

    def test_single_point_bubbles_match_static(self, random_points):
        tree = BubbleTree(1.0, m=2, M=5)
        for p in random_points:
            tree.insert(p)
        bubbles = bubbles_from_leaves(tree.leaf_cfs())
        _, cds = cluster_bubbles(bubbles, 4)
        static = run_static(random_points, 4)
        static_cd = dict(zip((int(i) for i in static.ids), static.core_distances))
        for bubble in bubbles:
            (point_id,) = bubble.members
            assert cds[bubble.bubble_id] == pytest.approx(static_cd[point_id], rel=1e-9)

    def test_full_resolution_matches_exact_pipeline(self):
        points, _ = gen_gaussian_mixture(500, 3, 4, 0.1, seed=9)
        tree = BubbleTree(1.0)
        for p in points:
            tree.insert(p)
        bubbles = bubbles_from_leaves(tree.leaf_cfs())
        bubble_dendrogram, _ = cluster_bubbles(bubbles, 5)

        clusterer = DynamicClusterer(5)
        clusterer.build(points)
        exact_dendrogram = build_dendrogram(clusterer.mst_snapshot())

        np.testing.assert_allclose(sorted(bubble_dendrogram.merge_weights()),
                                   sorted(exact_dendrogram.merge_weights()), rtol=1e-9)
        bubble_flat = extract_flat(bubble_dendrogram, 5)
        exact_flat = extract_flat(exact_dendrogram, 5)
        owner = {next(iter(b.members)): b.bubble_id for b in bubbles}
        ids = sorted(owner)
        score = nmi([bubble_flat.label_of(owner[i]) for i in ids], [exact_flat.label_of(i) for i in ids])
        assert score == pytest.approx(1.0)


class TestAssignPoints:
    """Retour des bulles aux points."""

    def test_nearest_rep(self):
        bubbles = [DataBubble(0, [0.0], 1, 0.0), DataBubble(1, [10.0], 1, 0.0)]
        assert assign_points(make_points([0.4]), bubbles) == {0: 0}

    def test_tie_goes_to_smaller_id(self):
        bubbles = [DataBubble(4, [2.0], 1, 0.0), DataBubble(2, [0.0], 1, 0.0)]
        assert assign_points(make_points([1.0]), bubbles) == {0: 2}

    def test_no_bubbles(self):
        with pytest.raises(InputError):
            assign_points(make_points([1.0]), [])
