"""
Tests du pipeline HDBSCAN statique.
"""

import numpy as np
import pytest

from clustering.hierarchy import nmi
from clustering.metric_core import brute_core_distances, brute_mst, total_weight
from clustering.static_hdbscan import run_static, static_core_distances
from harness.datasets import gen_gaussian_mixture
from models.hierarchy_types import NOISE
from utils.exceptions import InsufficientDataError


class TestStaticPipeline:
    """Distances de cœur, arbre et clusters plats."""

    def test_reference_dataset(self, d1):
        result = run_static(d1, 2, min_cluster_weight=2)
        np.testing.assert_array_equal(result.core_distances, [2.0, 1.0, 2.0, 9.0])
        assert total_weight(result.edges) == 13.0
        assert result.labels() == [0, 0, 0, NOISE]

    def test_core_distances_match_oracle(self, random_points):
        records = brute_core_distances(random_points, 6)
        matrix = np.vstack([p.coords for p in random_points])
        expected = [records[p.id].core_distance for p in random_points]
        np.testing.assert_allclose(static_core_distances(matrix, 6), expected, rtol=1e-12)

    def test_tree_weight_matches_oracle(self, random_points):
        result = run_static(random_points, 4)
        expected = total_weight(brute_mst(random_points, brute_core_distances(random_points, 4)))
        assert total_weight(result.edges) == pytest.approx(expected, rel=1e-9)

    def test_too_few_points(self, d1):
        with pytest.raises(InsufficientDataError):
            run_static(d1[:2], 2)

    def test_recovers_mixture(self):
        points, truth = gen_gaussian_mixture(600, 2, 3, 0.1, seed=5)
        result = run_static(points, 10)
        assert nmi(result.labels(), truth) >= 0.7

    @pytest.mark.slow
    def test_recovers_large_mixture(self):
        points, truth = gen_gaussian_mixture(5000, 10, 10, 0.1, seed=0)
        result = run_static(points, 10)
        assert nmi(result.labels(), truth) >= 0.8
