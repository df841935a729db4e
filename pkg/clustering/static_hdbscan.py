"""
Pipeline HDBSCAN statique : distances de cœur, arbre couvrant minimal, dendrogramme, clusters plats.

Sert de référence par fenêtre pour le pilote en fenêtre glissante et de commande `static`.
"""

import logging
from dataclasses import dataclass

import numpy as np
from sklearn.neighbors import KDTree

from clustering.hierarchy import build_dendrogram, extract_flat
from clustering.metric_core import points_matrix, prim_over_matrix
from models.hierarchy_types import Dendrogram, FlatClustering
from utils.exceptions import InsufficientDataError

logger = logging.getLogger(__name__)


@dataclass
class StaticResult:
    """Résultat complet d'un clustering statique."""

    ids: np.ndarray
    core_distances: np.ndarray
    edges: list
    dendrogram: Dendrogram
    flat: FlatClustering

    def labels(self):
        """Etiquettes plates dans l'ordre des identifiants."""
        return self.flat.labels_for(int(i) for i in self.ids)


def static_core_distances(matrix, min_pts):
    """
    Distances de cœur par arbre k-d, le point lui-même étant exclu.

    Args:
        matrix (np.ndarray): Coordonnées (n, d)
        min_pts (int): Le paramètre de densité

    Returns:
        np.ndarray: Distance au minPts-ième autre point, pour chaque ligne
    """
    tree = KDTree(matrix)
    dists, _ = tree.query(matrix, k=min_pts + 1)
    return dists[:, -1]


def prim_mst(ids, matrix, core_distances):
    """Arbre couvrant minimal du graphe d'accessibilité mutuelle (Prim vectorisé)."""
    return prim_over_matrix(ids, matrix, core_distances)


def run_static(points, min_pts, min_cluster_weight=None):
    """
    Exécute le pipeline statique complet sur un ensemble de points.

    Args:
        points (sequence of Point): Les points
        min_pts (int): Le paramètre de densité
        min_cluster_weight (float, optional): Poids minimal d'un cluster. Par défaut minPts.

    Returns:
        StaticResult: Arêtes, dendrogramme et clusters plats

    Raises:
        InsufficientDataError: S'il n'y a pas plus de minPts points
    """
    points = list(points)
    if len(points) <= min_pts:
        raise InsufficientDataError(f"Il faut plus de {min_pts} points ({len(points)})")
    if min_cluster_weight is None:
        min_cluster_weight = min_pts

    ids, matrix = points_matrix(points)
    core_distances = static_core_distances(matrix, min_pts)
    edges = prim_mst(ids, matrix, core_distances)
    dendrogram = build_dendrogram(edges, {int(i): 1.0 for i in ids})
    flat = extract_flat(dendrogram, min_cluster_weight)
    logger.debug("Clustering statique de %d points : %d clusters", len(ids), flat.n_clusters)
    return StaticResult(ids, core_distances, edges, dendrogram, flat)
