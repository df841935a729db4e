"""
Classes représentant la hiérarchie de clusters et un partitionnement plat.
"""

from typing import NamedTuple

import numpy as np

# Etiquette des éléments qui n'appartiennent à aucun cluster
NOISE = -1


class MergeRecord(NamedTuple):
    """Fusion de deux sous-clusters à une distance donnée."""

    left: int
    right: int
    weight: float
    size: float


class Dendrogram:
    """
    Hiérarchie de fusions, numérotée comme un dendrogramme classique.

    Les feuilles portent les numéros 0..n-1 (dans l'ordre de `leaf_ids`), la i-ème
    fusion crée le nœud n + i.
    """

    def __init__(self, leaf_ids, leaf_weights, merges):
        """
        Args:
            leaf_ids (sequence of int): Identifiants des éléments, dans l'ordre des feuilles
            leaf_weights (sequence of float): Poids de chaque feuille (1 pour un point, n pour une bulle)
            merges (sequence of MergeRecord): Fusions par distance croissante
        """
        self.leaf_ids = tuple(int(i) for i in leaf_ids)
        self.leaf_weights = np.asarray(leaf_weights, dtype=np.float64)
        self.merges = tuple(merges)

    @property
    def n_leaves(self):
        return len(self.leaf_ids)

    @property
    def total_weight(self):
        return float(self.leaf_weights.sum())

    def node_weight(self, node):
        """Poids d'un nœud (feuille ou fusion)."""
        if node < self.n_leaves:
            return float(self.leaf_weights[node])
        return self.merges[node - self.n_leaves].size

    def merge_weights(self):
        """Retourne les distances de fusion, dans l'ordre des fusions."""
        return [record.weight for record in self.merges]

    def leaves_under(self, node):
        """Retourne les numéros de feuilles sous un nœud."""
        leaves = []
        stack = [node]
        while stack:
            current = stack.pop()
            if current < self.n_leaves:
                leaves.append(current)
            else:
                record = self.merges[current - self.n_leaves]
                stack.append(record.right)
                stack.append(record.left)
        return leaves

    def __repr__(self):
        return f"Dendrogram({self.n_leaves} feuilles, {len(self.merges)} fusions)"


class FlatClustering:
    """Etiquette par élément, avec le poids agrégé de chaque cluster."""

    def __init__(self, labels, cluster_weights, noise_weight=0.0):
        """
        Args:
            labels (dict): Identifiant -> étiquette (NOISE pour le bruit)
            cluster_weights (dict): Etiquette -> poids total du cluster
            noise_weight (float, optional): Poids total du bruit. Par défaut 0.
        """
        self.labels = dict(labels)
        self.cluster_weights = dict(cluster_weights)
        self.noise_weight = float(noise_weight)

    @property
    def n_clusters(self):
        return len(self.cluster_weights)

    def label_of(self, element_id):
        return self.labels[element_id]

    def labels_for(self, ids):
        """Retourne les étiquettes dans l'ordre des identifiants donnés."""
        return [self.labels[i] for i in ids]

    def __repr__(self):
        return f"FlatClustering({self.n_clusters} clusters, bruit={self.noise_weight:g})"
