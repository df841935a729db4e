"""
Modes de clustering comparés par le pilote en fenêtre glissante.

Chaque mode sépare une phase en ligne (suppressions puis insertions d'une fenêtre)
et une phase hors ligne (extraction des clusters plats des points résidents).
"""

import logging

import numpy as np

from clustering.bubble_offline import assign_points, bubbles_from_leaves, cluster_bubbles
from clustering.dynamic_hdbscan import DynamicClusterer
from clustering.hierarchy import build_dendrogram, extract_flat
from clustering.static_hdbscan import run_static
from index.bubble_tree import BubbleTree
from models.hierarchy_types import NOISE, Dendrogram
from utils.exceptions import InputError

logger = logging.getLogger(__name__)


class BaseMode:
    """Classe de base des modes de clustering."""

    name = "base"

    def __init__(self, min_pts, min_cluster_weight=None):
        """
        Args:
            min_pts (int): Le paramètre de densité
            min_cluster_weight (float, optional): Poids minimal d'un cluster. Par défaut minPts.
        """
        self.min_pts = min_pts
        self.min_cluster_weight = min_cluster_weight or min_pts

    def load(self, points):
        """Charge les points initiaux de la fenêtre."""
        raise NotImplementedError

    def apply_slide(self, deleted_ids, inserted_points):
        """
        Applique les suppressions puis les insertions d'une fenêtre.

        Returns:
            dict: Mesures de la phase en ligne (rknn_mean, boruvka_components)
        """
        raise NotImplementedError

    def offline(self):
        """
        Extrait les clusters plats des points résidents.

        Returns:
            dict: Identifiant de point -> étiquette
        """
        raise NotImplementedError

    def extra_fields(self):
        """Champs supplémentaires propres au mode pour le rapport."""
        return {}

    def audit(self):
        """Vérifie les invariants des structures du mode."""


class ExactDynamicMode(BaseMode):
    """Clustering exact maintenu dynamiquement."""

    name = "exact"

    def __init__(self, min_pts, min_cluster_weight=None):
        super().__init__(min_pts, min_cluster_weight)
        self.clusterer = DynamicClusterer(min_pts)

    def load(self, points):
        self.clusterer.build(points)

    def apply_slide(self, deleted_ids, inserted_points):
        stats = [self.clusterer.delete_point(i) for i in deleted_ids]
        stats += [self.clusterer.insert_point(p) for p in inserted_points]
        return {
            "rknn_mean": float(np.mean([s.rknn_size for s in stats])) if stats else 0.0,
            "boruvka_components": int(sum(s.components_reconnected for s in stats)),
            "t_core_ms": float(sum(s.t_core_ms for s in stats)),
            "t_mst_ms": float(sum(s.t_mst_ms for s in stats)),
        }

    def offline(self):
        dendrogram = build_dendrogram(self.clusterer.mst_snapshot())
        return extract_flat(dendrogram, self.min_cluster_weight).labels

    def audit(self):
        self.clusterer.audit()


class BubbleMode(BaseMode):
    """Résumé en ligne par l'arbre de résumés, clustering hors ligne des bulles."""

    name = "bubble"

    def __init__(self, min_pts, rho, min_cluster_weight=None):
        super().__init__(min_pts, min_cluster_weight)
        self.tree = BubbleTree(rho)

    def load(self, points):
        for point in points:
            self.tree.insert(point)

    def apply_slide(self, deleted_ids, inserted_points):
        for point_id in deleted_ids:
            self.tree.delete(point_id)
        for point in inserted_points:
            self.tree.insert(point)
        return {"rknn_mean": None, "boruvka_components": None}

    def offline(self):
        bubbles = bubbles_from_leaves(self.tree.leaf_cfs())
        if len(bubbles) == 1:
            only = bubbles[0]
            dendrogram = Dendrogram([only.bubble_id], [only.n], [])
        else:
            dendrogram, _ = cluster_bubbles(bubbles, self.min_pts)
        flat = extract_flat(dendrogram, self.min_cluster_weight)
        owner = assign_points(self.tree.points(), bubbles)
        return {point_id: flat.labels.get(bubble_id, NOISE) for point_id, bubble_id in owner.items()}

    def extra_fields(self):
        summary = self.tree.quality_summary()
        return {f"bubbles_{label}": count for label, count in summary.items()}

    def audit(self):
        self.tree.audit()


class StaticMode(BaseMode):
    """Recalcul statique complet à chaque fenêtre."""

    name = "static"

    def __init__(self, min_pts, min_cluster_weight=None):
        super().__init__(min_pts, min_cluster_weight)
        self.resident = {}

    def load(self, points):
        self.resident = {p.id: p for p in points}

    def apply_slide(self, deleted_ids, inserted_points):
        for point_id in deleted_ids:
            del self.resident[point_id]
        for point in inserted_points:
            self.resident[point.id] = point
        return {"rknn_mean": None, "boruvka_components": None}

    def offline(self):
        result = run_static(self.resident.values(), self.min_pts, self.min_cluster_weight)
        return result.flat.labels


MODES = {
    "exact": ExactDynamicMode,
    "bubble": BubbleMode,
    "static": StaticMode,
}


def create_mode(name, min_pts, rho=None, min_cluster_weight=None):
    """
    Crée le mode de clustering demandé.

    Args:
        name (str): 'exact', 'bubble' ou 'static'
        min_pts (int): Le paramètre de densité
        rho (float, optional): Taux de compression du mode 'bubble'
        min_cluster_weight (float, optional): Poids minimal d'un cluster

    Returns:
        BaseMode: Le mode

    Raises:
        InputError: Si le nom est inconnu
    """
    if name not in MODES:
        raise InputError(f"Mode inconnu : {name} (attendu : {', '.join(MODES)})")
    if name == "bubble":
        if rho is None:
            raise InputError("Le mode bubble exige un taux de compression")
        return BubbleMode(min_pts, rho, min_cluster_weight)
    return MODES[name](min_pts, min_cluster_weight)
