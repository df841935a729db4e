"""
Classe représentant un nœud sphérique de l'index spatial.
"""

import itertools

import numpy as np

from clustering.metric_core import distances

_serials = itertools.count()

# Marge relative appliquée aux bornes inférieures utilisées pour l'élagage,
# pour absorber les erreurs d'arrondi des centres et rayons recalculés.
PRUNING_SLACK = 1e-9

# Marqueur des nœuds dont les descendants appartiennent à plusieurs composantes
MIXED_COMPONENT = -1


class SphereNode:
    """Nœud d'un SS-tree : sphère englobante et distances de cœur agrégées."""

    __slots__ = (
        "serial", "is_leaf", "parent", "children", "entries",
        "centroid", "radius", "cd_max", "cd_min", "size",
        "matrix", "cds", "component", "bound",
    )

    def __init__(self, is_leaf, parent=None):
        """
        Initialise un nœud vide.

        Args:
            is_leaf (bool): True pour une feuille (qui stocke des identifiants de points)
            parent (SphereNode, optional): Nœud parent. Par défaut None.
        """
        self.serial = next(_serials)
        self.is_leaf = is_leaf
        self.parent = parent
        self.children = []   # nœuds fils (nœud interne)
        self.entries = []    # identifiants de points (feuille)
        self.centroid = None
        self.radius = 0.0
        self.cd_max = 0.0
        self.cd_min = 0.0
        self.size = 0
        self.matrix = None   # coordonnées des entrées d'une feuille, dans l'ordre de `entries`
        self.cds = None      # distances de cœur des entrées d'une feuille
        self.component = MIXED_COMPONENT
        self.bound = np.inf

    def fanout(self):
        """Retourne le nombre d'entrées (feuille) ou de fils (nœud interne)."""
        return len(self.entries) if self.is_leaf else len(self.children)

    def recompute_bounds(self, coords_of, cd_of):
        """
        Recalcule exactement centre, rayon, agrégats de distance de cœur et effectif.

        Args:
            coords_of (dict): id -> coordonnées
            cd_of (dict): id -> distance de cœur
        """
        if self.is_leaf:
            if not self.entries:
                self.centroid = None
                self.radius = 0.0
                self.cd_max = 0.0
                self.cd_min = 0.0
                self.size = 0
                self.matrix = None
                self.cds = None
                return
            self.matrix = np.vstack([coords_of[i] for i in self.entries])
            self.cds = np.array([cd_of[i] for i in self.entries], dtype=np.float64)
            self.centroid = self.matrix.mean(axis=0)
            self.radius = float(distances(self.matrix, self.centroid).max())
            self.cd_max = float(self.cds.max())
            self.cd_min = float(self.cds.min())
            self.size = len(self.entries)
            return

        sizes = np.array([c.size for c in self.children], dtype=np.float64)
        centers = np.vstack([c.centroid for c in self.children])
        self.centroid = (centers * sizes[:, None]).sum(axis=0) / sizes.sum()
        radii = np.array([c.radius for c in self.children], dtype=np.float64)
        self.radius = float((distances(centers, self.centroid) + radii).max())
        self.cd_max = max(c.cd_max for c in self.children)
        self.cd_min = min(c.cd_min for c in self.children)
        self.size = int(sizes.sum())

    def refresh_core_aggregates(self):
        """Recalcule uniquement cd_max et cd_min à partir des fils ou des entrées."""
        if self.is_leaf:
            if self.cds is None or len(self.cds) == 0:
                self.cd_max = self.cd_min = 0.0
            else:
                self.cd_max = float(self.cds.max())
                self.cd_min = float(self.cds.min())
        else:
            self.cd_max = max(c.cd_max for c in self.children)
            self.cd_min = min(c.cd_min for c in self.children)

    def __repr__(self):
        kind = "feuille" if self.is_leaf else "interne"
        return f"SphereNode({kind}, size={self.size}, radius={self.radius:.4g}, cd_max={self.cd_max:.4g})"
