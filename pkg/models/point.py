"""
Classes représentant un point, son voisinage et une arête du graphe d'accessibilité mutuelle.
"""

from typing import NamedTuple

import numpy as np

from utils.exceptions import InputError


class Point:
    """Classe représentant un point identifié de dimension d."""

    __slots__ = ("id", "coords")

    def __init__(self, point_id, coords):
        """
        Initialise un nouveau point.

        Args:
            point_id (int): Identifiant entier non négatif
            coords (array-like): Coordonnées réelles finies

        Raises:
            InputError: Si l'identifiant est négatif ou si une coordonnée n'est pas finie
        """
        point_id = int(point_id)
        if point_id < 0:
            raise InputError(f"L'identifiant du point doit être positif ou nul ({point_id})")

        coords = np.asarray(coords, dtype=np.float64).reshape(-1)
        if coords.size == 0:
            raise InputError(f"Le point {point_id} n'a aucune coordonnée")
        if not np.all(np.isfinite(coords)):
            raise InputError(f"Le point {point_id} a des coordonnées non finies")
        coords.setflags(write=False)

        self.id = point_id
        self.coords = coords

    @property
    def dim(self):
        """int: Dimension du point."""
        return self.coords.shape[0]

    def __repr__(self):
        return f"Point({self.id}, {self.coords.tolist()})"

    def __eq__(self, other):
        if not isinstance(other, Point):
            return NotImplemented
        return self.id == other.id and np.array_equal(self.coords, other.coords)

    def __hash__(self):
        return hash(self.id)


class CoreRecord:
    """Voisinage minPts d'un point et sa distance de cœur."""

    __slots__ = ("point_id", "neighbors", "core_distance")

    def __init__(self, point_id, neighbors, core_distance):
        """
        Initialise un enregistrement de cœur.

        Args:
            point_id (int): Identifiant du point
            neighbors (sequence): Identifiants des minPts plus proches voisins (distance croissante)
            core_distance (float): Distance au dernier voisin de la séquence
        """
        self.point_id = point_id
        self.neighbors = tuple(neighbors)
        self.core_distance = float(core_distance)

    def __eq__(self, other):
        if not isinstance(other, CoreRecord):
            return NotImplemented
        return (self.point_id == other.point_id
                and self.neighbors == other.neighbors
                and self.core_distance == other.core_distance)

    def __repr__(self):
        return f"CoreRecord({self.point_id}, neighbors={list(self.neighbors)}, cd={self.core_distance})"


class ReachEdge(NamedTuple):
    """Arête (u, v) pondérée par la distance d'accessibilité mutuelle."""

    u: int
    v: int
    weight: float

    def key(self):
        """
        Clé de tri totale (poids, plus petit id, plus grand id).

        Returns:
            tuple: La clé de tri
        """
        return (self.weight, min(self.u, self.v), max(self.u, self.v))

    def endpoints(self):
        """Retourne la paire (min, max) des extrémités."""
        return (min(self.u, self.v), max(self.u, self.v))
