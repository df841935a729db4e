"""
Classes représentant un résumé additif de points (clustering feature) et la bulle de données qui en dérive.
"""

import math

import numpy as np

from utils.exceptions import InputError, UnderflowError

# Tolérance relative sur les quantités qui devraient être positives (SS, radicande de l'étendue)
CF_TOLERANCE = 1e-9


class ClusteringFeature:
    """Résumé {LS, SS, n} d'un ensemble de points."""

    __slots__ = ("ls", "ss", "n")

    def __init__(self, ls, ss, n):
        """
        Initialise un résumé.

        Args:
            ls (array-like): Somme linéaire des points
            ss (float): Somme des carrés des normes
            n (int): Nombre de points (0 uniquement pour l'élément neutre)

        Raises:
            InputError: Si n est négatif ou SS négatif
        """
        n = int(n)
        if n < 0:
            raise InputError(f"Effectif négatif ({n})")
        ss = float(ss)
        if ss < 0:
            raise InputError(f"Somme des carrés négative ({ss})")
        self.ls = np.array(ls, dtype=np.float64).reshape(-1)
        self.ss = ss
        self.n = n

    @classmethod
    def of_point(cls, coords):
        """Résumé d'un seul point."""
        coords = np.asarray(coords, dtype=np.float64).reshape(-1)
        return cls(coords, float(np.dot(coords, coords)), 1)

    @classmethod
    def zero(cls, dim):
        """Elément neutre de l'addition en dimension `dim`."""
        return cls(np.zeros(dim), 0.0, 0)

    @classmethod
    def of_points(cls, matrix):
        """Résumé d'une matrice de points (n, d)."""
        matrix = np.asarray(matrix, dtype=np.float64)
        return cls(matrix.sum(axis=0), float((matrix * matrix).sum()), matrix.shape[0])

    @property
    def dim(self):
        return self.ls.shape[0]

    def rep(self):
        """Représentant LS / n."""
        if self.n == 0:
            raise InputError("Le résumé vide n'a pas de représentant")
        return self.ls / self.n

    def is_close(self, other, rel=CF_TOLERANCE):
        """Egalité exacte sur n, approchée sur LS et SS."""
        if self.n != other.n or self.dim != other.dim:
            return False
        scale = max(1.0, self.ss, other.ss)
        return (abs(self.ss - other.ss) <= rel * scale
                and np.allclose(self.ls, other.ls, rtol=rel, atol=rel * math.sqrt(scale)))

    def __eq__(self, other):
        if not isinstance(other, ClusteringFeature):
            return NotImplemented
        return self.n == other.n and self.ss == other.ss and np.array_equal(self.ls, other.ls)

    def __repr__(self):
        return f"ClusteringFeature(LS={self.ls.tolist()}, SS={self.ss:.6g}, n={self.n})"


def cf_merge(a, b):
    """
    Additionne deux résumés composante par composante.

    Args:
        a (ClusteringFeature): Premier résumé
        b (ClusteringFeature): Second résumé

    Returns:
        ClusteringFeature: {LS_a + LS_b, SS_a + SS_b, n_a + n_b}

    Raises:
        InputError: Si les dimensions diffèrent
    """
    if a.dim != b.dim:
        raise InputError(f"Dimensions incompatibles ({a.dim} et {b.dim})")
    return ClusteringFeature(a.ls + b.ls, a.ss + b.ss, a.n + b.n)


def cf_subtract(a, b):
    """
    Retire le résumé b du résumé a.

    Args:
        a (ClusteringFeature): Résumé englobant
        b (ClusteringFeature): Résumé d'un sous-ensemble des points de a

    Returns:
        ClusteringFeature: La différence, SS légèrement négatif ramené à 0

    Raises:
        InputError: Si les dimensions diffèrent
        UnderflowError: Si le résultat représente moins d'un point
    """
    if a.dim != b.dim:
        raise InputError(f"Dimensions incompatibles ({a.dim} et {b.dim})")
    n = a.n - b.n
    if n < 1:
        raise UnderflowError(f"La soustraction laisse {n} point(s)")
    ss = a.ss - b.ss
    if ss < 0:
        if ss < -CF_TOLERANCE * max(1.0, a.ss):
            raise UnderflowError(f"Somme des carrés négative après soustraction ({ss})")
        ss = 0.0
    return ClusteringFeature(a.ls - b.ls, ss, n)


class DataBubble:
    """Bulle de données : représentant, effectif, étendue et membres d'un résumé."""

    __slots__ = ("bubble_id", "rep", "n", "extent", "dim", "members")

    def __init__(self, bubble_id, rep, n, extent, members=()):
        """
        Initialise une bulle.

        Args:
            bubble_id (int): Identifiant de la bulle
            rep (array-like): Point représentant
            n (int): Nombre de points représentés
            extent (float): Etendue (rayon typique) de la bulle
            members (iterable, optional): Identifiants des points membres
        """
        if n < 1:
            raise InputError(f"Une bulle représente au moins un point ({n})")
        if extent < 0:
            raise InputError(f"Etendue négative ({extent})")
        self.bubble_id = bubble_id
        self.rep = np.asarray(rep, dtype=np.float64).reshape(-1)
        self.n = int(n)
        self.extent = float(extent)
        self.dim = self.rep.shape[0]
        self.members = frozenset(members)

    def nn_dist(self, k):
        """
        Distance attendue au k-ième plus proche voisin à l'intérieur de la bulle.

        Args:
            k (float): Rang du voisin

        Returns:
            float: (k / n)^(1 / dim) · extent
        """
        if self.extent == 0.0:
            return 0.0
        return (k / self.n) ** (1.0 / self.dim) * self.extent

    def __repr__(self):
        return (f"DataBubble({self.bubble_id}, rep={self.rep.tolist()}, n={self.n}, "
                f"extent={self.extent:.4g})")
