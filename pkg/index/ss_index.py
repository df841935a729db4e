"""
Index spatial entièrement dynamique à sphères englobantes (type SS-tree).

Chaque nœud garde en cache la plus grande (et la plus petite) distance de cœur de ses
descendants, ce qui permet d'élaguer la requête des plus proches voisins inverses.
"""

import heapq
import logging
from dataclasses import dataclass

import numpy as np

from clustering.metric_core import distances, squared_distances
from index.sphere_node import PRUNING_SLACK, SphereNode
from models.point import Point
from utils.exceptions import (ConflictError, InputError, InsufficientDataError,
                              InvariantViolation, NotFoundError)
from utils.presets import DEFAULT_FANOUT, DEFAULT_MIN_PTS

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IndexConfig:
    """Paramètres de l'index : minPts et bornes de degré (m, M)."""

    min_pts: int = DEFAULT_MIN_PTS
    m: int = DEFAULT_FANOUT[0]
    M: int = DEFAULT_FANOUT[1]

    def __post_init__(self):
        if self.min_pts < 1:
            raise InputError(f"minPts doit être au moins 1 ({self.min_pts})")
        if self.m < 1 or self.M < 2:
            raise InputError(f"Degrés invalides (m={self.m}, M={self.M})")
        if 2 * self.m > self.M + 1:
            raise InputError(f"Les degrés doivent vérifier 2·m ≤ M + 1 (m={self.m}, M={self.M})")


def min_node_distance(q, node):
    """
    Borne inférieure de la distance entre q et tout point descendant du nœud.

    Args:
        q (array-like): Point de requête
        node (SphereNode): Le nœud

    Returns:
        float: max(0, ‖q − centre‖ − rayon)
    """
    if node.centroid is None:
        return np.inf
    dist = float(distances(np.asarray(node.centroid).reshape(1, -1), np.asarray(q, dtype=np.float64))[0])
    return max(0.0, dist - node.radius)


def pruning_distance(q, node):
    """Version de `min_node_distance` diminuée d'une marge d'arrondi, utilisée pour élaguer."""
    if node.centroid is None:
        return np.inf
    dist = float(distances(node.centroid.reshape(1, -1), q)[0])
    return max(0.0, dist - node.radius - PRUNING_SLACK * (dist + node.radius))


def node_pair_distance(a, b):
    """
    Borne inférieure de la distance entre un point de `a` et un point de `b`.

    Args:
        a (SphereNode): Premier nœud
        b (SphereNode): Second nœud

    Returns:
        float: Borne inférieure, marge d'arrondi comprise
    """
    if a is b:
        return 0.0
    dist = float(distances(a.centroid.reshape(1, -1), b.centroid)[0])
    spread = a.radius + b.radius
    return max(0.0, dist - spread - PRUNING_SLACK * (dist + spread))


class SSIndex:
    """Index spatial dynamique à sphères englobantes."""

    def __init__(self, config=None):
        """
        Initialise un index vide.

        Args:
            config (IndexConfig, optional): Paramètres de l'index. Par défaut IndexConfig().
        """
        self.config = config or IndexConfig()
        self.root = SphereNode(is_leaf=True)
        self.height = 0
        self.dim = None
        self._coords = {}
        self._cd = {}
        self._leaf_of = {}

    # ------------------------------------------------------------------ accès

    def __len__(self):
        return len(self._coords)

    def __contains__(self, point_id):
        return point_id in self._coords

    def ids(self):
        """Retourne la liste des identifiants stockés."""
        return list(self._coords)

    def coords(self, point_id):
        """Retourne les coordonnées d'un point stocké."""
        try:
            return self._coords[point_id]
        except KeyError:
            raise NotFoundError(f"Point {point_id} absent de l'index") from None

    def core_distance(self, point_id):
        """Retourne la distance de cœur mémorisée pour un point."""
        try:
            return self._cd[point_id]
        except KeyError:
            raise NotFoundError(f"Point {point_id} absent de l'index") from None

    def points(self):
        """Retourne les points stockés."""
        return [Point(i, c) for i, c in self._coords.items()]

    def leaves(self):
        """Parcourt toutes les feuilles de l'index."""
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                yield node
            else:
                stack.extend(node.children)

    # -------------------------------------------------------------- insertion

    def insert(self, point, core_distance=0.0):
        """
        Insère un point dans l'index.

        Args:
            point (Point): Le point à insérer
            core_distance (float, optional): Distance de cœur initiale. Par défaut 0.

        Raises:
            ConflictError: Si l'identifiant est déjà présent
            InputError: Si la dimension ne correspond pas
        """
        if point.id in self._coords:
            raise ConflictError(f"Point {point.id} déjà présent dans l'index")
        if self.dim is None:
            self.dim = point.dim
        elif point.dim != self.dim:
            raise InputError(f"Dimension {point.dim} incompatible avec l'index ({self.dim})")

        self._coords[point.id] = point.coords
        self._cd[point.id] = float(core_distance)
        self._insert_entry(point.id)

    def _insert_entry(self, point_id):
        coords = self._coords[point_id]
        leaf = self._choose_leaf(coords)
        leaf.entries.append(point_id)
        self._leaf_of[point_id] = leaf

        node = leaf
        if node.fanout() > self.config.M:
            node = self._split(node)
        self._refresh_path(node)

    def _choose_leaf(self, coords):
        node = self.root
        while not node.is_leaf:
            centers = np.vstack([c.centroid for c in node.children])
            d2 = squared_distances(centers, coords)
            # plus proche centre, puis plus petit sous-arbre, puis plus ancien nœud
            node = min(
                zip(d2, node.children),
                key=lambda pair: (pair[0], pair[1].size, pair[1].serial),
            )[1]
        return node

    def _split(self, node):
        """
        Scinde un nœud en débordement selon l'axe de variance maximale.

        Returns:
            SphereNode: Le nœud le plus haut dont les bornes restent à rafraîchir
        """
        while node.fanout() > self.config.M:
            if node.is_leaf:
                items = list(node.entries)
                positions = np.vstack([self._coords[i] for i in items])
                tiebreak = np.array(items)
            else:
                for child in node.children:
                    if child.centroid is None:
                        child.recompute_bounds(self._coords, self._cd)
                items = list(node.children)
                positions = np.vstack([c.centroid for c in items])
                tiebreak = np.array([c.serial for c in items])

            axis = int(np.argmax(positions.var(axis=0)))
            order = np.lexsort((tiebreak, positions[:, axis]))
            half = len(items) // 2
            first = [items[k] for k in order[:half]]
            second = [items[k] for k in order[half:]]

            sibling = SphereNode(is_leaf=node.is_leaf)
            if node.is_leaf:
                node.entries = first
                sibling.entries = second
                for point_id in second:
                    self._leaf_of[point_id] = sibling
            else:
                node.children = first
                sibling.children = second
                for child in second:
                    child.parent = sibling
            node.recompute_bounds(self._coords, self._cd)
            sibling.recompute_bounds(self._coords, self._cd)

            if node.parent is None:
                new_root = SphereNode(is_leaf=False)
                new_root.children = [node, sibling]
                node.parent = new_root
                sibling.parent = new_root
                self.root = new_root
                self.height += 1
                logger.debug("Index : nouvelle racine, hauteur %d", self.height)
                return new_root

            parent = node.parent
            parent.children.append(sibling)
            sibling.parent = parent
            node = parent
        return node

    def _refresh_path(self, node):
        while node is not None:
            node.recompute_bounds(self._coords, self._cd)
            node = node.parent

    # -------------------------------------------------------------- suppression

    def delete(self, point_id):
        """
        Supprime un point de l'index.

        Une feuille qui passe sous m entrées est dissoute et ses points réinsérés ;
        un nœud interne qui passe sous m fils subit le même traitement.

        Args:
            point_id (int): Identifiant du point

        Returns:
            Point: Le point supprimé

        Raises:
            NotFoundError: Si l'identifiant est inconnu
        """
        if point_id not in self._coords:
            raise NotFoundError(f"Point {point_id} absent de l'index")

        leaf = self._leaf_of.pop(point_id)
        leaf.entries.remove(point_id)
        coords = self._coords.pop(point_id)
        self._cd.pop(point_id)

        orphans = []
        node = leaf
        while node.parent is not None:
            parent = node.parent
            if node.fanout() < self.config.m:
                parent.children.remove(node)
                node.parent = None
                orphans.extend(self._collect_entries(node))
            else:
                node.recompute_bounds(self._coords, self._cd)
            node = parent
        self.root.recompute_bounds(self._coords, self._cd)
        self._shrink_root()

        if orphans:
            logger.debug("Index : %d points réinsérés après dissolution", len(orphans))
        for orphan in orphans:
            self._insert_entry(orphan)

        if not self._coords:
            self.dim = None
        return Point(point_id, coords)

    def _collect_entries(self, node):
        if node.is_leaf:
            return list(node.entries)
        collected = []
        stack = [node]
        while stack:
            current = stack.pop()
            if current.is_leaf:
                collected.extend(current.entries)
            else:
                stack.extend(current.children)
        return collected

    def _shrink_root(self):
        while not self.root.is_leaf and len(self.root.children) <= 1:
            if not self.root.children:
                self.root = SphereNode(is_leaf=True)
                self.height = 0
                return
            child = self.root.children[0]
            child.parent = None
            self.root = child
            self.height -= 1

    # -------------------------------------------------------------- requêtes

    def knn(self, q, k, exclude_id=None):
        """
        Les k plus proches voisins exacts par parcours best-first des sphères.

        Args:
            q (array-like): Point de requête
            k (int): Nombre de voisins
            exclude_id (int, optional): Identifiant à ignorer. Par défaut None.

        Returns:
            list: Couples (id, distance) triés par distance puis par id

        Raises:
            InsufficientDataError: Si l'index contient moins de k points candidats
        """
        q = np.asarray(q, dtype=np.float64).reshape(-1)
        available = len(self._coords) - (1 if exclude_id in self._coords else 0)
        if k < 1:
            raise InputError(f"k doit être positif ({k})")
        if available < k:
            raise InsufficientDataError(f"Seulement {available} points dans l'index pour k = {k}")
        if self.dim is not None and q.shape[0] != self.dim:
            raise InputError(f"Dimension {q.shape[0]} incompatible avec l'index ({self.dim})")

        # (priorité, type, départage, nœud) : type 0 = nœud, 1 = point
        heap = [(pruning_distance(q, self.root), 0, self.root.serial, self.root)]
        result = []
        while heap and len(result) < k:
            priority, kind, tiebreak, node = heapq.heappop(heap)
            if kind == 1:
                result.append((tiebreak, priority))
                continue
            if node.is_leaf:
                dists = distances(node.matrix, q)
                for point_id, dist in zip(node.entries, dists):
                    if point_id != exclude_id:
                        heapq.heappush(heap, (float(dist), 1, point_id, None))
            else:
                for child in node.children:
                    heapq.heappush(heap, (pruning_distance(q, child), 0, child.serial, child))
        return result

    def rknn(self, p, inclusive=False):
        """
        Les plus proches voisins inverses : les points q tels que d(p, q) < cd(q).

        Un nœud est élagué quand sa distance minimale à p atteint son cd_max.

        Args:
            p (array-like): Point de requête
            inclusive (bool, optional): Si True, accepte aussi d(p, q) = cd(q). Par défaut False.

        Returns:
            set: Identifiants des voisins inverses
        """
        p = np.asarray(p, dtype=np.float64).reshape(-1)
        result = set()
        if not self._coords:
            return result

        stack = [self.root]
        while stack:
            node = stack.pop()
            lower = pruning_distance(p, node)
            if lower > node.cd_max or (not inclusive and lower >= node.cd_max):
                continue
            if node.is_leaf:
                dists = distances(node.matrix, p)
                hits = (dists <= node.cds) if inclusive else (dists < node.cds)
                result.update(node.entries[k] for k in np.flatnonzero(hits))
            else:
                stack.extend(node.children)
        return result

    def refresh_cd(self, point_id, new_cd):
        """
        Met à jour la distance de cœur d'un point et les agrégats de ses ancêtres.

        Args:
            point_id (int): Identifiant du point
            new_cd (float): Nouvelle distance de cœur

        Raises:
            NotFoundError: Si l'identifiant est inconnu
        """
        if point_id not in self._cd:
            raise NotFoundError(f"Point {point_id} absent de l'index")
        new_cd = float(new_cd)
        self._cd[point_id] = new_cd

        leaf = self._leaf_of[point_id]
        leaf.cds[leaf.entries.index(point_id)] = new_cd
        node = leaf
        while node is not None:
            old = (node.cd_max, node.cd_min)
            node.refresh_core_aggregates()
            if (node.cd_max, node.cd_min) == old and node is not leaf:
                break
            node = node.parent

    # -------------------------------------------------------------- contrôle

    def audit(self):
        """
        Vérifie tous les invariants structurels de l'index.

        Raises:
            InvariantViolation: Au premier invariant non respecté
        """
        seen = set()
        leaf_depths = set()
        stack = [(self.root, 0)]
        while stack:
            node, depth = stack.pop()
            is_root = node is self.root
            if node.is_leaf:
                leaf_depths.add(depth)
                if not is_root and not self.config.m <= len(node.entries) <= self.config.M:
                    raise InvariantViolation(f"Feuille hors bornes de degré : {len(node.entries)}")
                for point_id in node.entries:
                    if self._leaf_of.get(point_id) is not node:
                        raise InvariantViolation(f"Point {point_id} mal référencé")
                    seen.add(point_id)
                    d = float(distances(self._coords[point_id].reshape(1, -1), node.centroid)[0])
                    if d > node.radius * (1 + 1e-9) + 1e-12:
                        raise InvariantViolation(f"Point {point_id} hors de la sphère de sa feuille")
                expected_max = max((self._cd[i] for i in node.entries), default=0.0)
            else:
                count = len(node.children)
                if is_root and count < 2:
                    raise InvariantViolation("Racine interne avec moins de deux fils")
                if not is_root and not self.config.m <= count <= self.config.M:
                    raise InvariantViolation(f"Nœud interne hors bornes de degré : {count}")
                for child in node.children:
                    if child.parent is not node:
                        raise InvariantViolation("Lien parent incohérent")
                    stack.append((child, depth + 1))
                expected_max = max(c.cd_max for c in node.children)
            if node.cd_max != expected_max:
                raise InvariantViolation(f"cd_max périmé ({node.cd_max} au lieu de {expected_max})")

        if seen != set(self._coords):
            raise InvariantViolation("Points stockés inaccessibles depuis la racine")
        if len(leaf_depths) > 1:
            raise InvariantViolation(f"Feuilles à des profondeurs différentes : {sorted(leaf_depths)}")
