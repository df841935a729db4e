"""
Arbre équilibré et entièrement dynamique de résumés (clustering features).

Les feuilles gardent les identifiants de leurs points, l'arbre garde un registre
id -> (coordonnées, feuille). Après chaque mise à jour, une action corrective ramène
le nombre de feuilles vers L = ⌈ρ·N⌉.
"""

import itertools
import logging
import math
from collections import Counter
from functools import reduce

import numpy as np

from clustering.metric_core import distances, squared_distances
from models.clustering_feature import ClusteringFeature, cf_merge, cf_subtract
from models.point import Point
from utils.exceptions import ConflictError, InputError, InvariantViolation, NotFoundError
from utils.presets import DEFAULT_FANOUT

logger = logging.getLogger(__name__)

_serials = itertools.count()

QUALITY_LABELS = ("good", "under", "over")


def classify_quality(bubble_weights, total, k=1.0):
    """
    Classe chaque bulle selon la proportion de points qu'elle représente.

    Avec β = n / N, une bulle est sous-remplie si β − μ ≤ −k·σ, sur-remplie si
    β − μ ≥ k·σ, correcte sinon. Un écart type nul rend toutes les bulles correctes.

    Args:
        bubble_weights (sequence of int): Effectif de chaque bulle
        total (int): Nombre total de points
        k (float, optional): Largeur des bandes en écarts types. Par défaut 1.

    Returns:
        list: 'good', 'under' ou 'over' pour chaque bulle

    Raises:
        InputError: Si la séquence est vide, ou si N ou k n'est pas positif
    """
    weights = np.asarray(bubble_weights, dtype=np.float64)
    if weights.size == 0:
        raise InputError("Aucune bulle à classer")
    if total <= 0 or k <= 0:
        raise InputError(f"N et k doivent être positifs (N={total}, k={k})")

    return [QUALITY_LABELS[code] for code in _quality_codes(weights, total, k)]


def _quality_codes(weights, total, k=1.0):
    # 0 = good, 1 = under, 2 = over, dans l'ordre de QUALITY_LABELS
    beta = weights / total
    sigma = beta.std()
    codes = np.zeros(beta.shape[0], dtype=np.int64)
    if sigma == 0.0:
        return codes
    deviation = beta - beta.mean()
    codes[deviation <= -k * sigma] = 1
    codes[deviation >= k * sigma] = 2
    return codes


def _farthest_pair(matrix):
    best = (-1.0, 0, 1)
    for i in range(matrix.shape[0] - 1):
        dists = distances(matrix[i + 1:], matrix[i])
        j = int(np.argmax(dists))
        if dists[j] > best[0]:
            best = (float(dists[j]), i, i + 1 + j)
    return best[1], best[2]


def _two_groups(matrix, min_size):
    """
    Répartit les lignes autour des deux graines les plus éloignées.

    Returns:
        tuple: (indices du premier groupe, indices du second groupe)
    """
    a, b = _farthest_pair(matrix)
    to_a = distances(matrix, matrix[a])
    to_b = distances(matrix, matrix[b])
    in_b = to_b < to_a
    in_b[a] = False
    in_b[b] = True

    # rééquilibrage : le groupe déficitaire récupère les éléments les plus proches de sa graine
    while np.count_nonzero(~in_b) < min_size:
        movable = np.flatnonzero(in_b & (np.arange(len(in_b)) != b))
        in_b[movable[np.argmin(to_a[movable])]] = False
    while np.count_nonzero(in_b) < min_size:
        movable = np.flatnonzero(~in_b & (np.arange(len(in_b)) != a))
        in_b[movable[np.argmin(to_b[movable])]] = True
    return list(np.flatnonzero(~in_b)), list(np.flatnonzero(in_b))


class BubbleNode:
    """Nœud de l'arbre de résumés ; `level` vaut 0 pour une feuille."""

    __slots__ = ("serial", "level", "parent", "children", "members", "cf")

    def __init__(self, level, dim, parent=None):
        self.serial = next(_serials)
        self.level = level
        self.parent = parent
        self.children = []
        self.members = set()
        self.cf = ClusteringFeature.zero(dim)

    @property
    def is_leaf(self):
        return self.level == 0

    def fanout(self):
        return len(self.members) if self.is_leaf else len(self.children)

    def recompute_cf(self, registry):
        """Recalcule le résumé à partir des membres (feuille) ou des fils."""
        if self.is_leaf:
            if self.members:
                self.cf = ClusteringFeature.of_points(np.vstack([registry[i][0] for i in sorted(self.members)]))
            else:
                self.cf = ClusteringFeature.zero(self.cf.dim)
        else:
            self.cf = reduce(cf_merge, (c.cf for c in self.children), ClusteringFeature.zero(self.cf.dim))

    def __repr__(self):
        kind = "feuille" if self.is_leaf else f"niveau {self.level}"
        return f"BubbleNode({kind}, n={self.cf.n}, fils={self.fanout()})"


class BubbleTree:
    """Arbre de résumés maintenant environ ⌈ρ·N⌉ feuilles."""

    def __init__(self, rho=0.01, m=DEFAULT_FANOUT[0], M=DEFAULT_FANOUT[1]):
        """
        Initialise un arbre vide.

        Args:
            rho (float, optional): Taux de compression dans ]0, 1]. Par défaut 0.01.
            m (int, optional): Degré minimal des nœuds internes. Par défaut 5.
            M (int, optional): Degré maximal des nœuds internes. Par défaut 10.

        Raises:
            InputError: Si ρ ou les degrés sont invalides
        """
        if not 0.0 < rho <= 1.0:
            raise InputError(f"Le taux de compression doit être dans ]0, 1] ({rho})")
        if m < 1 or M < 2 or 2 * m > M + 1:
            raise InputError(f"Degrés invalides (m={m}, M={M})")
        self.rho = rho
        self.m = m
        self.M = M
        self.dim = None
        self.root = None
        self._registry = {}
        self._leaves = set()
        # signature (sous-remplies, sur-remplies) relevée à la dernière réorganisation
        self._quality = None

    def __len__(self):
        return len(self._registry)

    def __contains__(self, point_id):
        return point_id in self._registry

    @property
    def target_leaves(self):
        """int: L = ⌈ρ·N⌉ pour l'effectif courant."""
        if not self._registry:
            return 0
        # l'arrondi évite qu'un produit comme 0.1 * 30 dépasse l'entier attendu
        return max(1, math.ceil(round(self.rho * len(self._registry), 9)))

    @property
    def height(self):
        return self.root.level if self.root is not None else 0

    def leaf_count(self):
        return len(self._leaves)

    def root_cf(self):
        """Résumé de tous les points (None si l'arbre est vide)."""
        return self.root.cf if self.root is not None else None

    # ------------------------------------------------------------ mises à jour

    def insert(self, point):
        """
        Insère un point puis applique une action de maintenance.

        Args:
            point (Point): Le point à insérer

        Returns:
            str: L'action de maintenance effectuée

        Raises:
            ConflictError: Si l'identifiant est déjà présent
            InputError: Si la dimension ne correspond pas
        """
        if point.id in self._registry:
            raise ConflictError(f"Point {point.id} déjà présent dans l'arbre")
        if self.dim is None:
            self.dim = point.dim
        elif point.dim != self.dim:
            raise InputError(f"Dimension {point.dim} incompatible avec l'arbre ({self.dim})")

        self._registry[point.id] = (point.coords, None)
        self._place_point(point.id)
        return self.maintain_compression(lazy=True)

    def delete(self, point_id):
        """
        Supprime un point puis applique une action de maintenance.

        Une feuille vidée est retirée ; un nœud interne qui passe sous m fils est
        dissous et ses sous-arbres sont réinsérés à leur niveau.

        Args:
            point_id (int): Identifiant du point

        Returns:
            str: L'action de maintenance effectuée

        Raises:
            NotFoundError: Si l'identifiant est inconnu
        """
        if point_id not in self._registry:
            raise NotFoundError(f"Point {point_id} absent de l'arbre")
        coords, leaf = self._registry.pop(point_id)
        leaf.members.remove(point_id)

        if leaf.members:
            self._withdraw(leaf, ClusteringFeature.of_point(coords))
        else:
            self._remove_leaf(leaf)

        if not self._registry:
            self.root = None
            self._leaves.clear()
            self.dim = None
            self._quality = None
            return "none"
        return self.maintain_compression(lazy=True)

    def maintain_compression(self, lazy=False):
        """
        Applique une seule action corrective vers L feuilles.

        Avec `lazy`, utilisé après chaque insertion ou suppression, la réorganisation à
        L feuilles n'a lieu que si une feuille est sur-remplie et que les effectifs de
        feuilles sous-remplies et sur-remplies ont changé depuis la dernière réorganisation.

        Args:
            lazy (bool, optional): Réorganisation seulement sur changement de qualité. Par défaut False.

        Returns:
            str: 'removed_leaf', 'split_leaf', 'reorganized' ou 'none'
        """
        if self.root is None:
            return "none"

        target = self.target_leaves
        count = len(self._leaves)
        if count > target:
            # feuille la plus sous-remplie
            leaf = min(self._leaves, key=lambda l: (l.cf.n, l.serial))
            self._dissolve_leaf(leaf)
            self._quality = None
            action = "removed_leaf"
        else:
            # feuille la plus sur-remplie
            leaf = min(self._leaves, key=lambda l: (-l.cf.n, l.serial))
            if count < target:
                if leaf.cf.n < 2:
                    return "none"
                self._split_leaf(leaf)
                self._quality = None
                action = "split_leaf"
            else:
                if lazy:
                    signature = self._quality_signature()
                    if signature[1] == 0 or signature == self._quality:
                        return "none"
                self._reorganize(leaf)
                self._quality = self._quality_signature()
                action = "reorganized"

        logger.debug("Maintenance : %s (%d feuilles, cible %d)", action, len(self._leaves), target)
        return action

    # ------------------------------------------------------------ mécanique interne

    def _new_node(self, level):
        node = BubbleNode(level, self.dim)
        if level == 0:
            self._leaves.add(node)
        return node

    def _nearest_child(self, node, coords):
        reps = np.vstack([c.cf.rep() for c in node.children])
        d2 = squared_distances(reps, coords)
        return min(zip(d2, node.children), key=lambda pair: (pair[0], pair[1].serial))[1]

    def _place_point(self, point_id):
        coords = self._registry[point_id][0]
        if self.root is None:
            self.root = self._new_node(0)
        node = self.root
        while not node.is_leaf:
            node = self._nearest_child(node, coords)
        node.members.add(point_id)
        self._registry[point_id] = (coords, node)

        single = ClusteringFeature.of_point(coords)
        while node is not None:
            node.cf = cf_merge(node.cf, single)
            node = node.parent

    def _withdraw(self, leaf, removed, leaf_cf=None):
        """
        Retire le résumé `removed` de la feuille et de ses ancêtres.

        Args:
            leaf (BubbleNode): Feuille qui a perdu des membres
            removed (ClusteringFeature): Résumé des points retirés
            leaf_cf (ClusteringFeature, optional): Résumé exact de la feuille s'il est déjà connu
        """
        leaf.cf = leaf_cf if leaf_cf is not None else cf_subtract(leaf.cf, removed)
        node = leaf.parent
        while node is not None:
            node.cf = cf_subtract(node.cf, removed)
            node = node.parent

    def _quality_signature(self):
        weights = np.fromiter((leaf.cf.n for leaf in self._leaves), dtype=np.float64, count=len(self._leaves))
        counts = np.bincount(_quality_codes(weights, len(self._registry)), minlength=len(QUALITY_LABELS))
        return int(counts[1]), int(counts[2])

    def _refresh_upward(self, node):
        while node is not None:
            node.recompute_cf(self._registry)
            node = node.parent

    def _shrink_root(self):
        while self.root is not None and not self.root.is_leaf and len(self.root.children) == 1:
            child = self.root.children[0]
            child.parent = None
            self.root = child

    def _detach(self, node):
        """
        Retire un nœud de l'arbre et dissout les ancêtres passés sous m fils.

        Returns:
            list: Les sous-arbres orphelins à réinsérer
        """
        parent = node.parent
        if parent is None:
            self.root = None
            return []
        parent.children.remove(node)
        node.parent = None

        orphans = []
        current = parent
        while current is not self.root and len(current.children) < self.m:
            grand = current.parent
            grand.children.remove(current)
            current.parent = None
            for child in current.children:
                child.parent = None
                orphans.append(child)
            current.children = []
            current = grand
        self._refresh_upward(current)
        self._shrink_root()
        return orphans

    def _insert_node(self, node):
        """Insère un sous-arbre entier au niveau qui est le sien."""
        if self.root is None:
            self.root = node
            return
        if node.level > self.root.level:
            old_root = self.root
            self.root = node
            self._insert_node(old_root)
            return
        if node.level == self.root.level:
            self._grow_root(self.root, node)
            return

        target = self.root
        rep = node.cf.rep()
        while target.level > node.level + 1:
            target = self._nearest_child(target, rep)
        target.children.append(node)
        node.parent = target
        self._split_upward(target)

    def _grow_root(self, first, second):
        new_root = self._new_node(first.level + 1)
        new_root.children = [first, second]
        first.parent = new_root
        second.parent = new_root
        new_root.recompute_cf(self._registry)
        self.root = new_root

    def _split_upward(self, node):
        while len(node.children) > self.M:
            sibling = self._split_internal(node)
            if node.parent is None:
                self._grow_root(node, sibling)
                return
            node.parent.children.append(sibling)
            sibling.parent = node.parent
            node = node.parent
        self._refresh_upward(node)

    def _split_internal(self, node):
        children = list(node.children)
        reps = np.vstack([c.cf.rep() for c in children])
        first, second = _two_groups(reps, self.m)
        sibling = self._new_node(node.level)
        node.children = [children[k] for k in first]
        sibling.children = [children[k] for k in second]
        for child in sibling.children:
            child.parent = sibling
        node.recompute_cf(self._registry)
        sibling.recompute_cf(self._registry)
        return sibling

    def _remove_leaf(self, leaf):
        self._leaves.discard(leaf)
        leaf.members = set()
        for orphan in sorted(self._detach(leaf), key=lambda n: n.serial):
            self._insert_node(orphan)

    def _dissolve_leaf(self, leaf):
        members = sorted(leaf.members)
        self._remove_leaf(leaf)
        for point_id in members:
            self._place_point(point_id)

    def _split_leaf(self, leaf):
        ids = sorted(leaf.members)
        matrix = np.vstack([self._registry[i][0] for i in ids])
        first, second = _two_groups(matrix, 1)

        sibling = self._new_node(0)
        leaf.members = {ids[k] for k in first}
        sibling.members = {ids[k] for k in second}
        for point_id in sibling.members:
            self._registry[point_id] = (self._registry[point_id][0], sibling)
        sibling.recompute_cf(self._registry)
        self._refresh_upward(leaf)
        self._insert_node(sibling)

    def _reorganize(self, leaf):
        count = min(self.m, leaf.cf.n - 1)
        if count <= 0:
            return
        ids = sorted(leaf.members)
        matrix = np.vstack([self._registry[i][0] for i in ids])
        dists = distances(matrix, leaf.cf.rep())
        order = np.lexsort((np.array(ids), -dists))
        extracted = [ids[k] for k in order[:count]]

        # retrait groupé : la feuille est recalculée sur les lignes restantes
        leaf.members.difference_update(extracted)
        removed = ClusteringFeature.of_points(matrix[order[:count]])
        self._withdraw(leaf, removed, ClusteringFeature.of_points(matrix[np.sort(order[count:])]))
        for point_id in extracted:
            self._place_point(point_id)

    # ------------------------------------------------------------ lecture

    def leaf_cfs(self):
        """
        Extrait le résumé et les membres de chaque feuille, dans l'ordre de création.

        Returns:
            tuple: Couples (ClusteringFeature, frozenset des identifiants membres)
        """
        return tuple(
            (ClusteringFeature(leaf.cf.ls.copy(), leaf.cf.ss, leaf.cf.n), frozenset(leaf.members))
            for leaf in sorted(self._leaves, key=lambda l: l.serial)
        )

    def quality_summary(self, k=1.0):
        """
        Compte les feuilles correctes, sous-remplies et sur-remplies.

        Args:
            k (float, optional): Largeur des bandes en écarts types. Par défaut 1.

        Returns:
            dict: {'good': int, 'under': int, 'over': int}
        """
        summary = dict.fromkeys(QUALITY_LABELS, 0)
        if not self._leaves:
            return summary
        weights = [leaf.cf.n for leaf in self._leaves]
        summary.update(Counter(classify_quality(weights, len(self._registry), k)))
        return summary

    def points(self):
        """Retourne les points enregistrés."""
        return [Point(i, coords) for i, (coords, _) in self._registry.items()]

    def audit(self):
        """
        Vérifie équilibre, degrés, résumés et registre.

        Raises:
            InvariantViolation: Au premier invariant non respecté
        """
        if self.root is None:
            if self._registry or self._leaves:
                raise InvariantViolation("Arbre vide avec des points enregistrés")
            return
        if self.root.parent is not None:
            raise InvariantViolation("La racine a un parent")

        reachable = set()
        members_seen = {}
        stack = [self.root]
        while stack:
            node = stack.pop()
            is_root = node is self.root
            if node.is_leaf:
                reachable.add(node)
                if not node.members:
                    raise InvariantViolation("Feuille vide")
                for point_id in node.members:
                    members_seen[point_id] = node
                expected = ClusteringFeature.of_points(np.vstack([self._registry[i][0] for i in sorted(node.members)]))
            else:
                count = len(node.children)
                if is_root and not 2 <= count <= self.M:
                    raise InvariantViolation(f"Racine avec {count} fils")
                if not is_root and not self.m <= count <= self.M:
                    raise InvariantViolation(f"Nœud interne hors bornes de degré : {count}")
                for child in node.children:
                    if child.parent is not node:
                        raise InvariantViolation("Lien parent incohérent")
                    if child.level != node.level - 1:
                        raise InvariantViolation("Arbre déséquilibré")
                    stack.append(child)
                expected = reduce(cf_merge, (c.cf for c in node.children))
            if not node.cf.is_close(expected):
                raise InvariantViolation(f"Résumé incohérent sur {node!r}")

        if reachable != self._leaves:
            raise InvariantViolation("Ensemble des feuilles désynchronisé")
        if set(members_seen) != set(self._registry):
            raise InvariantViolation("Registre et membres des feuilles différents")
        for point_id, (_, leaf) in self._registry.items():
            if members_seen[point_id] is not leaf:
                raise InvariantViolation(f"Point {point_id} mal référencé")
        total = ClusteringFeature.of_points(np.vstack([c for c, _ in self._registry.values()]))
        if not self.root.cf.is_close(total):
            raise InvariantViolation("Le résumé de la racine ne couvre pas tous les points")
