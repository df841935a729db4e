"""
Extraction hors ligne : dendrogramme à partir d'un arbre couvrant minimal,
sélection de clusters plats par excès de masse et score NMI.
"""

import logging

import numpy as np
from sklearn.metrics import normalized_mutual_info_score

from clustering.dynamic_mst import UnionFind
from models.hierarchy_types import NOISE, Dendrogram, FlatClustering, MergeRecord
from models.point import ReachEdge
from utils.exceptions import InputError

logger = logging.getLogger(__name__)


def build_dendrogram(edges, leaf_weights=None):
    """
    Construit le dendrogramme par liaison simple sur les arêtes de l'arbre couvrant.

    Args:
        edges (sequence of ReachEdge): Arêtes d'un arbre couvrant
        leaf_weights (dict, optional): id -> poids. Par défaut 1 pour chaque extrémité.

    Returns:
        Dendrogram: Fusions par distance croissante

    Raises:
        InputError: Si les arêtes ne forment pas un arbre couvrant des feuilles
    """
    edges = sorted(edges, key=ReachEdge.key)
    if leaf_weights is None:
        leaf_weights = {i: 1.0 for e in edges for i in (e.u, e.v)}
    leaf_ids = sorted(leaf_weights)
    if not leaf_ids:
        raise InputError("Aucune feuille pour construire le dendrogramme")
    if len(edges) != len(leaf_ids) - 1:
        raise InputError(f"{len(edges)} arêtes pour {len(leaf_ids)} feuilles : pas un arbre couvrant")

    position = {leaf: k for k, leaf in enumerate(leaf_ids)}
    n = len(leaf_ids)
    union_find = UnionFind(range(n))
    node_of_root = {k: k for k in range(n)}
    weight_of_root = {k: float(leaf_weights[leaf]) for k, leaf in enumerate(leaf_ids)}

    merges = []
    for edge in edges:
        try:
            a = union_find.find(position[edge.u])
            b = union_find.find(position[edge.v])
        except KeyError:
            raise InputError(f"Arête ({edge.u}, {edge.v}) hors de l'ensemble des feuilles") from None
        if a == b:
            raise InputError(f"L'arête ({edge.u}, {edge.v}) ferme un cycle")
        left, right = sorted((node_of_root[a], node_of_root[b]))
        size = weight_of_root[a] + weight_of_root[b]
        union_find.union(a, b)
        root = union_find.find(a)
        merges.append(MergeRecord(left, right, float(edge.weight), size))
        node_of_root[root] = n + len(merges) - 1
        weight_of_root[root] = size

    return Dendrogram(leaf_ids, [leaf_weights[i] for i in leaf_ids], merges)


def _lambda(distance):
    return np.inf if distance == 0.0 else 1.0 / distance


def _persistence(lam, birth):
    # un point qui sort au moment même de la naissance ne contribue pas (évite inf - inf)
    return 0.0 if lam == birth else lam - birth


class _CondensedTree:
    """Arbre condensé : clusters réels et sorties des feuilles, avec leur λ."""

    def __init__(self, dendrogram, min_cluster_weight):
        self.dendrogram = dendrogram
        self.parent_of = {0: None}
        self.birth = {0: 0.0}
        self.child_clusters = {0: []}
        self.leaf_exits = {0: []}   # cluster -> [(feuille, λ, poids)]
        self.weight = {0: dendrogram.total_weight}
        self._build(min_cluster_weight)

    def _new_cluster(self, parent, lam, weight):
        cid = len(self.birth)
        self.parent_of[cid] = parent
        self.birth[cid] = lam
        self.child_clusters[cid] = []
        self.leaf_exits[cid] = []
        self.weight[cid] = weight
        self.child_clusters[parent].append(cid)
        return cid

    def _fall_out(self, cluster, node, lam):
        dendrogram = self.dendrogram
        for leaf in dendrogram.leaves_under(node):
            self.leaf_exits[cluster].append((leaf, lam, float(dendrogram.leaf_weights[leaf])))

    def _parts_at(self, node, weight):
        # les fusions consécutives de même distance forment une seule division à plusieurs branches
        dendrogram = self.dendrogram
        n = dendrogram.n_leaves
        parts = []
        stack = [node]
        while stack:
            current = stack.pop()
            if current >= n and dendrogram.merges[current - n].weight == weight:
                record = dendrogram.merges[current - n]
                stack.append(record.right)
                stack.append(record.left)
            else:
                parts.append(current)
        return parts

    def _build(self, min_cluster_weight):
        dendrogram = self.dendrogram
        n = dendrogram.n_leaves
        if n < 2:
            return
        stack = [(2 * n - 2, 0)]
        while stack:
            node, cluster = stack.pop()
            weight = dendrogram.merges[node - n].weight
            lam = _lambda(weight)
            if weight == 0.0:
                # éléments confondus : aucune division possible en dessous
                self._fall_out(cluster, node, lam)
                continue
            parts = self._parts_at(node, weight)
            big = [p for p in parts if dendrogram.node_weight(p) >= min_cluster_weight]
            small = [p for p in parts if dendrogram.node_weight(p) < min_cluster_weight]

            for part in small:
                self._fall_out(cluster, part, lam)
            if len(big) >= 2:
                for part in big:
                    cid = self._new_cluster(cluster, lam, dendrogram.node_weight(part))
                    if part < n:
                        self._fall_out(cid, part, lam)
                    else:
                        stack.append((part, cid))
            elif big:
                if big[0] < n:
                    self._fall_out(cluster, big[0], lam)
                else:
                    stack.append((big[0], cluster))

    def stability(self, cluster):
        birth = self.birth[cluster]
        total = sum(_persistence(lam, birth) * w for _, lam, w in self.leaf_exits[cluster])
        total += sum(_persistence(self.birth[c], birth) * self.weight[c] for c in self.child_clusters[cluster])
        return total


def extract_flat(dendrogram, min_cluster_weight, allow_single_cluster=False):
    """
    Sélectionne les clusters plats les plus stables (excès de masse) sur l'arbre condensé.

    Une division n'est réelle que si au moins deux branches atteignent `min_cluster_weight` ;
    les feuilles des petites branches sortent du cluster à ce niveau. La racine n'est
    sélectionnable que si aucun autre cluster n'existe, ou si `allow_single_cluster`.

    Args:
        dendrogram (Dendrogram): Le dendrogramme
        min_cluster_weight (float): Poids minimal d'un cluster
        allow_single_cluster (bool, optional): Autorise la sélection de la racine. Par défaut False.

    Returns:
        FlatClustering: Etiquettes 0..k-1 par identifiant, NOISE pour le bruit

    Raises:
        InputError: Si le poids minimal est inférieur à 1
    """
    if min_cluster_weight < 1:
        raise InputError(f"Le poids minimal d'un cluster doit être au moins 1 ({min_cluster_weight})")

    if dendrogram.n_leaves == 1:
        only = dendrogram.leaf_ids[0]
        weight = dendrogram.total_weight
        if weight >= min_cluster_weight:
            return FlatClustering({only: 0}, {0: weight})
        return FlatClustering({only: NOISE}, {}, weight)

    tree = _CondensedTree(dendrogram, min_cluster_weight)
    n_clusters = len(tree.birth)
    stability = {c: tree.stability(c) for c in range(n_clusters)}
    selected = {c: False for c in range(n_clusters)}

    def unselect_below(cluster):
        stack = list(tree.child_clusters[cluster])
        while stack:
            c = stack.pop()
            selected[c] = False
            stack.extend(tree.child_clusters[c])

    root_eligible = ((n_clusters == 1 or allow_single_cluster)
                     and dendrogram.total_weight >= min_cluster_weight)
    # les fils ont des numéros plus grands que leur parent
    for cluster in range(n_clusters - 1, -1, -1):
        if cluster == 0 and not root_eligible:
            break
        children = tree.child_clusters[cluster]
        child_total = sum(stability[c] for c in children)
        if children and child_total > stability[cluster]:
            stability[cluster] = child_total
        else:
            selected[cluster] = True
            unselect_below(cluster)

    label_of_cluster = {}
    for cluster in range(n_clusters):
        if selected[cluster]:
            label_of_cluster[cluster] = len(label_of_cluster)

    root_threshold = max((lam for _, lam, _ in tree.leaf_exits[0]), default=np.inf)
    labels = {}
    cluster_weights = {}
    noise_weight = 0.0
    for cluster in range(n_clusters):
        owner = cluster
        while owner is not None and not selected[owner]:
            owner = tree.parent_of[owner]
        for leaf, lam, w in tree.leaf_exits[cluster]:
            element = dendrogram.leaf_ids[leaf]
            if owner is None or (owner == 0 and cluster == 0 and lam < root_threshold):
                labels[element] = NOISE
                noise_weight += w
            else:
                label = label_of_cluster[owner]
                labels[element] = label
                cluster_weights[label] = cluster_weights.get(label, 0.0) + w

    logger.debug("Extraction : %d clusters, poids du bruit %g", len(cluster_weights), noise_weight)
    return FlatClustering(labels, cluster_weights, noise_weight)


def nmi(labels_a, labels_b):
    """
    Information mutuelle normalisée (moyenne arithmétique des entropies).

    Le bruit est traité comme une classe ordinaire.

    Args:
        labels_a (sequence): Première étiquetage
        labels_b (sequence): Second étiquetage

    Returns:
        float: Score dans [0, 1]

    Raises:
        InputError: Si les longueurs diffèrent ou sont nulles
    """
    labels_a = list(labels_a)
    labels_b = list(labels_b)
    if len(labels_a) != len(labels_b):
        raise InputError(f"Etiquetages de longueurs différentes ({len(labels_a)} et {len(labels_b)})")
    if not labels_a:
        raise InputError("Etiquetages vides")
    return float(normalized_mutual_info_score(labels_a, labels_b, average_method="arithmetic"))
