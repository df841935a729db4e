"""
Maintenance de l'arbre couvrant minimal du graphe d'accessibilité mutuelle.

Deux mécanismes : l'application d'arêtes candidates sur la forêt link-cut (insertion)
et la reconnexion des composantes par Boruvka à double arbre sur l'index spatial
(suppression, ou construction complète à partir d'une forêt vide).
"""

import logging

import numpy as np

from clustering.metric_core import distances
from index.sphere_node import MIXED_COMPONENT
from index.ss_index import node_pair_distance
from models.point import ReachEdge
from utils.exceptions import InputError, StateError

logger = logging.getLogger(__name__)


class UnionFind:
    """Union-find sur des identifiants quelconques, avec compression de chemin."""

    def __init__(self, elements=()):
        """
        Initialise une partition où chaque élément est sa propre composante.

        Args:
            elements (iterable, optional): Les éléments initiaux
        """
        self.parents = {}
        self.sizes = {}
        self.num_components = 0
        for element in elements:
            self.add(element)

    def add(self, element):
        if element not in self.parents:
            self.parents[element] = element
            self.sizes[element] = 1
            self.num_components += 1

    def find(self, element):
        """Retourne le représentant de la composante de l'élément."""
        root = element
        while self.parents[root] != root:
            root = self.parents[root]
        # compression du chemin parcouru
        while self.parents[element] != root:
            self.parents[element], element = root, self.parents[element]
        return root

    def union(self, a, b):
        """
        Fusionne les composantes de a et b.

        Returns:
            bool: True si une fusion a eu lieu, False si déjà connectés
        """
        ra = self.find(a)
        rb = self.find(b)
        if ra == rb:
            return False
        if self.sizes[ra] < self.sizes[rb]:
            ra, rb = rb, ra
        self.parents[rb] = ra
        self.sizes[ra] += self.sizes[rb]
        self.num_components -= 1
        return True

    def retrieve_components(self):
        """Retourne la liste des composantes (listes d'éléments)."""
        components = {}
        for element in self.parents:
            components.setdefault(self.find(element), []).append(element)
        return list(components.values())


class BoruvkaState:
    """Etat d'une exécution de Boruvka : partition, meilleure arête par composante, marquage des nœuds."""

    def __init__(self, union_find):
        """
        Args:
            union_find (UnionFind): Partition courante des points
        """
        self.union_find = union_find
        self.best_weight = {}
        self.best_edge = {}
        self.component_of = {}
        self.leaf_components = {}

    def reset_round(self):
        """Oublie les candidats du tour précédent."""
        self.best_weight = {}
        self.best_edge = {}
        self.component_of = {}
        self.leaf_components = {}

    def bound(self, component):
        """d(C) : poids de la meilleure arête sortante connue de la composante."""
        return self.best_weight.get(component, np.inf)

    def offer(self, component, edge):
        """
        Propose une arête sortante pour une composante, retenue si elle améliore (poids, ids).

        Returns:
            bool: True si l'arête a été retenue
        """
        current = self.best_edge.get(component)
        if current is None or edge.key() < current.key():
            self.best_edge[component] = edge
            self.best_weight[component] = edge.weight
            return True
        return False


def apply_candidate_edge(forest, edge):
    """
    Applique une arête candidate à la forêt en empêchant la formation de cycles.

    Args:
        forest (LinkCutForest): La forêt maintenue
        edge (ReachEdge): L'arête candidate

    Returns:
        str ou tuple: 'linked', 'rejected' ou ('replaced', arête_coupée)

    Raises:
        NotFoundError: Si une extrémité n'est pas un sommet de la forêt
        InputError: Si l'arête est une boucle
    """
    if edge.u == edge.v:
        raise InputError(f"Arête en boucle sur le sommet {edge.u}")

    if not forest.connected(edge.u, edge.v):
        forest.link(edge.u, edge.v, edge.weight)
        return "linked"

    heaviest = forest.find_max_edge_on_path(edge.u, edge.v)
    # à poids égal l'arête en place est conservée
    if heaviest.weight <= edge.weight:
        return "rejected"

    forest.cut(heaviest.u, heaviest.v)
    forest.link(edge.u, edge.v, edge.weight)
    return "replaced", heaviest


def remove_edges(forest, predicate):
    """
    Coupe toutes les arêtes de la forêt qui satisfont le prédicat.

    Args:
        forest (LinkCutForest): La forêt
        predicate (callable): ReachEdge -> bool

    Returns:
        list: Les arêtes retirées
    """
    removed = []
    for edge in forest.edges():
        if predicate(edge):
            removed.append(forest.cut(edge.u, edge.v))
    return removed


def update_tree(node, state):
    """
    Marque chaque nœud de l'index avec sa composante, ou MIXED_COMPONENT si ses descendants en mélangent plusieurs.

    Remet aussi à l'infini la borne d(Q) de chaque nœud.

    Args:
        node (SphereNode): Racine du sous-arbre
        state (BoruvkaState): L'état courant

    Returns:
        int: La composante du nœud
    """
    node.bound = np.inf
    if node.is_leaf:
        comps = np.array([state.union_find.find(i) for i in node.entries], dtype=np.int64)
        for point_id, comp in zip(node.entries, comps):
            state.component_of[point_id] = int(comp)
        state.leaf_components[node.serial] = comps
        if len(comps) and np.all(comps == comps[0]):
            node.component = int(comps[0])
        else:
            node.component = MIXED_COMPONENT
        return node.component

    child_components = [update_tree(child, state) for child in node.children]
    first = child_components[0]
    if first != MIXED_COMPONENT and all(c == first for c in child_components):
        node.component = first
    else:
        node.component = MIXED_COMPONENT
    return node.component


def find_component_neighbors(Q, R, state):
    """
    Parcours simultané de deux sous-arbres à la recherche des arêtes sortantes les plus légères.

    Pour chaque composante C_q ayant un point sous Q, la meilleure arête croisée trouvée
    est enregistrée dans d(C_q), e(C_q). Le parcours est élagué quand Q et R forment une
    seule composante, ou quand la borne inférieure entre Q et R atteint d(Q).

    Args:
        Q (SphereNode): Nœud requête
        R (SphereNode): Nœud référence
        state (BoruvkaState): L'état courant (marquages à jour)

    Returns:
        dict: composante -> meilleure ReachEdge connue
    """
    _traverse(Q, R, state)
    return dict(state.best_edge)


def _traverse(Q, R, state):
    if Q.component != MIXED_COMPONENT and Q.component == R.component:
        return
    # borne inférieure de l'équation d'accessibilité mutuelle
    lower = max(node_pair_distance(Q, R), Q.cd_min, R.cd_min)
    if lower >= Q.bound:
        return

    if Q.is_leaf and R.is_leaf:
        _scan_leaves(Q, R, state)
        Q.bound = max(state.bound(state.component_of[q]) for q in Q.entries)
    elif Q.is_leaf:
        for child in _by_distance(Q, R.children):
            _traverse(Q, child, state)
    elif R.is_leaf:
        for child in Q.children:
            _traverse(child, R, state)
        Q.bound = max(child.bound for child in Q.children)
    else:
        for q_child in Q.children:
            for r_child in _by_distance(q_child, R.children):
                _traverse(q_child, r_child, state)
        Q.bound = max(child.bound for child in Q.children)


def _by_distance(Q, children):
    # visiter d'abord les nœuds proches resserre plus vite les bornes
    if len(children) < 2:
        return children
    return sorted(children, key=lambda c: (node_pair_distance(Q, c), c.serial))


def _scan_leaves(Q, R, state):
    r_ids = R.entries
    r_comps = state.leaf_components[R.serial]
    for row, q in enumerate(Q.entries):
        cq = state.component_of[q]
        cd_q = Q.cds[row]
        valid = r_comps != cq
        if not valid.any():
            continue
        weights = np.maximum(np.maximum(distances(R.matrix, Q.matrix[row]), cd_q), R.cds)
        weights = np.where(valid, weights, np.inf)
        w_min = float(weights.min())
        if w_min > state.bound(cq):
            continue
        for k in np.flatnonzero(weights == w_min):
            r = r_ids[k]
            state.offer(cq, ReachEdge(min(q, r), max(q, r), w_min))


def dual_tree_boruvka(index, forest):
    """
    Complète une forêt couvrante minimale en arbre couvrant minimal par Boruvka à double arbre.

    Args:
        index (SSIndex): L'index spatial (distances de cœur à jour)
        forest (LinkCutForest): La forêt à compléter, sur le même ensemble de sommets

    Returns:
        LinkCutForest: La forêt complétée (le même objet)

    Raises:
        StateError: Si les sommets de la forêt et les points de l'index diffèrent
    """
    ids = set(index.ids())
    if ids != forest.vertices():
        raise StateError(
            f"Sommets de la forêt ({forest.vertex_count()}) et points de l'index ({len(ids)}) différents"
        )

    union_find = UnionFind(ids)
    for edge in forest.edges():
        union_find.union(edge.u, edge.v)
    state = BoruvkaState(union_find)

    target = len(ids) - 1
    rounds = 0
    while forest.edge_count() < target:
        state.reset_round()
        update_tree(index.root, state)
        candidates = find_component_neighbors(index.root, index.root, state)
        if not candidates:
            raise StateError("Boruvka ne trouve plus d'arête sortante")
        for edge in sorted(candidates.values(), key=ReachEdge.key):
            if union_find.union(edge.u, edge.v):
                forest.link(edge.u, edge.v, edge.weight)
        rounds += 1
        logger.debug("Boruvka : tour %d, %d composantes restantes", rounds, union_find.num_components)
    return forest
