"""
Forêt dynamique à arbres link-cut portant l'arbre couvrant minimal maintenu.

Chaque arête est matérialisée par un nœud intermédiaire : la requête de maximum sur un
chemin renvoie ainsi une arête (et non un sommet), que l'on peut ensuite couper.
"""

import math

from models.point import ReachEdge
from utils.exceptions import NotFoundError, StateError

_NEG_INF = float("-inf")


class _SplayNode:
    """Nœud d'arbre splay auxiliaire (sommet ou arête)."""

    __slots__ = ("key", "weight", "left", "right", "parent", "rev", "best")

    def __init__(self, key, weight=_NEG_INF):
        self.key = key
        self.weight = weight
        self.left = None
        self.right = None
        self.parent = None
        self.rev = False
        self.best = self

    def rank(self):
        # ordre total pour départager les arêtes de même poids
        return (self.weight, self.key if isinstance(self.key, tuple) else (-1, -1))


def _is_splay_root(x):
    p = x.parent
    return p is None or (p.left is not x and p.right is not x)


def _push(x):
    if x.rev:
        x.left, x.right = x.right, x.left
        if x.left is not None:
            x.left.rev = not x.left.rev
        if x.right is not None:
            x.right.rev = not x.right.rev
        x.rev = False


def _update(x):
    best = x
    for child in (x.left, x.right):
        if child is not None and child.best.rank() > best.rank():
            best = child.best
    x.best = best


def _rotate(x):
    p = x.parent
    g = p.parent
    if p.left is x:
        p.left = x.right
        if x.right is not None:
            x.right.parent = p
        x.right = p
    else:
        p.right = x.left
        if x.left is not None:
            x.left.parent = p
        x.left = p
    if g is not None:
        if g.left is p:
            g.left = x
        elif g.right is p:
            g.right = x
    x.parent = g
    p.parent = x
    _update(p)
    _update(x)


def _splay(x):
    # propager les inversions depuis la racine de l'arbre splay
    path = [x]
    node = x
    while not _is_splay_root(node):
        node = node.parent
        path.append(node)
    for node in reversed(path):
        _push(node)

    while not _is_splay_root(x):
        p = x.parent
        if not _is_splay_root(p):
            g = p.parent
            if (g.left is p) == (p.left is x):
                _rotate(p)
            else:
                _rotate(x)
        _rotate(x)


def _access(x):
    last = None
    node = x
    while node is not None:
        _splay(node)
        node.right = last
        _update(node)
        last = node
        node = node.parent
    _splay(x)


def _make_root(x):
    _access(x)
    x.rev = not x.rev
    _push(x)


def _find_root(x):
    _access(x)
    node = x
    _push(node)
    while node.left is not None:
        node = node.left
        _push(node)
    _splay(node)
    return node


def _link(x, y):
    _make_root(x)
    x.parent = y


def _cut(x, y):
    _make_root(x)
    _access(y)
    # x est alors le fils gauche direct de y
    if y.left is x and x.left is None and x.right is None:
        y.left = None
        x.parent = None
        _update(y)
    else:
        raise StateError("Les nœuds à couper ne sont pas adjacents")


class LinkCutForest:
    """Forêt couvrante dynamique avec link, cut, connexité et maximum sur un chemin."""

    def __init__(self, vertices=()):
        """
        Initialise une forêt sans arêtes.

        Args:
            vertices (iterable, optional): Sommets initiaux (identifiants de points)
        """
        self._vertex = {}
        self._edge = {}
        self._adjacent = {}
        for v in vertices:
            self.add_vertex(v)

    # -------------------------------------------------------------- sommets

    def add_vertex(self, v):
        """Ajoute un sommet isolé (sans effet s'il existe déjà)."""
        if v not in self._vertex:
            self._vertex[v] = _SplayNode(v)
            self._adjacent[v] = set()

    def remove_vertex(self, v):
        """
        Retire un sommet isolé.

        Raises:
            NotFoundError: Si le sommet est inconnu
            StateError: Si le sommet porte encore des arêtes
        """
        self._require(v)
        if self._adjacent[v]:
            raise StateError(f"Le sommet {v} porte encore {len(self._adjacent[v])} arêtes")
        del self._vertex[v]
        del self._adjacent[v]

    def has_vertex(self, v):
        return v in self._vertex

    def vertices(self):
        """Retourne l'ensemble des sommets."""
        return set(self._vertex)

    def _require(self, v):
        if v not in self._vertex:
            raise NotFoundError(f"Sommet {v} absent de la forêt")

    # -------------------------------------------------------------- arêtes

    @staticmethod
    def _key(u, v):
        return (u, v) if u <= v else (v, u)

    def has_edge(self, u, v):
        return self._key(u, v) in self._edge

    def edge_weight(self, u, v):
        """Retourne le poids courant de l'arête (u, v)."""
        try:
            return self._edge[self._key(u, v)].weight
        except KeyError:
            raise NotFoundError(f"Arête ({u}, {v}) absente de la forêt") from None

    def neighbors(self, v):
        """Retourne les voisins de v dans la forêt."""
        self._require(v)
        return set(self._adjacent[v])

    def link(self, u, v, weight):
        """
        Relie deux sommets de composantes différentes.

        Raises:
            NotFoundError: Si un sommet est inconnu
            StateError: Si u et v sont déjà connectés
        """
        self._require(u)
        self._require(v)
        if self.connected(u, v):
            raise StateError(f"Les sommets {u} et {v} sont déjà connectés")
        key = self._key(u, v)
        edge_node = _SplayNode(key, float(weight))
        self._edge[key] = edge_node
        _link(self._vertex[u], edge_node)
        _link(edge_node, self._vertex[v])
        self._adjacent[u].add(v)
        self._adjacent[v].add(u)

    def cut(self, u, v):
        """
        Coupe l'arête (u, v).

        Returns:
            ReachEdge: L'arête retirée, avec son poids courant

        Raises:
            NotFoundError: Si l'arête est absente
        """
        key = self._key(u, v)
        edge_node = self._edge.pop(key, None)
        if edge_node is None:
            raise NotFoundError(f"Arête ({u}, {v}) absente de la forêt")
        _cut(self._vertex[key[0]], edge_node)
        _cut(edge_node, self._vertex[key[1]])
        self._adjacent[u].discard(v)
        self._adjacent[v].discard(u)
        return ReachEdge(key[0], key[1], edge_node.weight)

    def set_weight(self, u, v, weight):
        """
        Remplace en place le poids d'une arête de la forêt.

        Raises:
            NotFoundError: Si l'arête est absente
        """
        key = self._key(u, v)
        edge_node = self._edge.get(key)
        if edge_node is None:
            raise NotFoundError(f"Arête ({u}, {v}) absente de la forêt")
        _access(edge_node)
        edge_node.weight = float(weight)
        _update(edge_node)

    def connected(self, u, v):
        """Indique si u et v sont dans le même arbre."""
        self._require(u)
        self._require(v)
        if u == v:
            return True
        return _find_root(self._vertex[u]) is _find_root(self._vertex[v])

    def find_max_edge_on_path(self, u, v):
        """
        Arête de poids maximal sur le chemin u–v.

        Returns:
            ReachEdge ou None: L'arête maximale, None si u == v

        Raises:
            StateError: Si u et v ne sont pas connectés
        """
        if u == v:
            return None
        if not self.connected(u, v):
            raise StateError(f"Les sommets {u} et {v} ne sont pas connectés")
        x = self._vertex[u]
        y = self._vertex[v]
        _make_root(x)
        _access(y)
        best = y.best
        if not isinstance(best.key, tuple):
            return None
        return ReachEdge(best.key[0], best.key[1], best.weight)

    # -------------------------------------------------------------- vues

    def edges(self):
        """Retourne les arêtes courantes, triées par (poids, u, v)."""
        result = [ReachEdge(k[0], k[1], node.weight) for k, node in self._edge.items()]
        result.sort(key=ReachEdge.key)
        return result

    def edge_count(self):
        return len(self._edge)

    def vertex_count(self):
        return len(self._vertex)

    def component_count(self):
        """Nombre d'arbres de la forêt (sommets − arêtes, la forêt étant acyclique)."""
        return len(self._vertex) - len(self._edge)

    def total_weight(self):
        """Poids total de la forêt, sommé sans erreur d'arrondi cumulée."""
        return math.fsum(node.weight for node in self._edge.values())

    def is_spanning_tree(self):
        return len(self._vertex) >= 1 and len(self._edge) == len(self._vertex) - 1
