"""
Arithmétique des points, distance d'accessibilité mutuelle et oracles par force brute.

Les oracles (kNN, distances de cœur, RkNN, arbre couvrant minimal sur le graphe complet)
servent de vérité terrain aux tests de tous les autres modules. Toutes les distances
passent par le même noyau `squared_distances`, ce qui garantit des valeurs identiques
au bit près entre les oracles et les structures dynamiques.
"""

import math

import numpy as np

from models.point import CoreRecord, Point, ReachEdge
from utils.exceptions import InputError, InsufficientDataError


def _as_array(p):
    if isinstance(p, Point):
        return p.coords
    return np.asarray(p, dtype=np.float64).reshape(-1)


def squared_distances(matrix, q):
    """
    Calcule les distances euclidiennes au carré entre chaque ligne de `matrix` et `q`.

    Les carrés sont accumulés dimension par dimension, dans le même ordre quelle que
    soit la forme de la matrice.

    Args:
        matrix (np.ndarray): Matrice (n, d)
        q (np.ndarray): Vecteur de dimension d

    Returns:
        np.ndarray: Vecteur (n,) des distances au carré
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix.reshape(1, -1)
    q = np.asarray(q, dtype=np.float64).reshape(-1)
    if matrix.shape[1] != q.shape[0]:
        raise InputError(f"Dimensions incompatibles ({matrix.shape[1]} et {q.shape[0]})")

    acc = np.zeros(matrix.shape[0], dtype=np.float64)
    for j in range(q.shape[0]):
        diff = matrix[:, j] - q[j]
        acc += diff * diff
    return acc


def distances(matrix, q):
    """
    Distances euclidiennes entre les lignes de `matrix` et `q`.

    Args:
        matrix (np.ndarray): Matrice (n, d)
        q (np.ndarray): Vecteur de dimension d

    Returns:
        np.ndarray: Vecteur (n,) des distances
    """
    return np.sqrt(squared_distances(matrix, q))


def euclidean(p, q):
    """
    Distance euclidienne entre deux points.

    Args:
        p (Point ou array-like): Premier point
        q (Point ou array-like): Second point

    Returns:
        float: La distance L2

    Raises:
        InputError: Si les dimensions diffèrent
    """
    a = _as_array(p)
    b = _as_array(q)
    if a.shape[0] != b.shape[0]:
        raise InputError(f"Dimensions incompatibles ({a.shape[0]} et {b.shape[0]})")
    return float(distances(a.reshape(1, -1), b)[0])


def mutual_reachability(cd_p, cd_q, dist):
    """
    Distance d'accessibilité mutuelle : max(cd(p), cd(q), d(p, q)).

    Args:
        cd_p (float): Distance de cœur de p
        cd_q (float): Distance de cœur de q
        dist (float): Distance entre p et q

    Returns:
        float: Le maximum des trois valeurs

    Raises:
        InputError: Si une valeur est négative
    """
    if cd_p < 0 or cd_q < 0 or dist < 0:
        raise InputError(f"Valeurs négatives interdites ({cd_p}, {cd_q}, {dist})")
    return max(cd_p, cd_q, dist)


def points_matrix(points):
    """
    Convertit une séquence de points en (identifiants, matrice de coordonnées).

    Args:
        points (sequence of Point): Les points

    Returns:
        tuple: (np.ndarray des ids, np.ndarray (n, d) des coordonnées)

    Raises:
        InputError: Si les dimensions ne sont pas homogènes
    """
    points = list(points)
    if not points:
        return np.empty(0, dtype=np.int64), np.empty((0, 0), dtype=np.float64)

    dim = points[0].dim
    if any(p.dim != dim for p in points):
        raise InputError("Les points n'ont pas tous la même dimension")

    ids = np.fromiter((p.id for p in points), dtype=np.int64, count=len(points))
    if len(np.unique(ids)) != len(ids):
        raise InputError("Identifiants de points dupliqués")
    matrix = np.vstack([p.coords for p in points])
    return ids, matrix


def _ordered_neighbors(ids, matrix, q, exclude_id=None):
    dists = distances(matrix, q)
    mask = np.ones(len(ids), dtype=bool)
    if exclude_id is not None:
        mask &= ids != exclude_id
    sub_ids = ids[mask]
    sub_dists = dists[mask]
    # tri par distance puis par identifiant
    order = np.lexsort((sub_ids, sub_dists))
    return sub_ids[order], sub_dists[order]


def brute_knn(points, q, k, exclude_id=None):
    """
    Oracle kNN par parcours linéaire.

    Args:
        points (sequence of Point): Les points candidats
        q (array-like): Point de requête
        k (int): Nombre de voisins
        exclude_id (int, optional): Identifiant à exclure. Par défaut None.

    Returns:
        list: Couples (id, distance) triés par distance puis id

    Raises:
        InsufficientDataError: S'il y a moins de k candidats
    """
    ids, matrix = points_matrix(points)
    q = _as_array(q)
    order_ids, order_dists = _ordered_neighbors(ids, matrix, q, exclude_id)
    if len(order_ids) < k:
        raise InsufficientDataError(f"Seulement {len(order_ids)} points pour k = {k}")
    return [(int(i), float(d)) for i, d in zip(order_ids[:k], order_dists[:k])]


def brute_core_distances(points, min_pts):
    """
    Oracle des distances de cœur : les minPts plus proches autres points de chaque point.

    Args:
        points (sequence of Point): Les points
        min_pts (int): Le paramètre de densité minPts

    Returns:
        dict: id -> CoreRecord

    Raises:
        InsufficientDataError: Si le nombre de points ne dépasse pas minPts
    """
    points = list(points)
    if min_pts < 1:
        raise InputError(f"minPts doit être positif ({min_pts})")
    if len(points) <= min_pts:
        raise InsufficientDataError(
            f"Il faut plus de {min_pts} points pour calculer les distances de cœur ({len(points)})"
        )

    ids, matrix = points_matrix(points)
    records = {}
    for row, point_id in enumerate(ids):
        order_ids, order_dists = _ordered_neighbors(ids, matrix, matrix[row], exclude_id=point_id)
        neighbors = [int(i) for i in order_ids[:min_pts]]
        records[int(point_id)] = CoreRecord(int(point_id), neighbors, float(order_dists[min_pts - 1]))
    return records


def brute_rknn(points, core_records, q, inclusive=False):
    """
    Oracle RkNN : les points dont la distance de cœur dépasse leur distance à q.

    Args:
        points (sequence of Point): Les points
        core_records (dict): id -> CoreRecord (ou id -> distance de cœur)
        q (array-like): Point de requête
        inclusive (bool, optional): Si True, l'égalité d(q, x) = cd(x) est acceptée. Par défaut False.

    Returns:
        set: Identifiants des plus proches voisins inverses
    """
    q = _as_array(q)
    result = set()
    for p in points:
        record = core_records[p.id]
        cd = record.core_distance if isinstance(record, CoreRecord) else float(record)
        d = euclidean(p.coords, q)
        if d < cd or (inclusive and d == cd):
            result.add(p.id)
    return result


def brute_mst(points, core_records):
    """
    Oracle de l'arbre couvrant minimal par l'algorithme de Prim sur le graphe complet.

    Args:
        points (sequence of Point): Les points
        core_records (dict): id -> CoreRecord

    Returns:
        list: Les n - 1 arêtes ReachEdge de l'arbre

    Raises:
        InsufficientDataError: S'il y a moins de 2 points
    """
    points = list(points)
    if len(points) < 2:
        raise InsufficientDataError("Il faut au moins 2 points pour un arbre couvrant")

    ids, matrix = points_matrix(points)
    cds = np.array([core_records[int(i)].core_distance for i in ids], dtype=np.float64)
    return prim_over_matrix(ids, matrix, cds)


def prim_over_matrix(ids, matrix, cds):
    """
    Algorithme de Prim vectorisé sur le graphe d'accessibilité mutuelle implicite.

    Args:
        ids (np.ndarray): Identifiants des sommets
        matrix (np.ndarray): Coordonnées (n, d)
        cds (np.ndarray): Distances de cœur (n,)

    Returns:
        list: Les n - 1 arêtes ReachEdge de l'arbre
    """
    n = len(ids)
    in_tree = np.zeros(n, dtype=bool)
    best = np.full(n, np.inf)
    parent = np.full(n, -1, dtype=np.int64)
    edges = []

    current = 0
    in_tree[current] = True
    for _ in range(n - 1):
        weights = np.maximum(np.maximum(distances(matrix, matrix[current]), cds), cds[current])
        improve = (~in_tree) & (weights < best)
        best[improve] = weights[improve]
        parent[improve] = current

        candidates = np.where(in_tree, np.inf, best)
        nxt = int(np.argmin(candidates))
        edges.append(ReachEdge(int(ids[parent[nxt]]), int(ids[nxt]), float(best[nxt])))
        in_tree[nxt] = True
        current = nxt
    return edges


def total_weight(edges):
    """
    Poids total d'une séquence d'arêtes, calculé sans erreur d'arrondi cumulée.

    Args:
        edges (iterable of ReachEdge): Les arêtes

    Returns:
        float: La somme exacte arrondie des poids
    """
    return math.fsum(e.weight for e in edges)


def sorted_weights(edges):
    """Retourne la liste triée des poids d'arêtes (multiensemble comparable)."""
    return sorted(e.weight for e in edges)


def prim_over_weights(ids, weights):
    """
    Algorithme de Prim sur une matrice de poids complète et symétrique.

    Args:
        ids (sequence): Identifiants des sommets, dans l'ordre des lignes
        weights (np.ndarray): Matrice (n, n) des poids

    Returns:
        list: Les n - 1 arêtes ReachEdge de l'arbre
    """
    n = len(ids)
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (n, n):
        raise InputError(f"Matrice de poids de forme {weights.shape} pour {n} sommets")
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = weights[0].copy()
    parent = np.zeros(n, dtype=np.int64)
    edges = []
    for _ in range(n - 1):
        nxt = int(np.argmin(np.where(in_tree, np.inf, best)))
        edges.append(ReachEdge(int(ids[parent[nxt]]), int(ids[nxt]), float(best[nxt])))
        in_tree[nxt] = True
        improve = (~in_tree) & (weights[nxt] < best)
        best[improve] = weights[nxt][improve]
        parent[improve] = nxt
    return edges
