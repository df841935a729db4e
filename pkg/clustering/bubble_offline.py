"""
Composante hors ligne : bulles de données dérivées des feuilles de l'arbre de résumés,
distances entre bulles, clustering hiérarchique des bulles et retour aux points.
"""

import logging
import math

import numpy as np

from clustering.hierarchy import build_dendrogram
from clustering.metric_core import distances, euclidean, points_matrix, prim_over_weights
from models.clustering_feature import CF_TOLERANCE, DataBubble
from utils.exceptions import InputError, InsufficientDataError

logger = logging.getLogger(__name__)


def derive_bubble(cf, dim=None, bubble_id=0, members=()):
    """
    Dérive une bulle de données d'un résumé.

    L'étendue vaut √((2·n·SS − 2·‖LS‖²) / (n·(n − 1))), et 0 pour un seul point.

    Args:
        cf (ClusteringFeature): Le résumé
        dim (int, optional): Dimension des données. Par défaut celle du résumé.
        bubble_id (int, optional): Identifiant de la bulle. Par défaut 0.
        members (iterable, optional): Identifiants des points résumés

    Returns:
        DataBubble: La bulle

    Raises:
        InputError: Si le résumé est vide ou incohérent
    """
    if cf.n < 1:
        raise InputError("Impossible de dériver une bulle d'un résumé vide")
    if dim is not None and dim != cf.dim:
        raise InputError(f"Dimension {dim} incompatible avec le résumé ({cf.dim})")

    extent = 0.0
    if cf.n > 1:
        numerator = 2.0 * cf.n * cf.ss - 2.0 * float(np.dot(cf.ls, cf.ls))
        if numerator < 0.0:
            if numerator < -CF_TOLERANCE * max(1.0, 2.0 * cf.n * cf.ss):
                raise InputError(f"Résumé incohérent : radicande {numerator}")
            numerator = 0.0
        extent = math.sqrt(numerator / (cf.n * (cf.n - 1)))
    return DataBubble(bubble_id, cf.rep(), cf.n, extent, members)


def bubbles_from_leaves(leaf_cfs):
    """
    Dérive une bulle par feuille, numérotées dans l'ordre des feuilles.

    Args:
        leaf_cfs (sequence): Couples (ClusteringFeature, membres) de `BubbleTree.leaf_cfs`

    Returns:
        list: Les DataBubble
    """
    return [derive_bubble(cf, bubble_id=k, members=members) for k, (cf, members) in enumerate(leaf_cfs)]


def bubble_distance(b, c):
    """
    Distance entre deux bulles, corrigée par leurs étendues.

    Args:
        b (DataBubble): Première bulle
        c (DataBubble): Seconde bulle

    Returns:
        float: ‖rep_B − rep_C‖ − (e_B + e_C) + (nnDist_B(1) + nnDist_C(1)) si les bulles
        ne se recouvrent pas, max(nnDist_B(1), nnDist_C(1)) sinon ; 0 pour B = C

    Raises:
        InputError: Si les dimensions diffèrent
    """
    if b is c:
        return 0.0
    dist = euclidean(b.rep, c.rep)
    spread = b.extent + c.extent
    if dist >= spread:
        return dist - spread + (b.nn_dist(1) + c.nn_dist(1))
    return max(b.nn_dist(1), c.nn_dist(1))


def bubble_distance_matrix(bubbles):
    """
    Matrice (L, L) des distances entre bulles, de diagonale nulle.

    Args:
        bubbles (sequence of DataBubble): Les bulles

    Returns:
        np.ndarray: La matrice symétrique des distances
    """
    reps = np.vstack([b.rep for b in bubbles])
    extents = np.array([b.extent for b in bubbles], dtype=np.float64)
    nn1 = np.array([b.nn_dist(1) for b in bubbles], dtype=np.float64)

    matrix = np.empty((len(bubbles), len(bubbles)), dtype=np.float64)
    for row in range(len(bubbles)):
        dist = distances(reps, reps[row])
        spread = extents + extents[row]
        matrix[row] = np.where(
            dist >= spread,
            dist - spread + (nn1 + nn1[row]),
            np.maximum(nn1, nn1[row]),
        )
    np.fill_diagonal(matrix, 0.0)
    return matrix


def _core_distance_row(row, dist_row, weights, bubbles, min_pts):
    # la bulle elle-même vient en premier, puis les autres par distance puis identifiant
    others = np.ones(len(bubbles), dtype=bool)
    others[row] = False
    order = np.lexsort((np.arange(len(bubbles)), dist_row, others))
    cumulative = np.cumsum(weights[order])
    position = int(np.searchsorted(cumulative, min_pts, side="left"))
    closest = order[position]
    before = cumulative[position] - weights[closest]
    return float(dist_row[closest] + bubbles[closest].nn_dist(min_pts - before))


def bubble_core_distance(b, all_bubbles, min_pts):
    """
    Distance de cœur d'une bulle.

    Les bulles sont parcourues par distance croissante à B (B d'abord) en cumulant
    leurs effectifs ; C est la première bulle où le cumul atteint minPts et
    k = minPts − (cumul strictement avant C). Le résultat vaut d(B, C) + C.nnDist(k).

    Args:
        b (DataBubble): La bulle
        all_bubbles (sequence of DataBubble): Toutes les bulles (B comprise)
        min_pts (int): Le paramètre de densité

    Returns:
        float: La distance de cœur

    Raises:
        InsufficientDataError: Si le poids total est inférieur à minPts
    """
    all_bubbles = list(all_bubbles)
    weights = np.array([c.n for c in all_bubbles], dtype=np.float64)
    if weights.sum() < min_pts:
        raise InsufficientDataError(f"Poids total {weights.sum():g} inférieur à minPts = {min_pts}")
    row = next((k for k, c in enumerate(all_bubbles) if c is b), None)
    if row is None:
        all_bubbles.append(b)
        weights = np.append(weights, b.n)
        row = len(all_bubbles) - 1
    dist_row = np.array([bubble_distance(b, c) for c in all_bubbles], dtype=np.float64)
    return _core_distance_row(row, dist_row, weights, all_bubbles, min_pts)


def bubble_mutual_reachability(b, c, cds):
    """
    Distance d'accessibilité mutuelle entre bulles : max(cd(B), cd(C), d(B, C)).

    Args:
        b (DataBubble): Première bulle
        c (DataBubble): Seconde bulle
        cds (dict): bubble_id -> distance de cœur

    Returns:
        float: Le maximum des trois valeurs
    """
    return max(cds[b.bubble_id], cds[c.bubble_id], bubble_distance(b, c))


def bubble_core_distances(bubbles, min_pts, matrix=None):
    """
    Distances de cœur de toutes les bulles.

    Returns:
        dict: bubble_id -> distance de cœur
    """
    weights = np.array([b.n for b in bubbles], dtype=np.float64)
    if weights.sum() < min_pts:
        raise InsufficientDataError(f"Poids total {weights.sum():g} inférieur à minPts = {min_pts}")
    if matrix is None:
        matrix = bubble_distance_matrix(bubbles)
    return {
        b.bubble_id: _core_distance_row(row, matrix[row], weights, bubbles, min_pts)
        for row, b in enumerate(bubbles)
    }


def cluster_bubbles(bubbles, min_pts):
    """
    Exécute le clustering hiérarchique statique sur les bulles.

    Le voisinage d'une bulle compte la bulle elle-même : la distance de cœur est
    calculée pour minPts + 1 représentés, ce qui retrouve la distance de cœur
    ponctuelle quand chaque bulle est un seul point.

    Args:
        bubbles (sequence of DataBubble): Les bulles
        min_pts (int): Le paramètre de densité

    Returns:
        tuple: (Dendrogram sur les identifiants de bulles, dict bubble_id -> distance de cœur)

    Raises:
        InsufficientDataError: Si moins de 2 bulles ou un poids total insuffisant
    """
    bubbles = list(bubbles)
    if len(bubbles) < 2:
        raise InsufficientDataError(f"Il faut au moins 2 bulles ({len(bubbles)})")

    matrix = bubble_distance_matrix(bubbles)
    cds = bubble_core_distances(bubbles, min_pts + 1, matrix)
    cd_array = np.array([cds[b.bubble_id] for b in bubbles], dtype=np.float64)
    reach = np.maximum(np.maximum(matrix, cd_array[:, None]), cd_array[None, :])

    ids = [b.bubble_id for b in bubbles]
    edges = prim_over_weights(ids, reach)
    dendrogram = build_dendrogram(edges, {b.bubble_id: float(b.n) for b in bubbles})
    logger.debug("Clustering de %d bulles (poids total %d)", len(bubbles), sum(b.n for b in bubbles))
    return dendrogram, cds


def assign_points(points, bubbles):
    """
    Associe chaque point à la bulle de représentant le plus proche (à égalité, le plus petit identifiant).

    Args:
        points (sequence of Point): Les points
        bubbles (sequence of DataBubble): Les bulles

    Returns:
        dict: point_id -> bubble_id

    Raises:
        InputError: Si aucune bulle n'est fournie
    """
    bubbles = sorted(bubbles, key=lambda b: b.bubble_id)
    if not bubbles:
        raise InputError("Aucune bulle pour l'affectation des points")
    points = list(points)
    if not points:
        return {}

    reps = np.vstack([b.rep for b in bubbles])
    ids, matrix = points_matrix(points)
    best = np.full(len(ids), np.inf)
    owner = np.zeros(len(ids), dtype=np.int64)
    for k in range(len(bubbles)):
        dist = distances(matrix, reps[k])
        # comparaison stricte : la bulle d'identifiant le plus petit garde les égalités
        closer = dist < best
        best[closer] = dist[closer]
        owner[closer] = k
    return {int(i): bubbles[k].bubble_id for i, k in zip(ids, owner)}
