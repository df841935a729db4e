"""
Clustering hiérarchique par densité exact et entièrement dynamique.

Le `DynamicClusterer` maintient ensemble l'index spatial, les distances de cœur et
l'arbre couvrant minimal du graphe d'accessibilité mutuelle sous insertions et
suppressions de points.
"""

import logging
import time
from dataclasses import dataclass

import numpy as np

from clustering.dynamic_mst import apply_candidate_edge, dual_tree_boruvka, remove_edges
from clustering.link_cut_forest import LinkCutForest
from clustering.metric_core import distances, euclidean, mutual_reachability
from index.ss_index import IndexConfig, SSIndex
from models.point import CoreRecord, ReachEdge
from utils.exceptions import ConflictError, InputError, InvariantViolation, NotFoundError, StateError
from utils.presets import DEFAULT_FANOUT, DEFAULT_MIN_PTS

logger = logging.getLogger(__name__)


@dataclass
class UpdateStats:
    """Mesures d'une mise à jour (insertion ou suppression)."""

    operation: str
    point_id: int
    rknn_size: int = 0
    candidates: int = 0
    replacements: int = 0
    edges_removed: int = 0
    components_reconnected: int = 0
    rebuilt: bool = False
    t_core_ms: float = 0.0
    t_mst_ms: float = 0.0

    @property
    def t_total_ms(self):
        return self.t_core_ms + self.t_mst_ms


def _elapsed_ms(start):
    return (time.perf_counter() - start) * 1000.0


class DynamicClusterer:
    """Classe orchestrant l'index, les enregistrements de cœur et l'arbre couvrant minimal."""

    def __init__(self, min_pts=DEFAULT_MIN_PTS, m=DEFAULT_FANOUT[0], M=DEFAULT_FANOUT[1]):
        """
        Initialise un clusterer vide.

        Tant que le nombre de points ne dépasse pas minPts, les points sont seulement
        stockés : aucune distance de cœur ni arbre couvrant n'est maintenu.

        Args:
            min_pts (int, optional): Paramètre de densité minPts. Par défaut DEFAULT_MIN_PTS.
            m (int, optional): Degré minimal des nœuds de l'index. Par défaut 5.
            M (int, optional): Degré maximal des nœuds de l'index. Par défaut 10.
        """
        self.config = IndexConfig(min_pts=min_pts, m=m, M=M)
        self.min_pts = min_pts
        self.index = SSIndex(self.config)
        self.forest = None
        self.records = {}
        self.operations = 0

    def __len__(self):
        return len(self.index)

    def __contains__(self, point_id):
        return point_id in self.index

    @property
    def is_active(self):
        """bool: True si l'arbre couvrant est maintenu (plus de minPts points)."""
        return self.forest is not None

    def points(self):
        """Retourne les points courants."""
        return self.index.points()

    def core_records(self):
        """Retourne une copie des enregistrements de cœur (vide sous le seuil)."""
        return dict(self.records)

    # ------------------------------------------------------------ arêtes

    def _edge(self, u, v):
        dist = euclidean(self.index.coords(u), self.index.coords(v))
        weight = mutual_reachability(self.records[u].core_distance, self.records[v].core_distance, dist)
        return ReachEdge(min(u, v), max(u, v), weight)

    def _neighborhood(self, point_id):
        neighbors = self.index.knn(self.index.coords(point_id), self.min_pts, exclude_id=point_id)
        return CoreRecord(point_id, [i for i, _ in neighbors], neighbors[-1][1])

    def _merge_neighbor(self, record, new_id, new_dist):
        coords = self.index.coords(record.point_id)
        pairs = [(euclidean(coords, self.index.coords(i)), i) for i in record.neighbors]
        pairs.append((new_dist, new_id))
        pairs.sort()
        kept = pairs[:self.min_pts]
        return CoreRecord(record.point_id, [i for _, i in kept], kept[-1][0])

    # ------------------------------------------------------------ cycle de vie

    def _rebuild(self):
        """Calcule toutes les distances de cœur puis l'arbre couvrant à partir d'une forêt vide."""
        self.records = {}
        for point_id in self.index.ids():
            self.records[point_id] = self._neighborhood(point_id)
        for point_id, record in self.records.items():
            self.index.refresh_cd(point_id, record.core_distance)
        self.forest = LinkCutForest(self.index.ids())
        dual_tree_boruvka(self.index, self.forest)
        logger.info("Seuil franchi : arbre couvrant construit sur %d points", len(self.index))

    def _drop(self):
        self.forest = None
        self.records = {}
        for point_id in self.index.ids():
            self.index.refresh_cd(point_id, 0.0)
        logger.info("Sous le seuil (%d points) : arbre couvrant abandonné", len(self.index))

    # ------------------------------------------------------------ insertion

    def insert_point(self, point):
        """
        Insère un point et met à jour distances de cœur et arbre couvrant.

        Args:
            point (Point): Le point à insérer

        Returns:
            UpdateStats: Les mesures de la mise à jour

        Raises:
            ConflictError: Si l'identifiant est déjà présent
            InputError: Si la dimension ne correspond pas
        """
        self.operations += 1
        stats = UpdateStats("insert", point.id)
        if not self.is_active:
            start = time.perf_counter()
            self.index.insert(point)
            if len(self.index) > self.min_pts:
                self._rebuild()
                stats.rebuilt = True
            stats.t_core_ms = _elapsed_ms(start)
            return stats

        start = time.perf_counter()
        self._check_new(point)
        neighbors = self.index.knn(point.coords, self.min_pts)
        cd_p = neighbors[-1][1]
        reverse = self.index.rknn(point.coords)
        # à distance égale au minPts-ième voisin, seule la liste de voisins change
        ties = self.index.rknn(point.coords, inclusive=True) - reverse

        for r in sorted(reverse | ties):
            dist = euclidean(self.index.coords(r), point.coords)
            self.records[r] = self._merge_neighbor(self.records[r], point.id, dist)
        self.records[point.id] = CoreRecord(point.id, [i for i, _ in neighbors], cd_p)
        self.index.insert(point, cd_p)
        for r in reverse:
            self.index.refresh_cd(r, self.records[r].core_distance)
        stats.rknn_size = len(reverse)
        stats.t_core_ms = _elapsed_ms(start)

        start = time.perf_counter()
        ceiling = max((e.weight for e in self.forest.edges()), default=0.0)
        for r in reverse:
            for other in self.forest.neighbors(r):
                self.forest.set_weight(r, other, self._edge(r, other).weight)

        self.forest.add_vertex(point.id)
        inserted = self._inserted_edges(point, cd_p)
        modified = sorted(
            (self._edge(r, other) for r in reverse for other in self.records[r].neighbors),
            key=ReachEdge.key,
        )
        stats.candidates = len(inserted) + len(modified)

        for edge in inserted + modified:
            # aucune arête du chemin ne dépasse le plus lourd poids de l'arbre
            if edge.weight >= ceiling and self.forest.connected(edge.u, edge.v):
                continue
            outcome = apply_candidate_edge(self.forest, edge)
            if outcome == "linked":
                ceiling = max(ceiling, edge.weight)
            elif outcome != "rejected":
                stats.replacements += 1
        stats.t_mst_ms = _elapsed_ms(start)

        logger.debug(
            "Insertion %d : |R| = %d, %d candidates, %d remplacements",
            point.id, stats.rknn_size, stats.candidates, stats.replacements,
        )
        return stats

    def _check_new(self, point):
        if point.id in self.index:
            raise ConflictError(f"Point {point.id} déjà présent")
        if self.index.dim is not None and point.dim != self.index.dim:
            raise InputError(f"Dimension {point.dim} incompatible avec les données ({self.index.dim})")

    def _inserted_edges(self, point, cd_p):
        others = [i for i in self.records if i != point.id]
        matrix = np.vstack([self.index.coords(i) for i in others])
        cds = np.array([self.records[i].core_distance for i in others], dtype=np.float64)
        weights = np.maximum(np.maximum(distances(matrix, point.coords), cds), cd_p)
        ids = np.array(others, dtype=np.int64)
        order = np.lexsort((np.maximum(ids, point.id), np.minimum(ids, point.id), weights))
        return [
            ReachEdge(min(point.id, int(ids[k])), max(point.id, int(ids[k])), float(weights[k]))
            for k in order
        ]

    # ------------------------------------------------------------ suppression

    def delete_point(self, point_id):
        """
        Supprime un point et reconnecte l'arbre couvrant par Boruvka.

        Args:
            point_id (int): Identifiant du point

        Returns:
            UpdateStats: Les mesures de la mise à jour

        Raises:
            NotFoundError: Si l'identifiant est inconnu
        """
        if point_id not in self.index:
            raise NotFoundError(f"Point {point_id} absent")
        self.operations += 1
        stats = UpdateStats("delete", point_id)

        if not self.is_active or len(self.index) - 1 <= self.min_pts:
            was_active = self.is_active
            start = time.perf_counter()
            self.index.delete(point_id)
            if was_active:
                self._drop()
            stats.t_core_ms = _elapsed_ms(start)
            return stats

        start = time.perf_counter()
        removed_point = self.index.delete(point_id)
        del self.records[point_id]
        # les distances de cœur mémorisées sont encore les anciennes
        reverse = self.index.rknn(removed_point.coords, inclusive=True)
        for r in reverse:
            self.records[r] = self._neighborhood(r)
            self.index.refresh_cd(r, self.records[r].core_distance)
        stats.rknn_size = len(reverse)
        stats.t_core_ms = _elapsed_ms(start)

        start = time.perf_counter()
        removed = remove_edges(
            self.forest,
            lambda e: e.u == point_id or e.v == point_id or e.u in reverse or e.v in reverse,
        )
        self.forest.remove_vertex(point_id)
        stats.edges_removed = len(removed)
        stats.components_reconnected = self.forest.component_count()
        dual_tree_boruvka(self.index, self.forest)
        stats.t_mst_ms = _elapsed_ms(start)

        logger.debug(
            "Suppression %d : |R| = %d, %d arêtes retirées, %d composantes",
            point_id, stats.rknn_size, stats.edges_removed, stats.components_reconnected,
        )
        return stats

    # ------------------------------------------------------------ lecture

    def mst_snapshot(self):
        """
        Copie immuable de l'arbre couvrant courant.

        Returns:
            tuple: Les n - 1 arêtes triées par (poids, u, v)

        Raises:
            StateError: Sous le seuil de minPts + 1 points
        """
        if not self.is_active:
            raise StateError(
                f"Aucun arbre couvrant avec {len(self.index)} points (minPts = {self.min_pts})"
            )
        return tuple(sorted(self.forest.edges(), key=ReachEdge.key))

    def audit(self):
        """
        Vérifie la cohérence entre index, enregistrements de cœur et arbre couvrant.

        Raises:
            InvariantViolation: Au premier invariant non respecté
        """
        self.index.audit()
        if not self.is_active:
            if self.records:
                raise InvariantViolation("Enregistrements de cœur sous le seuil")
            return

        ids = set(self.index.ids())
        if set(self.records) != ids or self.forest.vertices() != ids:
            raise InvariantViolation("Index, enregistrements et forêt décrivent des points différents")
        if not self.forest.is_spanning_tree():
            raise InvariantViolation(
                f"Forêt non couvrante : {self.forest.edge_count()} arêtes pour {len(ids)} sommets"
            )
        for point_id, record in self.records.items():
            if self.index.core_distance(point_id) != record.core_distance:
                raise InvariantViolation(f"Distance de cœur désynchronisée pour {point_id}")
        for edge in self.forest.edges():
            current = self._edge(edge.u, edge.v).weight
            if edge.weight != current:
                raise InvariantViolation(f"Poids périmé sur l'arête ({edge.u}, {edge.v})")

    def build(self, points):
        """
        Construction initiale à partir d'un ensemble de points, sans mises à jour unitaires.

        Les distances de cœur sont calculées une fois pour toutes, puis l'arbre couvrant
        par Boruvka à partir d'une forêt vide.

        Args:
            points (iterable of Point): Les points initiaux

        Raises:
            StateError: Si le clusterer contient déjà des points
        """
        if len(self.index):
            raise StateError("La construction initiale exige un clusterer vide")
        for point in points:
            self.index.insert(point)
        if len(self.index) > self.min_pts:
            self._rebuild()
        logger.info("Construction initiale : %d points", len(self.index))
