"""
Etude de faisabilité : coût cumulé des mises à jour exactes selon la fraction de points modifiés,
comparé à un recalcul statique.
"""

import logging
import time

import numpy as np
import pandas as pd

from clustering.dynamic_hdbscan import DynamicClusterer
from clustering.static_hdbscan import run_static
from utils.exceptions import InputError

logger = logging.getLogger(__name__)

OPERATIONS = ("insert", "delete")


def _parse_fractions(fractions):
    if isinstance(fractions, str):
        fractions = [f for f in fractions.split(",") if f.strip()]
    try:
        fractions = sorted(float(f) for f in fractions)
    except (TypeError, ValueError):
        raise InputError(f"Fractions non numériques : {fractions}") from None
    if not fractions or fractions[0] <= 0.0 or fractions[-1] >= 1.0:
        raise InputError(f"Les fractions doivent être dans ]0, 1[ ({fractions})")
    return fractions


def run_feasibility(points, min_pts, operation="delete", fractions=(0.01, 0.05, 0.1), seed=0):
    """
    Mesure le coût cumulé de mises à jour unitaires pour plusieurs fractions des données.

    Pour une suppression, tous les points sont chargés puis une fraction tirée au hasard
    est supprimée ; pour une insertion, la fraction est retenue puis insérée point par point.

    Args:
        points (sequence of Point): Les données
        min_pts (int): Le paramètre de densité
        operation (str, optional): 'insert' ou 'delete'. Par défaut 'delete'.
        fractions (sequence ou str, optional): Fractions de points mis à jour
        seed (int, optional): Graine du tirage. Par défaut 0.

    Returns:
        pandas.DataFrame: Une ligne par fraction (temps cumulés en ms, composantes de Boruvka,
        temps du recalcul statique)

    Raises:
        InputError: Si l'opération ou les fractions sont invalides
    """
    if operation not in OPERATIONS:
        raise InputError(f"Opération inconnue : {operation}")
    fractions = _parse_fractions(fractions)
    points = list(points)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(points))

    rows = []
    for fraction in fractions:
        count = int(round(fraction * len(points)))
        if len(points) - count <= min_pts:
            raise InputError(f"Trop peu de points restants pour la fraction {fraction}")
        chosen = [points[k] for k in order[:count]]
        rest = [points[k] for k in order[count:]]

        clusterer = DynamicClusterer(min_pts)
        if operation == "delete":
            clusterer.build(points)
            stats = [clusterer.delete_point(p.id) for p in chosen]
        else:
            clusterer.build(rest)
            stats = [clusterer.insert_point(p) for p in chosen]

        start = time.perf_counter()
        run_static(clusterer.points(), min_pts)
        t_static = (time.perf_counter() - start) * 1000.0

        row = {
            "fraction": fraction,
            "n_updates": count,
            "t_core_ms": float(sum(s.t_core_ms for s in stats)),
            "t_mst_ms": float(sum(s.t_mst_ms for s in stats)),
            "boruvka_components": int(sum(s.components_reconnected for s in stats)),
            "rknn_mean": float(np.mean([s.rknn_size for s in stats])) if stats else 0.0,
            "t_static_ms": t_static,
        }
        row["t_total_ms"] = row["t_core_ms"] + row["t_mst_ms"]
        rows.append(row)
        logger.info("Fraction %.3f : %d mises à jour en %.1f ms (statique %.1f ms)",
                    fraction, count, row["t_total_ms"], t_static)
    return pd.DataFrame(rows)
