"""
Lecture et écriture des jeux de données, et génération de mélanges gaussiens synthétiques.
"""

import logging
import os
import re

import numpy as np
import pandas as pd

from models.point import Point
from utils.exceptions import InputError, ParseError, ReportIOError

logger = logging.getLogger(__name__)

# Ecart type des composantes avant ajustement au nombre de composantes
BASE_SIGMA = 0.05
# Séparation minimale des centres, en écarts types, sans recouvrement
SEPARATION_SIGMAS = 6.0
MAX_PLACEMENT_TRIES = 1000


def _is_numeric(value):
    return np.isfinite(_to_float(value))


def _to_float(value):
    # float() donne l'arrondi correct de la décimale écrite, NaN pour une cellule invalide
    try:
        return float(value)
    except (TypeError, ValueError):
        return np.nan


def _is_missing(cell):
    return cell is None or (isinstance(cell, float) and np.isnan(cell))


def _is_blank(cells):
    return all(_is_missing(cell) or not str(cell).strip() for cell in cells)


def load_csv(path):
    """
    Charge un fichier CSV de coordonnées, un point par ligne.

    Une ligne d'en-tête est détectée si sa première cellule n'est pas numérique. Les lignes
    vides sont ignorées ; les erreurs citent le numéro de ligne dans le fichier.

    Args:
        path (str): Chemin du fichier

    Returns:
        list: Les points, d'identifiants 0..n-1 dans l'ordre des lignes

    Raises:
        ReportIOError: Si le fichier est illisible
        ParseError: Sur une ligne de longueur différente ou une cellule non numérique
    """
    if not os.path.exists(path):
        raise ReportIOError(f"Fichier introuvable : {path}")
    try:
        frame = pd.read_csv(path, header=None, dtype=str, skip_blank_lines=False, keep_default_na=False)
    except pd.errors.EmptyDataError:
        return []
    except pd.errors.ParserError as error:
        match = re.search(r"line (\d+)", str(error))
        row = int(match.group(1)) if match else 0
        raise ParseError(row, "nombre de colonnes incohérent") from None
    except OSError as error:
        raise ReportIOError(f"Lecture impossible de {path} : {error}") from None

    # sans saut des lignes vides, l'index du tableau est le numéro de ligne moins un
    rows = [(int(row[0]) + 1, row[1:]) for row in frame.itertuples(name=None)]
    rows = [(line, cells) for line, cells in rows if not _is_blank(cells)]
    if rows and not _is_numeric(rows[0][1][0]):
        rows = rows[1:]
    if not rows:
        return []

    for line, cells in rows:
        if any(_is_missing(cell) for cell in cells):
            raise ParseError(line, "nombre de colonnes incohérent")
    values = np.array([[_to_float(cell) for cell in cells] for _, cells in rows], dtype=np.float64)
    bad = ~np.isfinite(values)
    if bad.any():
        raise ParseError(rows[int(np.argmax(bad.any(axis=1)))][0], "cellule non numérique")

    points = [Point(k, values[k]) for k in range(values.shape[0])]
    logger.info("%d points de dimension %d chargés depuis %s", len(points), values.shape[1], path)
    return points


def _place_means(rng, dim, components, min_separation):
    means = []
    for _ in range(components):
        for _ in range(MAX_PLACEMENT_TRIES):
            candidate = rng.random(dim)
            if all(np.linalg.norm(candidate - m) >= min_separation for m in means):
                means.append(candidate)
                break
        else:
            return None
    return np.vstack(means)


def gen_gaussian_mixture(n, dim, components, overlap_hint=0.1, seed=None):
    """
    Génère un mélange de gaussiennes isotropes dans le cube unité.

    Les centres sont tirés avec une séparation minimale proportionnelle à
    (1 − overlap_hint) ; les points sont mélangés pour que chaque fenêtre voie toutes
    les composantes.

    Args:
        n (int): Nombre de points
        dim (int): Dimension
        components (int): Nombre de composantes
        overlap_hint (float, optional): Recouvrement souhaité dans [0, 1[. Par défaut 0.1.
        seed (int, optional): Graine du générateur. Par défaut None.

    Returns:
        tuple: (liste de Point, liste des étiquettes vraies)

    Raises:
        InputError: Si un paramètre est invalide
    """
    if components < 1 or dim < 1:
        raise InputError(f"Paramètres invalides (dim={dim}, composantes={components})")
    if n < components:
        raise InputError(f"Il faut au moins un point par composante (n={n}, composantes={components})")
    if not 0.0 <= overlap_hint < 1.0:
        raise InputError(f"Le recouvrement doit être dans [0, 1[ ({overlap_hint})")

    rng = np.random.default_rng(seed)
    sigma = min(BASE_SIGMA, 1.0 / (SEPARATION_SIGMAS * components ** (1.0 / dim)))
    while True:
        means = _place_means(rng, dim, components, SEPARATION_SIGMAS * sigma * (1.0 - overlap_hint))
        if means is not None:
            break
        sigma /= 2.0

    sizes = np.full(components, n // components)
    sizes[: n % components] += 1
    labels = np.repeat(np.arange(components), sizes)
    labels = labels[rng.permutation(n)]
    coords = means[labels] + rng.normal(0.0, sigma, size=(n, dim))

    points = [Point(k, coords[k]) for k in range(n)]
    return points, [int(label) for label in labels]


def write_points_csv(points, path):
    """Ecrit des points au format CSV (en-tête x0..x{d-1})."""
    points = list(points)
    dim = points[0].dim if points else 0
    frame = pd.DataFrame([p.coords for p in points], columns=[f"x{j}" for j in range(dim)])
    try:
        frame.to_csv(path, index=False)
    except OSError as error:
        raise ReportIOError(f"Ecriture impossible de {path} : {error}") from None


def write_labels_csv(labels, path):
    """
    Ecrit des étiquettes au format CSV (colonnes id, label).

    Args:
        labels (dict): Identifiant -> étiquette
        path (str): Chemin du fichier
    """
    frame = pd.DataFrame(sorted(labels.items()), columns=["id", "label"])
    try:
        frame.to_csv(path, index=False)
    except OSError as error:
        raise ReportIOError(f"Ecriture impossible de {path} : {error}") from None


def read_labels_csv(path):
    """
    Lit un fichier d'étiquettes (colonnes id, label, ou une seule colonne label).

    Returns:
        dict: Identifiant -> étiquette

    Raises:
        ReportIOError: Si le fichier est absent
        InputError: Si la colonne label manque
        ParseError: Sur un identifiant ou une étiquette non entiers
    """
    if not os.path.exists(path):
        raise ReportIOError(f"Fichier introuvable : {path}")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise InputError(f"Fichier d'étiquettes vide : {path}") from None
    except pd.errors.ParserError as error:
        raise ParseError(0, f"fichier d'étiquettes illisible ({error})") from None
    if "label" not in frame.columns:
        raise InputError(f"Colonne 'label' absente de {path}")

    columns = ["id", "label"] if "id" in frame.columns else ["label"]
    values = frame[columns].apply(pd.to_numeric, errors="coerce")
    bad = values.isna().any(axis=1) | (values != values.round()).any(axis=1)
    if bad.any():
        # ligne 1 = en-tête
        raise ParseError(int(np.argmax(bad.to_numpy())) + 2, "identifiant ou étiquette non entier")
    values = values.astype(np.int64)
    ids = values["id"] if "id" in values.columns else range(len(values))
    return {int(i): int(label) for i, label in zip(ids, values["label"])}
