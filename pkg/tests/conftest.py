"""
Fixtures partagées des tests.
"""

import os
import sys

import numpy as np
import pytest

# Ajout du répertoire racine au chemin Python
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from models.point import Point  # noqa: E402


def make_points(values, start=0):
    """Construit des points d'identifiants consécutifs à partir de coordonnées."""
    points = []
    for k, value in enumerate(values):
        coords = np.atleast_1d(np.asarray(value, dtype=np.float64))
        points.append(Point(start + k, coords))
    return points


@pytest.fixture
def d1():
    """Jeu de référence : points 1-D 0, 1, 2 et 10 (ids 0..3)."""
    return make_points([0.0, 1.0, 2.0, 10.0])


@pytest.fixture
def rng():
    """Générateur aléatoire à graine fixe."""
    return np.random.default_rng(seed=42)


@pytest.fixture
def random_points(rng):
    """Nuage de 120 points 2-D en trois groupes."""
    centers = np.array([[0.0, 0.0], [5.0, 5.0], [0.0, 6.0]])
    coords = np.vstack([c + rng.normal(0.0, 0.6, size=(40, 2)) for c in centers])
    return make_points(coords[rng.permutation(len(coords))])
