"""
Préréglages nommés des charges de travail en fenêtre glissante.
Contient les tailles de fenêtre, les paramètres de densité et de compression utilisés par défaut.
"""

from utils.exceptions import InputError

DEFAULT_MIN_PTS = 10
DEFAULT_FANOUT = (5, 10)  # (m, M)


class Presets:
    """Classe de gestion des préréglages de charge de travail."""

    # Echelle de bureau (défaut) : la charge complète réduite d'un facteur 100
    DESK = {
        "window_size": 10_000,
        "slide_delete": 1_000,
        "slide_insert": 1_000,
        "min_pts": DEFAULT_MIN_PTS,
        "rho": 0.01,
    }

    # Petite charge pour les essais rapides
    TINY = {
        "window_size": 200,
        "slide_delete": 20,
        "slide_insert": 20,
        "min_pts": 5,
        "rho": 0.1,
    }

    # Echelle complète
    FULL = {
        "window_size": 1_000_000,
        "slide_delete": 100_000,
        "slide_insert": 100_000,
        "min_pts": 100,
        "rho": 0.01,
    }

    @classmethod
    def get_preset(cls, preset_name="DESK"):
        """
        Récupère un préréglage par son nom.

        Args:
            preset_name (str): Nom du préréglage (DESK, TINY, FULL)

        Returns:
            dict: Copie du dictionnaire de paramètres du préréglage

        Raises:
            InputError: Si le nom est inconnu
        """
        preset_map = {
            "DESK": cls.DESK,
            "TINY": cls.TINY,
            "FULL": cls.FULL,
        }

        try:
            return dict(preset_map[preset_name.upper()])
        except KeyError:
            raise InputError(f"Préréglage inconnu : {preset_name} (attendu : {', '.join(cls.names())})") from None

    @classmethod
    def names(cls):
        """Retourne la liste des noms de préréglages disponibles."""
        return ["DESK", "TINY", "FULL"]
