"""
Hiérarchie d'exceptions du projet.
"""


class ClusteringError(Exception):
    """Classe de base de toutes les erreurs levées par la bibliothèque."""


class InputError(ClusteringError, ValueError):
    """Entrée invalide (dimension incohérente, valeur négative, paramètre hors domaine)."""


class InsufficientDataError(InputError):
    """Pas assez de points pour l'opération demandée."""


class ConflictError(ClusteringError, ValueError):
    """Identifiant déjà présent dans la structure."""


class NotFoundError(ClusteringError, KeyError):
    """Identifiant (point ou sommet) inconnu."""

    def __str__(self):
        # KeyError entoure le message de guillemets, on garde le texte brut
        return str(self.args[0]) if self.args else ""


class StateError(ClusteringError, RuntimeError):
    """Opération impossible dans l'état courant de la structure."""


class UnderflowError(ClusteringError, ArithmeticError):
    """Soustraction de clustering features menant à un effectif nul ou négatif."""


class ParseError(InputError):
    """Erreur de lecture d'un fichier de données, avec le numéro de ligne fautif."""

    def __init__(self, row, message):
        """
        Initialise l'erreur.

        Args:
            row (int): Numéro de ligne (1 = première ligne du fichier)
            message (str): Description de l'erreur
        """
        super().__init__(f"Ligne {row} : {message}")
        self.row = row


class ReportIOError(ClusteringError, OSError):
    """Echec d'écriture ou de lecture d'un rapport."""


class InvariantViolation(ClusteringError):
    """Un invariant interne d'une structure n'est plus respecté."""
