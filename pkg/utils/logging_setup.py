"""
Configuration de la journalisation pour l'exécutable.
"""

import logging

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(verbosity=0):
    """
    Configure le logger racine selon le niveau de verbosité de la ligne de commande.

    Args:
        verbosity (int, optional): 0 = WARNING, 1 = INFO, 2 et plus = DEBUG. Par défaut 0.
    """
    if verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = logging.WARNING

    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)
