"""
Modules de modèles : points, clustering features et types de hiérarchie.
"""
