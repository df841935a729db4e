"""
Modules de simulation : jeux de données, fenêtre glissante et rapports.
"""
