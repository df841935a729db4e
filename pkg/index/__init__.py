"""
Modules d'index spatiaux : SS-tree et arbre de bulles.
"""
