"""
Modules de clustering : métrique, arbres couvrants et hiérarchies.
"""
