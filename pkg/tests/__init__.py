"""
Tests du clustering dynamique.
"""
