"""
Modules utilitaires : exceptions, journalisation et préréglages.
"""
