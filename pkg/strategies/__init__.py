"""
Modes de clustering comparés pendant une simulation.
"""
