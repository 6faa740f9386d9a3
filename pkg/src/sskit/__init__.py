"""Exact desk-scale verification of the equivalence between sampling and search problems."""

__version__ = "0.1.0"
