"""Desk-scale checks of Kolyvagin-system hypotheses for elliptic curves."""

__version__ = "0.1.0"
