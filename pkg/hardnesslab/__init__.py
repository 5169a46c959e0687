"""Desk-scale laboratory for the label-cover hardness reduction for learning intersections of halfspaces."""

__version__ = "0.1.0"
