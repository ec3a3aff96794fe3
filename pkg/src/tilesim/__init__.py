"""Labelled graphs, simulations, tilings of lamplighter-like groups, and a
small SAT solver for finite-window tiling problems."""

__version__ = "0.1.0"
