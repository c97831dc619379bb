"""Kinodynamic AO-RRT planning in the augmented state-cost space."""

__version__ = "0.3.0"
