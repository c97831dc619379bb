"""Augmented-space metric and nearest-neighbor index."""
