"""Obstacles, collision checking and clearance."""
