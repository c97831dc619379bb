"""Domain types, errors and random streams."""
