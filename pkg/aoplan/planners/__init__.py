"""Tree planners over the state-cost space."""
