"""Built-in problem instances, optimality oracles and scenario files."""
