"""System definitions, forward propagation and Lipschitz checks."""
