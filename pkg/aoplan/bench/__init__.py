"""Benchmark harness and CSV emission."""
