"""Optimal objective values and locations."""
