"""Executable lower-bound constructions."""
