"""Objective evaluation for facility locations and distributions."""
