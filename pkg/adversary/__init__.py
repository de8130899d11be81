"""Worst-case ratio search against the catalog of claimed bounds."""
