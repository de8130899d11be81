"""Domain types, configuration, errors and numeric primitives."""
