"""Grid-exhaustive strategyproofness and group strategyproofness checks."""
