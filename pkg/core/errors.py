from __future__ import annotations


class ObnoxError(ValueError):
    """Root of every error raised by the library."""


class OutOfRange(ObnoxError):
    pass


class EmptyProfile(ObnoxError):
    pass


class InvalidDistribution(ObnoxError):
    pass


class InvalidObjective(ObnoxError):
    pass


class InvalidMechanism(ObnoxError):
    pass


class SpecNotSupported(ObnoxError):
    pass


class QuadratureFailure(ObnoxError):
    pass


class BudgetExceeded(ObnoxError):
    def __init__(self, nodes: int, budget: int) -> None:
        super().__init__(f"Search needs {nodes} nodes, budget is {budget}")
        self.nodes = nodes
        self.budget = budget


class Infeasible(ObnoxError):
    pass


class ConfigError(ObnoxError):
    pass
