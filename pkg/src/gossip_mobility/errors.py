"""Exception hierarchy shared by every engine."""


class GossipError(Exception):
    """Base class for all package errors."""


class NetworkError(GossipError, ValueError):
    """A network description violates the data model."""


class NegativeRate(NetworkError):
    pass


class AsymmetricMobility(NetworkError):
    pass


class NonzeroDiagonal(NetworkError):
    pass


class ZeroSourceTotal(NetworkError):
    pass


class BadScale(NetworkError):
    """Size parameter outside the range a builder or bound supports."""


class SolverError(GossipError, RuntimeError):
    pass


class SingularLevelSystem(SolverError):
    pass


class CapExceeded(SolverError):
    pass


class NoConvergence(SolverError):
    def __init__(self, message, residual=float("nan"), sweeps=0):
        super().__init__(message)
        self.residual = residual
        self.sweeps = sweeps


class SimulationError(GossipError, RuntimeError):
    pass


class DegenerateHorizon(SimulationError, ValueError):
    pass


class RateOverflow(SimulationError):
    pass


class ConfigError(GossipError, ValueError):
    pass


class UnknownPreset(ConfigError):
    pass


class EmptyResult(GossipError, ValueError):
    pass
