"""Exception hierarchy shared across the simulator."""


class BohmPairError(Exception):
    """Base class for all simulator errors."""


class ConfigError(BohmPairError, ValueError):
    """Invalid physical configuration, source settings or config file."""


class RegimeViolation(BohmPairError):
    """A closed form was requested outside the regime in which it holds."""


class NodeProximity(BohmPairError):
    """The guidance velocity was evaluated too close to a wave-function node."""


class SamplingFailure(BohmPairError):
    """Rejection sampling acceptance dropped below its floor."""


class NonConvergence(BohmPairError):
    """A quadrature did not reach the requested accuracy under grid refinement."""


class GridMismatch(BohmPairError, ValueError):
    """Two patterns were compared on incommensurable bin grids."""


class DegenerateSupport(BohmPairError):
    """A conditional distribution has (numerically) no probability mass."""


class AbortQuotaExceeded(BohmPairError):
    """Too many trajectories in an ensemble aborted."""

    def __init__(self, n_aborted, n_total, quota):
        self.n_aborted = n_aborted
        self.n_total = n_total
        self.quota = quota
        super().__init__(
            f"{n_aborted}/{n_total} trajectories aborted "
            f"(quota {quota:.1%})"
        )
