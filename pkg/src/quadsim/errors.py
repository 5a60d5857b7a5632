"""Exception types shared across the package."""


class QuadSimError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(QuadSimError):
    """A configuration value or key is invalid."""


class IntegrationError(QuadSimError):
    """The ODE solver could not advance the state.

    Carries ``last_valid_time``, the simulation time (seconds, relative to
    the start of the failed integration call) of the last state that was
    still finite and accepted.
    """

    def __init__(self, message: str, last_valid_time: float):
        super().__init__(f"{message} (last valid time t={last_valid_time:.6g} s)")
        self.last_valid_time = last_valid_time


class EpisodeDoneError(QuadSimError):
    """step() was called on a finished (or never reset) episode."""


class ProtocolError(QuadSimError):
    """A malformed or out-of-order wire-protocol request."""


class BatchError(QuadSimError):
    """A worker failed while running a batch of environments."""
