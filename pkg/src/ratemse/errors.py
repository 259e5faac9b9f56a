"""Exception types shared across the package.

Every error carries a ``module`` attribute naming the subsystem that raised
it, which the CLI uses for its exit diagnostics.
"""


class RateMseError(Exception):
    module = "ratemse"


class ConfigError(RateMseError, ValueError):
    """Invalid run configuration; message contains the offending field path."""

    module = "cli"


class ModelError(RateMseError, ValueError):
    module = "model"


class SupportError(ModelError):
    """State outside, or on the boundary of, a support where that is illegal."""


class FisherError(RateMseError, RuntimeError):
    module = "fisher"


class BoundsError(RateMseError, RuntimeError):
    module = "bounds"


class RateError(RateMseError, RuntimeError):
    module = "rate"


class SimulationError(RateMseError, RuntimeError):
    module = "montecarlo"
