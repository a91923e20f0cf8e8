"""Exception hierarchy shared by the library, the harness and the CLI."""

from typing import Any, Optional


class SparcError(Exception):
    """Base class for every error raised by sparc-mod."""


class InvalidParameterError(SparcError, ValueError):
    """A parameter lies outside its admissible domain."""


class DimensionMismatchError(SparcError, ValueError):
    """Vector or matrix dimensions disagree with the code dimensions."""


class SizeGuardError(SparcError, ValueError):
    """An explicit construction or enumeration would exceed its size cap."""


class MalformedMessageError(SparcError, ValueError):
    """A vector is not a valid message (one PSK nonzero per section)."""


class ConfigError(SparcError, ValueError):
    """A run configuration could not be read or is inconsistent."""


class DecoderDivergedError(SparcError, RuntimeError):
    """The AMP iterates became non-finite.

    Carries the iteration index at which it happened and the partial
    decode report collected up to that point.
    """

    def __init__(self, iteration: int, report: Optional[Any] = None):
        super().__init__(f"AMP decoder diverged at iteration {iteration}")
        self.iteration = iteration
        self.report = report
