"""Exception and warning types raised by wavesplit."""


class WavesplitError(Exception):
    """Base class for all wavesplit errors."""


class GridMismatch(WavesplitError):
    pass


class GridTooCoarse(WavesplitError):
    pass


class GridTooNarrow(WavesplitError):
    pass


class MissingSiParams(WavesplitError):
    pass


class ConvergenceFailure(WavesplitError):
    pass


class TailsNotDegenerate(WavesplitError):
    """The ground doublet is still split at an endpoint of the separation range."""


class EdgeLeakage(WavesplitError):
    """Wavefunction amplitude reached the edge of the computational box."""


class SolveFailure(WavesplitError):
    pass


class TrapsUnresolved(WavesplitError):
    pass


class DegenerateGap(WavesplitError):
    pass


class ConfigError(WavesplitError):
    pass


class ParseError(ConfigError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(ConfigError):
    pass


class AdiabaticityWarning(UserWarning):
    """The adiabaticity ratio of a run exceeded the warning threshold."""
