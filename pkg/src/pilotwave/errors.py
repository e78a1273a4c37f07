"""Exception hierarchy shared by every module."""


class PilotWaveError(Exception):
    """Base class for all package errors."""


class ResolutionError(PilotWaveError):
    """Grid too coarse for the requested feature."""


class DomainError(PilotWaveError):
    """Feature does not fit inside the grid."""


class NormalizationError(PilotWaveError):
    pass


class StepSizeError(PilotWaveError):
    """Time step violates the phase-wrap bound."""


class NumericalBlowupError(PilotWaveError):
    pass


class LowDensityError(PilotWaveError):
    """Kinematic query where the density is below the validity cutoff."""


class CoverageError(PilotWaveError):
    """Minplus minimizer sits on the boundary of the search grid."""


class CausticError(PilotWaveError):
    """Classical flow is multivalued (characteristics cross)."""


class ConfigError(PilotWaveError):
    pass


class ConfigParseError(ConfigError):
    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class SchemaError(ConfigError):
    pass


class ValidationError(ConfigError):
    pass
