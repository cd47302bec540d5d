"""Exception types shared across the package."""


class PiezoBeamError(Exception):
    """Base class for all package errors."""


class ValidationError(PiezoBeamError, ValueError):
    """A physical or geometric input violates a stated bound."""


class AssemblyError(PiezoBeamError):
    """A discrete model could not be built from the given inputs."""


class SolverError(PiezoBeamError):
    """A linear-algebra kernel failed; the message carries diagnostics."""


class ProvenanceError(PiezoBeamError):
    """A snapshot does not belong to the model it is being restored into."""


class ConfigError(PiezoBeamError):
    """A configuration file or flag is malformed; the message names the key."""
