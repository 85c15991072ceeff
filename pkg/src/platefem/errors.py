"""Exception hierarchy shared across the package."""


class PlateFemError(Exception):
    """Base class for all errors raised by platefem."""


class GeometryError(PlateFemError):
    """Invalid patch or structure geometry (non-planar, degenerate, ...)."""


class MeshError(PlateFemError):
    """Invalid mesh topology or a meshing operation that cannot proceed."""


class AssemblyError(PlateFemError):
    """Inconsistent assembly input (missing edge side, bad constraint, ...)."""


class SolverError(PlateFemError):
    """Numerical failure in the linear solve.

    Carries optional diagnostics: ``pivot_index`` for a failed
    factorization, ``residual_history`` for a non-converged iteration.
    """

    def __init__(self, message, pivot_index=None, residual_history=None):
        super().__init__(message)
        self.pivot_index = pivot_index
        self.residual_history = residual_history


class ConfigError(PlateFemError):
    """Malformed or inconsistent run configuration."""
