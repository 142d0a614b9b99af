"""
errors.py — Exception Hierarchy
Every failure the library raises, each tagged with its CLI exit code.
"""

import config


class GeometryError(Exception):
    """Base class; `exit_code` is what the CLI returns for it."""

    exit_code = config.EXIT_NUMERICAL


class InputError(GeometryError, ValueError):
    """Malformed values: non-finite entries, zero vectors, bad files."""

    exit_code = config.EXIT_VALIDATION


class ContractError(GeometryError, ValueError):
    """Shape mismatch or violated precondition."""

    exit_code = config.EXIT_VALIDATION


class DegeneracyError(GeometryError):
    """A rank condition required for genericity does not hold."""


class IndeterminacyError(GeometryError):
    """A scene point lies on the focal locus of a camera."""

    def __init__(self, camera, message=None):
        self.camera = camera
        super().__init__(message or f"point lies in the focal locus of camera {camera}")


class BaseLocusError(GeometryError):
    """Every form of a linear system vanishes at the point."""


class AmbiguityError(GeometryError):
    """Homogeneous system has a numerical nullspace of dimension >= 2."""

    def __init__(self, corank, message=None):
        self.corank = corank
        super().__init__(message or f"solution is not unique (numerical corank {corank})")


class GenerationError(GeometryError):
    """Random generation exhausted its resampling cap."""


class ConvergenceError(GeometryError):
    """No restart reached the acceptance residual."""

    def __init__(self, best_residual, message=None):
        self.best_residual = best_residual
        super().__init__(
            message or f"no candidate converged (best residual {best_residual:.3e})"
        )
