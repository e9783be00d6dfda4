"""
Exception hierarchy for glassbound.

Every error carries the CLI exit code it maps to, so the command layer can
report failures without knowing which service raised them.
"""
from shared.constants import (
    EXIT_SPEC_INVALID, EXIT_TRAP_UNVERIFIED, EXIT_CONE_ERROR,
    EXIT_SIMULATION_ABORT, EXIT_ESTIMATE_ERROR, EXIT_USAGE
)


class GlassBoundError(Exception):
    """Base class for all library errors."""
    exit_code = 1

    def __init__(self, message, details=None):
        super().__init__(message)
        self.message = message
        self.details = details or {}


class SpecError(GlassBoundError):
    """Invalid network document, box label, edge or wall path."""
    exit_code = EXIT_SPEC_INVALID


class TrappingError(GlassBoundError):
    """A trapping region could not be verified."""
    exit_code = EXIT_TRAP_UNVERIFIED


class ConeError(GlassBoundError):
    """Failure inside exact cone arithmetic."""
    exit_code = EXIT_CONE_ERROR


class DenominatorSignError(ConeError):
    """A fractional-linear map has a non-positive denominator on a cone."""


class SimulationError(GlassBoundError):
    """A simulated trajectory could not be continued."""
    exit_code = EXIT_SIMULATION_ABORT


class CodimensionTwoHit(SimulationError):
    """Two exit times tie, so the trajectory hits a codimension-2 face."""

    def __init__(self, message, step_index=None, axes=None):
        super().__init__(message, {"step": step_index, "axes": axes})
        self.step_index = step_index
        self.axes = axes


class TerminalBox(SimulationError):
    """The trajectory entered a box whose focal point lies inside it."""

    def __init__(self, message, box=None):
        super().__init__(message, {"box": str(box) if box is not None else None})
        self.box = box


class SegmentationError(SimulationError):
    """A box sequence could not be split into known first-return cycles."""

    def __init__(self, message, position=None):
        super().__init__(message, {"position": position})
        self.position = position


class EstimateError(GlassBoundError):
    """Block counting or slope fitting was given unusable input."""
    exit_code = EXIT_ESTIMATE_ERROR


class UsageError(GlassBoundError):
    """A command was invoked without the flags it needs."""
    exit_code = EXIT_USAGE
