"""Exception hierarchy.

``DiagnosticError`` and subclasses signal that a computation could not certify
its result (irregular crossing, failed tracking, ...); they carry enough
context to locate the offending input.  ``RejectedInstance`` is raised by the
random instance generators when a drawn family violates a regularity guard
and should be redrawn (the rejection is logged by sweeps, not treated as a
failure).
"""


class SplitflowError(Exception):
    """Base class for package errors."""


class ConfigError(SplitflowError):
    """Invalid configuration or malformed input file."""


class DiagnosticError(SplitflowError):
    """A computation could not certify its result."""


class MaslovError(DiagnosticError):
    """Crossing analysis failed; carries the offending parameter value."""

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message if t is None else f"{message} (t={t:.12g})")
        self.t = t


class SolverError(DiagnosticError):
    """Arc or circle solver failure."""


class TrackingError(DiagnosticError):
    """Eigenvalue tracking became ambiguous after maximal refinement."""


class RejectedInstance(SplitflowError):
    """A generated instance violates a regularity guard; redraw it."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason
