"""Exception types shared across the package."""


class FloqspecError(Exception):
    """Base class for all package-specific errors."""


class StepBudgetExceeded(FloqspecError):
    """Richardson refinement would need more steps than the configured cap."""

    def __init__(self, z, steps, message=None):
        self.z = z
        self.steps = steps
        super().__init__(message or f"step budget exceeded at z={z} (steps={steps})")


class NonFinite(FloqspecError):
    """The propagated state overflowed or produced NaNs."""

    def __init__(self, z, message=None):
        self.z = z
        super().__init__(message or f"non-finite state while integrating at z={z}")


class WindowDegenerate(FloqspecError):
    """The requested rectangular window has zero width or height."""


class NotOnSpectrum(FloqspecError):
    """Requested an eigenfunction at a point whose discriminant is outside [-1, 1]."""


class DefectiveMonodromy(FloqspecError):
    """Floquet multipliers coincide; no well-separated eigenvector exists."""


class DegenerateFrame(FloqspecError):
    """Closed-form eigenvector frame is singular at this spectral point."""


class MismatchedH(FloqspecError):
    """Spectrum arcs and enclosure parameters were computed for different h."""


class EmptyArcs(FloqspecError):
    """A spectrum-level check was requested on an empty arc set."""
