"""Exception hierarchy shared by all liouvspec modules."""


class LiouvspecError(Exception):
    """Base class for errors raised by liouvspec."""


class SymmetryViolationError(LiouvspecError):
    """The generator couples different U(1) charge sectors."""


class DefectiveSpectrumError(LiouvspecError):
    """Left/right eigenvectors cannot be biorthonormalized (non-diagonalizable block)."""


class DegenerateSteadyStateError(LiouvspecError):
    """The zero eigenvalue of the generator is not simple."""


class IntegrationError(LiouvspecError):
    """The time-domain integrator failed (e.g. step-size underflow)."""


class InversionUndefinedError(LiouvspecError):
    """Population inversion is meaningless because all levels are degenerate."""
