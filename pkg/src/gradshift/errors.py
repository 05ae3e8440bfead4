"""Exception and warning types shared across the library."""
from __future__ import annotations


class GradshiftError(Exception):
    """Base class for all library-specific errors."""


class NonHermitianInput(GradshiftError):
    """Matrix violates the conjugate-transpose symmetry tolerance."""


class DimensionMismatch(GradshiftError):
    """Operators or states in one circuit have incompatible dimensions."""


class NonUnitaryInput(GradshiftError):
    """A circuit block fails the unitarity tolerance."""


class ConvergenceFailure(GradshiftError):
    """Iterative eigensolver exceeded its sweep cap."""


class EmptyGapSet(GradshiftError):
    """All eigenvalues are degenerate: the derivative is identically zero."""


class ShiftSelectionFailure(GradshiftError):
    """No acceptably conditioned shift set found within the retry budget."""


class SingularSystem(GradshiftError):
    """Shift/gap linear system is singular or too ill-conditioned to invert."""


class SingularShift(SingularSystem):
    """Single-gap rule with sin(shift * gap / 2) = 0."""


class SingularShiftPair(SingularSystem):
    """Two-gap closed form with a vanishing sine-pair denominator."""


class SingularStencil(SingularSystem):
    """Three-gap closed form with a vanishing alternating-sine denominator."""


class DegenerateStencil(SingularSystem):
    """Two stencil shifts coincide (modulo period): no derivative information."""


class InsufficientStencils(GradshiftError):
    """Fewer function evaluations than the 2S+1 required by distinct shifts."""


class InvalidPauliCharacter(GradshiftError):
    """Pauli string contains characters outside I, X, Y, Z."""


class InternalConsistencyError(GradshiftError):
    """A value that must be real (or a catalog golden value) failed its check."""


class GapMismatchWarning(UserWarning):
    """Rule gaps do not cover the generator gaps: exactness is void."""


class IllConditionedWarning(UserWarning):
    """Linear system condition number above the warning threshold."""
