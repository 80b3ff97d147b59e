"""Exception types shared across the library."""


class OrthoSfmError(Exception):
    """Base class for all library-specific errors."""


class MissingLabelError(OrthoSfmError):
    """A requested point label is absent from a frame."""


class InvalidInputError(OrthoSfmError):
    """Input violates a structural precondition (counts, finiteness, ...)."""


class InconsistentLengthsError(OrthoSfmError):
    """3D lengths cannot be reconciled with the observed projections."""


class DegenerateEliminationError(OrthoSfmError):
    """Frame differences are too close to linearly dependent to eliminate."""


class SingularSystemError(OrthoSfmError):
    """A linear recovery system is singular (degenerate motion/body)."""


class DegenerateBasisError(OrthoSfmError):
    """An in-frame point basis is (near-)collinear and unusable."""


class NoSolutionError(OrthoSfmError):
    """No real, feasible solution exists for the assumed parameters."""


class NoConsistentAssignmentError(OrthoSfmError):
    """No point-to-point assignment is consistent with a single rigid body."""
