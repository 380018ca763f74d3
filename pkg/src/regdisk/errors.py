"""Exception types raised across the package."""


class FieldError(ValueError):
    """Malformed or invalid field input (manifest, values, mask)."""


class OutsideDomainError(ValueError):
    """A query point lies outside the domain."""


class DecompositionError(ValueError):
    """The boundary cannot be split into alternating monotone/level arcs."""


class ClosedLevelError(ValueError):
    """A level set contains a closed loop (the field is not weakly regular)."""


class LevelStructureError(ValueError):
    """A level set does not have the structure required of a regular field."""


class TrajectoryError(ValueError):
    """Gradient tracing failed (degenerate gradient or lost monotonicity)."""


class RectifyError(ValueError):
    """Hypotheses of a rectification construction are not met."""


class ConjugacyError(ValueError):
    """Inputs to the conjugacy extension are incompatible."""
