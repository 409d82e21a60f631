"""Exception types shared across the package.

Every contract violation raises a named error so that the CLI can report
the violated clause verbatim and map it to an exit code.
"""


class BranchwaveError(Exception):
    """Base class for all package errors."""


class ValidationError(BranchwaveError):
    """A configuration or precondition check failed (CLI exit code 2)."""


class NumericalContractError(BranchwaveError):
    """A numerical guarantee was violated at runtime (CLI exit code 3)."""


# -- geometry ---------------------------------------------------------------

class SegmentThroughBranchPoint(ValidationError):
    """A query segment passes through a branch point."""


class EndpointOnCut(ValidationError):
    """A segment endpoint lies on the open cut."""


class BranchPointOnGrid(ValidationError):
    """The requested spacing places a node or edge on a branch point."""


class ExtentTooSmall(ValidationError):
    """Grid half-extent does not cover the branch points and their discs."""


class GridMismatch(ValidationError):
    """A planar field does not match the grid layout it is lifted onto."""


# -- quadrature / packets ---------------------------------------------------

class EmptySupport(ValidationError):
    """Momentum support interval is empty."""


class QuadratureNotConverged(NumericalContractError):
    """Successive quadrature refinements failed to agree to tolerance."""


# -- evolution --------------------------------------------------------------

class SolverDiverged(NumericalContractError):
    """The linear solver stagnated before reaching its residual target."""


class BoundaryContamination(NumericalContractError):
    """Too much mass reached the outer margin of the Dirichlet box."""


class ResolutionViolation(ValidationError):
    """Packet parameters violate the grid or time-step resolution rule."""


class DegenerateMetric(ValidationError):
    """The metric tensor is not positive definite somewhere on the grid."""


# -- metric field -----------------------------------------------------------

class TailNotBounded(ValidationError):
    """No decay envelope was declared and the truncated integral drifts."""


class AtPuncture(ValidationError):
    """The punctured-plane bound is undefined at the puncture itself."""


class ZeroGamma(ValidationError):
    """A second-derivative bound of zero makes the formula degenerate."""


class NonPositiveK(ValidationError):
    """Curvature bound must be positive for the comparison formula."""


# -- spectral ---------------------------------------------------------------

class NotConverged(NumericalContractError):
    """Root bracketing or iteration failed to reach tolerance."""


class EigensolverNotConverged(NumericalContractError):
    """The sparse eigensolver did not reach its residual tolerance."""


# -- scattering -------------------------------------------------------------

class CutOverlap(ValidationError):
    """A translated cutoff support touches the cut segment."""


# -- cli --------------------------------------------------------------------

class ConfigError(ValidationError):
    """Experiment configuration is malformed or inconsistent."""
