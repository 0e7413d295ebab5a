"""Exception types raised across the package."""


class ScMinimalError(Exception):
    """Base class for all package errors."""


class DomainTooThin(ScMinimalError, ValueError):
    """Torus height below the supported range."""


class PoleProximity(ScMinimalError, ValueError):
    """A point came too close to a lattice point or pre-vertex."""


class OverlappingPoints(ScMinimalError, ValueError):
    """Mirrored divisor points collide."""


class OutOfRange(ScMinimalError, ValueError):
    """A closed-form parameter left its admissible interval."""


class QuadratureNonConvergence(ScMinimalError, RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class ConstraintInfeasible(ScMinimalError, ValueError):
    """Free parameters map outside the feasible polytope."""


class NoSignChange(ScMinimalError, RuntimeError):
    """A bracketing scan found no sign change of the residual."""

    def __init__(self, message, samples=None):
        super().__init__(message)
        self.samples = samples


class NonConvergence(ScMinimalError, RuntimeError):
    """Newton iteration stopped before reaching the tolerance."""

    def __init__(self, message, x=None, residual=None):
        super().__init__(message)
        self.x = x
        self.residual = residual


class InvalidTriple(ScMinimalError, ValueError):
    """(r, s, t) does not name a family in the catalog."""


class DegenerateEdge(ScMinimalError, ValueError):
    """A boundary polyline has too few distinct points to fit a plane."""


class AngleMismatch(ScMinimalError, ValueError):
    """Patch symmetry planes do not match the triangle group."""


class InvalidConfig(ScMinimalError, ValueError):
    """Malformed job configuration."""
