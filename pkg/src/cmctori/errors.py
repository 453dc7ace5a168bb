"""Exception types raised by cmctori."""


class CMCError(Exception):
    """Base class for all cmctori errors."""


class DegenerateParams(CMCError, ValueError):
    """(H, C) lies on or below the boundary C = a(H) (Clifford limit)."""


class QuadratureFailure(CMCError, ArithmeticError):
    """An adaptive quadrature could not meet its error tolerance."""


class NotAdmissible(CMCError, ValueError):
    """No embedded torus with the requested symmetry order exists for H."""


class BracketFailure(CMCError, RuntimeError):
    """The root bracket for K(H, C) = 2*pi/m could not be established."""


class ClosureFailure(CMCError):
    """The generated surface does not close up after m profile periods.

    The (unclosed) mesh is still available as ``mesh``.
    """

    def __init__(self, message, mesh=None, residual=None):
        super().__init__(message)
        self.mesh = mesh
        self.residual = residual


class DegenerateImmersion(CMCError, ArithmeticError):
    """The first fundamental form is singular at the requested point."""


class DegenerateMesh(CMCError, ValueError):
    """The mesh is too coarse or too small for the requested operation."""


class PoleOnSurface(CMCError, ValueError):
    """A stereographic pole lies on (or too close to) the surface."""
