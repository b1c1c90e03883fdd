"""Exception types shared across the package."""

import math


class PbgapError(Exception):
    """Base class for all package errors."""


class InfeasibleSpec(PbgapError, ValueError):
    """A bump/ramp request cannot be realized (ramp too short, plateau touching the edge)."""


class StructureMismatch(PbgapError, ValueError):
    """The factorized bracket was requested for pairs without a common annulus structure."""


class DomainEdge(PbgapError, ValueError):
    """A finite-difference stencil would leave the domain."""


class ResolutionTooCoarse(PbgapError):
    """The certified bound is too loose to be informative at this resolution."""


class BadOrder(PbgapError, ValueError):
    """Construction parameters violate 0 < p < q."""


class ParamMismatch(PbgapError, ValueError):
    """A pair was built with a q that does not match the requested rescaling."""


class OutOfRange(PbgapError, ValueError):
    """A profile level s lies outside [0, q]."""


class OverlapInstance(PbgapError):
    """X0 meets X1 or Y0 meets Y1; by convention pb4 is +infinity."""

    pb4 = math.inf


class NoFeasiblePoint(PbgapError):
    """A minimization run never visited a pair satisfying the boundary conditions."""
