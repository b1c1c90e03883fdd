"""Explicit smooth pairs with prescribed Poisson-bracket norm and their rigidity profile."""

from .construction import (
    ConstructionParams,
    TheoremPair,
    build_theorem_pair,
    corollary_q,
    corollary_rescale,
    derive_params,
    verify_pair,
)
from .errors import (
    BadOrder,
    DomainEdge,
    InfeasibleSpec,
    NoFeasiblePoint,
    OutOfRange,
    OverlapInstance,
    ParamMismatch,
    PbgapError,
    ResolutionTooCoarse,
    StructureMismatch,
)
from .smoothfn import BumpSpec, SmoothFn1D, make_plateau_cutoff, make_ramp, make_shrink
from .symplectic import Resolution, SupNormReport, TensorFn, bracket_sup, norm_sup, sup_norm

__version__ = "0.1.0"
