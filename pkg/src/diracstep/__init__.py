"""Exact 1-D Dirac scattering off piecewise-constant potentials."""

from .core import (
    BandCase,
    DomainError,
    ModeKind,
    NoStatesError,
    NumericalError,
    PhysicsError,
    PhysParams,
    SegmentMode,
    Spinor2,
    classify_band,
    classify_mode,
    current_of_u,
    make_spinor,
    u_of_k,
    w_of_kappa,
)
from .step import MatchedState, ScatteringResult, match_oracle, step_scatter

__version__ = "0.1.0"

__all__ = [
    "BandCase",
    "DomainError",
    "ModeKind",
    "NoStatesError",
    "NumericalError",
    "PhysicsError",
    "PhysParams",
    "SegmentMode",
    "Spinor2",
    "classify_band",
    "classify_mode",
    "current_of_u",
    "make_spinor",
    "u_of_k",
    "w_of_kappa",
    "MatchedState",
    "ScatteringResult",
    "match_oracle",
    "step_scatter",
]
