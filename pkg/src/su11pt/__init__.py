"""Driven PT-symmetric SU(1,1) oscillator: invariants, phases and evolution."""

from ._kernels import BACKEND
from .algebra import (Sector, SectorKind, TruncatedRep, build_bargmann_rep, build_boson_rep,
                      build_rep, commutator_residual, pt_apply)
from .errors import (ConvergenceWarning, DegenerateParametersError, DomainError,
                     InvalidDimensionError, NoPeriodError, NumericError, ShapeError,
                     StabilityError, SU11Error)
from .invariant import Branch, EtaSolution, solve_eta
from .model import ModelParams, QuadratureForm, hamiltonian, quadrature_form

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Branch", "ConvergenceWarning", "DegenerateParametersError", "DomainError",
    "EtaSolution", "InvalidDimensionError", "ModelParams", "NoPeriodError", "NumericError",
    "QuadratureForm", "Sector", "SectorKind", "ShapeError", "StabilityError", "SU11Error",
    "TruncatedRep", "build_bargmann_rep", "build_boson_rep", "build_rep", "commutator_residual",
    "hamiltonian", "pt_apply", "quadrature_form", "solve_eta",
]
