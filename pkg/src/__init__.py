"""
asympl - symbolic verification of Hamiltonian structures on almost symplectic manifolds.

This package checks, exactly and in coordinates, the identities that define
locally Hamiltonian fields, Lee forms, Poisson brackets, Dirac frames,
reduced structures, tangent-bundle lifts and left-invariant structures on
G x G. Check results are verdicts carrying witnesses, never bare booleans.
"""

__version__ = "0.1.0"

from src.models import (
    Chart,
    Condition,
    GeometryError,
    SamplePoint,
    Verdict,
    Witness,
)
from src.expr import Expr, parse_scalar
from src.exterior import KForm, KVector, MapExpr, parse_field, parse_form
from src.symplectic import AlmostSymplectic
from src.verification_service import VerificationService

__all__ = [
    "Chart",
    "Condition",
    "GeometryError",
    "SamplePoint",
    "Verdict",
    "Witness",
    "Expr",
    "parse_scalar",
    "KForm",
    "KVector",
    "MapExpr",
    "parse_field",
    "parse_form",
    "AlmostSymplectic",
    "VerificationService",
]
