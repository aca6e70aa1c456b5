"""Exact symbolic curvature of twisted products of Riemannian Z2-manifolds."""

from .graded import FunctionSymbol, SuperAlgebra, SuperScalar
from .parser import load_scenario, parse_expression, parse_scenario
from .products import ClaimId, TwistedProduct, TwistedProductSpec, verify

__all__ = [
    "ClaimId",
    "FunctionSymbol",
    "SuperAlgebra",
    "SuperScalar",
    "TwistedProduct",
    "TwistedProductSpec",
    "load_scenario",
    "parse_expression",
    "parse_scenario",
    "verify",
]
