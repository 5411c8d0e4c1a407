"""Exact feasibility checking for sparse tropical polynomial systems."""

from .tropsem import (BOTTOM, EPS, Nabla, PolySystem, Rel, TropicalPolynomial, TropicalScalar,
                      TwoSided, argmax_set, evaluate, holds_relation, is_root)

__all__ = ["BOTTOM", "EPS", "Nabla", "PolySystem", "Rel", "TropicalPolynomial", "TropicalScalar",
           "TwoSided", "argmax_set", "evaluate", "holds_relation", "is_root"]
