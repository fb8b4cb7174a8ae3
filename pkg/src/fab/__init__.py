"""Finite forest algebras, iterated counting congruences and witness circuits."""
from ._kernels import BACKEND
from .algebra import (FiniteMonoid, ForestAlgebra, Homomorphism, TransformationMonoid,
                      divides, hom_eval, scc, syntactic_quotient, validate_algebra)
from .congruence import TauPi, cmp_tau_pi, equiv_n, idempotent_power, refinement_falsify, signature
from .terms import Term, format_term, parse_term

__version__ = "0.1.0"

__all__ = ["BACKEND", "FiniteMonoid", "ForestAlgebra", "Homomorphism", "TransformationMonoid",
           "divides", "hom_eval", "scc", "syntactic_quotient", "validate_algebra", "TauPi",
           "cmp_tau_pi", "equiv_n", "idempotent_power", "refinement_falsify", "signature",
           "Term", "format_term", "parse_term"]
