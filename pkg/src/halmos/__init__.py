"""Logical geometry over finite algebras.

Formulas with equality are evaluated as point sets in ``Hom(W(X), H)``; the
package provides the algebraic, logical and model-theoretic Galois closures
and decision procedures for types, isotypy and homogeneity.
"""

from .algebra import (ElementMap, FiniteAlgebra, Signature, automorphisms, cyclic_group,
                      direct_power, find_pair_isomorphism, generated_subalgebra, is_homomorphism,
                      load_algebra, parse_algebra, relabel, two_element_semilattice)
from .errors import HalmosError, ParseError, ResourceError, SignatureMismatch, SpaceMismatch
from .formulas import (And, Equality, Exists, Forall, Not, Or, SpecialFormula, free_variables,
                       is_x_special, parse_formula, specialize, substitute_formula, to_dsl)
from .semantics import (PointSet, complement, decode, encode, equality_set, exists_q, forall_q,
                        in_lker, in_theory, is_admissible, join, meet, pullback, semantically_equal, val)
from .terms import (App, Point, Substitution, Var, apply_substitution, evaluate, kernel_contains,
                    parse_term)

__all__ = [
    "ElementMap", "FiniteAlgebra", "Signature", "automorphisms", "cyclic_group", "direct_power",
    "find_pair_isomorphism", "generated_subalgebra", "is_homomorphism", "load_algebra",
    "parse_algebra", "relabel", "two_element_semilattice", "HalmosError", "ParseError",
    "ResourceError", "SignatureMismatch", "SpaceMismatch", "And", "Equality", "Exists", "Forall",
    "Not", "Or", "SpecialFormula", "free_variables", "is_x_special", "parse_formula", "specialize",
    "substitute_formula", "to_dsl", "PointSet", "complement", "decode", "encode", "equality_set",
    "exists_q", "forall_q", "in_lker", "in_theory", "is_admissible", "join", "meet", "pullback",
    "semantically_equal", "val", "App", "Point", "Substitution", "Var", "apply_substitution",
    "evaluate", "kernel_contains", "parse_term",
]

__version__ = "0.1.0"
