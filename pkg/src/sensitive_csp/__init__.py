"""Finite algebras, CSP instances over them, and the consistency/sensitivity toolkit."""

from .algebra import (Algebra, Leaf, Node, Operation, Subpower, determined_by_projections,
                      eval_term, find_nu_term, generate_subpower, is_idempotent, is_nu,
                      star_closure)
from .checks import Check
from .consistency import ConsistencyResult, Status, enforce_kl, is_kl_instance
from .errors import ResourceGuardError, StructureError
from .instance import Instance, random_instance, small_arity_closure, square_instance, validate_weak_k
from .solver import enumerate_solutions, extends_to_solution, has_extension_property, is_sensitive

__version__ = "0.1.0"
