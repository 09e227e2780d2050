"""Gadget instances built from a relation R, and the near-unanimity generator tuples.

Pair variables range over A x A with the flat encoding ``a*n + b``
(see ``instance.pair_code``).
"""

from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from .algebra import Algebra, Subpower, Term, _build_terms, _closure, star_closure
from .errors import StructureError
from .instance import Instance, pair_code


def _domain(rel: Subpower) -> int:
    sizes = set(rel.coordinate_domains)
    if len(sizes) != 1:
        raise StructureError("gadgets need a relation over a single domain")
    return sizes.pop()


def _value(var: str, a: Sequence[int], n: int) -> int:
    """Value of a gadget variable under the tuple ``a`` (coordinates numbered from 1)."""
    if var.startswith("x"):
        return a[int(var[1:]) - 1]
    i, j = int(var[1]), int(var[2])
    return pair_code(a[i - 1], a[j - 1], n)


def _domain_of(var: str, n: int) -> int:
    return n if var.startswith("x") else n * n


def build_prop_sw(rel: Subpower, k: int) -> Instance:
    """The k-uniform instance on x1..x_{k+1} and the pair variable y12.

    Each k-set of x's is constrained by the projection of R; each (k-1)-set
    of x's together with y12 by the tuples read off R, with y12 taking the
    pair of the first two coordinates.
    """
    if k < 2:
        raise StructureError("k must be at least 2")
    if rel.arity != k + 1:
        raise StructureError(f"relation has arity {rel.arity}, expected {k + 1}")
    n = _domain(rel)
    xs = [f"x{i}" for i in range(1, k + 2)]
    variables = xs + ["y12"]
    cons = []
    for scope in itertools.combinations(xs, k):
        cons.append((scope, {tuple(_value(v, a, n) for v in scope) for a in rel}))
    for sub in itertools.combinations(xs, k - 1):
        scope = sub + ("y12",)
        cons.append((scope, {tuple(_value(v, a, n) for v in scope) for a in rel}))
    return Instance.build([(v, _domain_of(v, n)) for v in variables], cons)


def build_prop_sens(rel: Subpower, k: int) -> Instance:
    """The k-uniform instance on y12, y34, y13, y24 and x5..x_{k+2}.

    The special scope (y12, y34, x5, ..) is constrained through the star
    closure of R over (k+1)-element coordinate sets; every other k-set of
    variables reads its tuples off R itself.
    """
    if k < 2:
        raise StructureError("k must be at least 2")
    if rel.arity != k + 2:
        raise StructureError(f"relation has arity {rel.arity}, expected {k + 2}")
    n = _domain(rel)
    xs = [f"x{i}" for i in range(5, k + 3)]
    variables = ["y12", "y34", "y13", "y24"] + xs
    special = ("y12", "y34", *xs)
    closed = star_closure(rel, k + 1)
    cons = []
    for scope in itertools.combinations(variables, k):
        source = closed if set(scope) == set(special) else rel
        cons.append((scope, {tuple(_value(v, a, n) for v in scope) for a in source}))
    return Instance.build([(v, _domain_of(v, n)) for v in variables], cons)


def nu_generator_tuples(k: int) -> tuple[list[tuple[str, ...]], tuple[str, ...]]:
    """The k+2 tuples with a single ``y`` among ``x``'s, and the all-``x`` target."""
    if k < 1:
        raise StructureError("k must be at least 1")
    m = k + 2
    gens = [tuple("y" if j == i else "x" for j in range(m)) for i in range(m)]
    return gens, ("x",) * m


def nu_term_from_generators(alg: Algebra, k: int, max_size: int | None = None) -> Term | None:
    """A (k+2)-ary near-unanimity term, found by generating the target from the generator tuples.

    The two-generated free algebra is replaced by its image in A^(A x A):
    a symbol becomes the vector of its values under every assignment of x
    and y into A.  Duplicate coordinates are dropped.
    """
    gens, target = nu_generator_tuples(k)
    n = alg.domain_size
    columns: dict[tuple, int] = {}
    for pos in range(k + 2):
        for a in range(n):
            for b in range(n):
                env = {"x": a, "y": b}
                col = tuple(env[g[pos]] for g in gens)
                columns.setdefault(col, env[target[pos]])
    rows = np.array(list(columns), dtype=np.int64).T
    _, derivations, hit = _closure(alg, rows, target=tuple(columns.values()), max_size=max_size)
    if hit is None:
        return None
    return _build_terms(derivations, [hit])[hit]
