"""CSP instances with per-variable domains and canonical constraint scopes."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .algebra import Algebra, generate_subpower
from .errors import StructureError

PartialAssignment = Mapping[str, int]
Relation = frozenset


def project(tuples: Iterable[tuple], positions: Sequence[int]) -> frozenset:
    return frozenset(tuple(t[p] for p in positions) for t in tuples)


@dataclass(frozen=True, eq=False)
class Instance:
    """Variables with domain sizes and at most one constraint per variable set.

    Scopes are stored sorted by variable name; relations are permuted to
    match.  Constraints given on the same set of variables are intersected.
    """

    variables: tuple[str, ...]
    domains: Mapping[str, int]
    constraints: Mapping[tuple[str, ...], frozenset] = field(default_factory=dict)

    def __post_init__(self) -> None:
        variables = tuple(self.variables)
        if len(set(variables)) != len(variables):
            raise StructureError("duplicate variable names")
        domains = {v: int(self.domains[v]) for v in variables}
        if any(d < 1 for d in domains.values()):
            raise StructureError("domains must be nonempty")
        merged: dict[tuple[str, ...], frozenset] = {}
        for scope, rel in self.constraints.items():
            scope, rel = _canonical(scope, rel, domains)
            merged[scope] = merged[scope] & rel if scope in merged else rel
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "domains", domains)
        object.__setattr__(self, "constraints", dict(sorted(merged.items())))

    @classmethod
    def build(cls, variables: Mapping[str, int] | Iterable[tuple[str, int]],
              constraints: Iterable[tuple[Sequence[str], Iterable[Sequence[int]]]] = ()) -> "Instance":
        """Instance from ``{name: domain}`` and ``(scope, tuples)`` pairs.

        Unlike the raw constructor this accepts several constraints with the
        same variable set; they are intersected after permuting to a common
        scope order.
        """
        items = list(variables.items()) if isinstance(variables, Mapping) else list(variables)
        domains = dict(items)
        merged: dict[tuple[str, ...], frozenset] = {}
        for scope, tuples in constraints:
            scope, rel = _canonical(scope, frozenset(tuple(t) for t in tuples), domains)
            merged[scope] = merged[scope] & rel if scope in merged else rel
        return cls(tuple(v for v, _ in items), domains, merged)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return (self.variables == other.variables and self.domains == other.domains
                and self.constraints == other.constraints)

    def __repr__(self) -> str:
        return (f"Instance({len(self.variables)} variables, "
                f"{len(self.constraints)} constraints)")

    @property
    def scopes(self) -> list[tuple[str, ...]]:
        return list(self.constraints)

    def relation(self, scope: Sequence[str]) -> frozenset | None:
        """The constraint relation on ``scope`` in the given variable order, or None."""
        key = tuple(sorted(scope))
        if len(set(key)) != len(key):
            raise StructureError("repeated variable in scope")
        rel = self.constraints.get(key)
        if rel is None:
            return None
        order = [key.index(v) for v in scope]
        return project(rel, order)

    def full_relation(self, scope: Sequence[str]) -> frozenset:
        return frozenset(itertools.product(*(range(self.domains[v]) for v in scope)))

    def allowed(self, scope: Sequence[str]) -> frozenset:
        """Tuples on ``scope`` satisfying every constraint whose scope lies inside it."""
        scope = tuple(scope)
        inside = [s for s in self.constraints if set(s) <= set(scope)]
        out = []
        for tup in itertools.product(*(range(self.domains[v]) for v in scope)):
            value = dict(zip(scope, tup))
            if all(tuple(value[v] for v in s) in self.constraints[s] for s in inside):
                out.append(tup)
        return frozenset(out)

    def restrict(self, keep: Iterable[str]) -> "Instance":
        """The instance on ``keep`` with every constraint that leaves it dropped."""
        keep = set(keep)
        variables = tuple(v for v in self.variables if v in keep)
        cons = {s: r for s, r in self.constraints.items() if set(s) <= keep}
        return Instance(variables, {v: self.domains[v] for v in variables}, cons)

    def with_constraints(self, constraints: Mapping[tuple[str, ...], frozenset],
                         replace: bool = True) -> "Instance":
        """Copy with the given constraints replacing (or intersecting) existing ones."""
        cons = dict(self.constraints)
        for scope, rel in constraints.items():
            key, rel = _canonical(scope, frozenset(rel), self.domains)
            cons[key] = rel if replace or key not in cons else cons[key] & rel
        return Instance(self.variables, self.domains, cons)

    def max_arity(self) -> int:
        return max((len(s) for s in self.constraints), default=0)

    def is_k_uniform(self, k: int) -> bool:
        if any(len(s) != k for s in self.constraints):
            return False
        return all(s in self.constraints for s in itertools.combinations(sorted(self.variables), k))

    def has_empty_relation(self) -> bool:
        return any(not rel for rel in self.constraints.values())

    def check_partial(self, partial: PartialAssignment) -> None:
        for v, a in partial.items():
            if v not in self.domains:
                raise StructureError(f"unknown variable {v!r}")
            if not 0 <= a < self.domains[v]:
                raise StructureError(f"value {a} outside the domain of {v!r}")

    def to_json(self) -> dict:
        return {
            "variables": [{"name": v, "domain": self.domains[v]} for v in self.variables],
            "constraints": [{"scope": list(s), "tuples": [list(t) for t in sorted(r)]}
                            for s, r in self.constraints.items()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Instance":
        try:
            variables = [(str(v["name"]), int(v["domain"])) for v in data["variables"]]
            cons = [(c["scope"], c["tuples"]) for c in data.get("constraints", [])]
        except (KeyError, TypeError) as exc:
            raise StructureError(f"malformed instance: {exc}") from exc
        return cls.build(variables, cons)


def _canonical(scope: Sequence[str], rel: frozenset, domains: Mapping[str, int]):
    scope = tuple(scope)
    if not scope:
        raise StructureError("empty scope")
    if len(set(scope)) != len(scope):
        raise StructureError(f"scope {scope} repeats a variable")
    for v in scope:
        if v not in domains:
            raise StructureError(f"scope {scope} uses unknown variable {v!r}")
    for tup in rel:
        if len(tup) != len(scope):
            raise StructureError(f"tuple {tup} does not match scope {scope}")
        if any(not 0 <= a < domains[v] for a, v in zip(tup, scope)):
            raise StructureError(f"tuple {tup} leaves the domains of {scope}")
    key = tuple(sorted(scope))
    order = [scope.index(v) for v in key]
    return key, project(rel, order)


def load_instance(path) -> Instance:
    with open(path) as fh:
        return Instance.from_json(json.load(fh))


def save_instance(inst: Instance, path) -> None:
    with open(path, "w") as fh:
        json.dump(inst.to_json(), fh, indent=1)
        fh.write("\n")


# ---------------------------------------------------------------- weak k-instances


def validate_weak_k(inst: Instance, k: int) -> bool:
    """Every projection of a constraint onto a constrained sub-scope must land inside that constraint."""
    if inst.max_arity() > k:
        raise StructureError(f"constraint of arity above {k}")
    for scope, rel in inst.constraints.items():
        for sub, sub_rel in inst.constraints.items():
            if sub != scope and set(sub) <= set(scope):
                if not project(rel, [scope.index(v) for v in sub]) <= sub_rel:
                    return False
    return True


def small_arity_closure(inst: Instance, k: int) -> Instance:
    """Add the projections of the k-ary constraints onto all smaller variable sets.

    Raises StructureError when two k-element supersets induce different
    projections, which cannot happen for (k,k+1)-instances.
    """
    if not inst.is_k_uniform(k):
        raise StructureError(f"instance is not {k}-uniform")
    names = sorted(inst.variables)
    extra = {}
    for size in range(1, k):
        for sub in itertools.combinations(names, size):
            seen = None
            for scope in inst.constraints:
                if not set(sub) <= set(scope):
                    continue
                proj = project(inst.constraints[scope], [scope.index(v) for v in sub])
                if seen is None:
                    seen = (scope, proj)
                elif proj != seen[1]:
                    raise StructureError(
                        f"projections onto {sub} disagree between {seen[0]} and {scope}")
            if seen is not None:
                extra[sub] = seen[1]
    return inst.with_constraints(extra)


# ---------------------------------------------------------------- squaring


def pair_code(a: int, b: int, n: int) -> int:
    """Flat encoding of the pair (a, b) of A x A as ``a*n + b``."""
    return a * n + b


def pair_decode(v: int, n: int) -> tuple[int, int]:
    return divmod(v, n)


def pair_variable(u: str, v: str) -> str:
    return f"y({u},{v})"


def square_instance(inst: Instance, pairing: Iterable[tuple[str, str]],
                    uniform: bool = False) -> Instance:
    """Add a variable over A x A for each requested pair, tied to its two components.

    All variables of ``inst`` must share one domain size n.  The pair
    variable for (u, v) ranges over encoded pairs (a, b) allowed by every
    constraint containing both u and v; binary constraints pin its two
    components to the values of u and v.  With ``uniform`` every original
    variable is moved to A x A as well, sent to the diagonal.
    """
    sizes = set(inst.domains.values())
    if len(sizes) > 1:
        raise StructureError("squaring needs a single-sorted instance")
    n = sizes.pop() if sizes else 1
    pairing = list(pairing)
    for u, v in pairing:
        for w in (u, v):
            if w not in inst.domains:
                raise StructureError(f"unknown variable {w!r}")

    def enc(a: int) -> int:
        return pair_code(a, a, n) if uniform else a

    variables = [(v, n * n if uniform else n) for v in inst.variables]
    cons = [(s, [tuple(enc(a) for a in t) for t in r]) for s, r in inst.constraints.items()]
    if uniform:
        used = {v for s in inst.constraints for v in s}
        for v in inst.variables:
            if v not in used:
                cons.append(((v,), [(enc(a),) for a in range(n)]))
    for u, v in pairing:
        y = pair_variable(u, v)
        if y in dict(variables):
            continue
        variables.append((y, n * n))
        pairs = [(a, b) for a in range(n) for b in range(n) if u != v or a == b]
        for s, r in inst.constraints.items():
            if u in s and v in s:
                pos = [s.index(u), s.index(v)]
                allowed = {(t[pos[0]], t[pos[1]]) for t in r}
                pairs = [p for p in pairs if p in allowed]
        cons.append(((u, y), [(enc(a), pair_code(a, b, n)) for a, b in pairs]))
        if u != v:
            cons.append(((v, y), [(enc(b), pair_code(a, b, n)) for a, b in pairs]))
    return Instance.build(variables, cons)


# ---------------------------------------------------------------- random instances


def random_instance(alg: Algebra, n_vars: int, k: int, seed: int | np.random.SeedSequence, *,
                    relations: Sequence[Iterable[Sequence[int]]] | None = None,
                    max_generators: int = 4, planted: int = 1) -> Instance:
    """A k-uniform instance over ``alg`` whose relations are subpowers.

    Relations are drawn from ``relations`` when given, otherwise generated
    from 1..``max_generators`` random tuples.  With ``planted`` a random
    assignment is drawn first and its projection is always one of the
    generators, so the instance has at least that solution.  An integer
    ``planted`` plants that many assignments, each contributing a generator.
    """
    if n_vars < k:
        raise StructureError("need at least k variables")
    rng = np.random.default_rng(seed)
    n = alg.domain_size
    width = len(str(max(n_vars - 1, 0)))
    names = [f"v{i:0{width}d}" for i in range(n_vars)]
    hidden = rng.integers(0, n, size=(int(planted), n_vars))
    pool = [frozenset(tuple(t) for t in r) for r in relations] if relations is not None else None
    cons = []
    for scope in itertools.combinations(range(n_vars), k):
        if pool is not None:
            rel = pool[int(rng.integers(len(pool)))]
        else:
            count = int(rng.integers(1, max_generators + 1))
            gens = [tuple(int(a) for a in rng.integers(0, n, size=k)) for _ in range(count)]
            gens = [tuple(int(h[i]) for i in scope) for h in hidden] + gens
            rel = generate_subpower(alg, gens).tuples
        cons.append(([names[i] for i in scope], rel))
    return Instance.build([(v, n) for v in names], cons)
