"""Exhaustive backtracking search: solutions, extensions, sensitivity."""

from __future__ import annotations

import itertools
from typing import Iterator, Mapping, Sequence

from .checks import Check
from .errors import ResourceGuardError
from .instance import Instance, PartialAssignment, project

Constraints = Mapping[tuple[str, ...], frozenset]


class _Plan:
    """Backtracking over a fixed variable order.

    When the i-th variable gets a value, every constraint containing it is
    checked on the already assigned part of its scope, using precomputed
    projections.  So a complete assignment is a solution and every node of
    the search tree is consistent with all constraint projections.
    """

    def __init__(self, order: Sequence[str], domains: Mapping[str, int],
                 constraints: Constraints, fixed: PartialAssignment | None = None):
        self.order = list(order)
        pos = {v: i for i, v in enumerate(self.order)}
        self.choices = []
        for v in self.order:
            if fixed and v in fixed:
                self.choices.append((fixed[v],))
            else:
                self.choices.append(tuple(range(domains[v])))
        self.checks: list[list[tuple[tuple[int, ...], frozenset]]] = [[] for _ in self.order]
        for scope, rel in constraints.items():
            if any(v not in pos for v in scope):
                continue
            ranked = sorted(range(len(scope)), key=lambda j: pos[scope[j]])
            for depth in range(1, len(ranked) + 1):
                cols = ranked[:depth]
                step = pos[scope[cols[-1]]]
                proj = rel if depth == len(scope) and cols == list(range(len(scope))) else project(rel, cols)
                self.checks[step].append((tuple(pos[scope[c]] for c in cols), proj))
        self.nodes = 0

    def run(self, max_nodes: int | None = None) -> Iterator[tuple[int, ...]]:
        n = len(self.order)
        if n == 0:
            yield ()
            return
        values = [0] * n
        checks, choices = self.checks, self.choices
        stack = [iter(choices[0])]
        while stack:
            i = len(stack) - 1
            for a in stack[-1]:
                self.nodes += 1
                if max_nodes is not None and self.nodes > max_nodes:
                    raise ResourceGuardError(f"search exceeded {max_nodes} nodes", self.nodes)
                values[i] = a
                if all(tuple(values[p] for p in cols) in allowed for cols, allowed in checks[i]):
                    break
            else:
                stack.pop()
                continue
            if i == n - 1:
                yield tuple(values)
            else:
                stack.append(iter(choices[i + 1]))


def search_order(inst: Instance, first: Sequence[str] = ()) -> list[str]:
    """Smallest domain first, ties broken by name; ``first`` goes in front."""
    rest = sorted((v for v in inst.variables if v not in set(first)),
                  key=lambda v: (inst.domains[v], v))
    return list(first) + rest


def iter_solutions(inst: Instance, *, order: Sequence[str] | None = None,
                   fixed: PartialAssignment | None = None,
                   max_nodes: int | None = None) -> Iterator[dict[str, int]]:
    order = list(order) if order is not None else list(inst.variables)
    plan = _Plan(order, inst.domains, inst.constraints, fixed)
    for values in plan.run(max_nodes):
        yield dict(zip(order, values))


def enumerate_solutions(inst: Instance, limit: int | None = None, *,
                        max_nodes: int | None = None) -> list[dict[str, int]]:
    """Solutions in lexicographic order of the values along ``inst.variables``."""
    out = []
    if limit is not None and limit <= 0:
        return out
    for sol in iter_solutions(inst, max_nodes=max_nodes):
        out.append(sol)
        if limit is not None and len(out) >= limit:
            break
    return out


def count_solutions(inst: Instance, *, max_nodes: int | None = None) -> int:
    return sum(1 for _ in iter_solutions(inst, order=search_order(inst), max_nodes=max_nodes))


def find_solution(inst: Instance, partial: PartialAssignment | None = None, *,
                  max_nodes: int | None = None) -> dict[str, int] | None:
    """Some solution agreeing with ``partial``, or None."""
    partial = dict(partial or {})
    inst.check_partial(partial)
    order = search_order(inst, first=sorted(partial))
    for sol in iter_solutions(inst, order=order, fixed=partial, max_nodes=max_nodes):
        return sol
    return None


def extends_to_solution(inst: Instance, partial: PartialAssignment, *,
                        max_nodes: int | None = None) -> bool:
    return find_solution(inst, partial, max_nodes=max_nodes) is not None


def is_solution(inst: Instance, assignment: PartialAssignment) -> bool:
    return all(tuple(assignment[v] for v in s) in r for s, r in inst.constraints.items())


def is_partial_solution(inst: Instance, partial: PartialAssignment) -> bool:
    """Consistent with the projection of every constraint onto the assigned variables."""
    for scope, rel in inst.constraints.items():
        cols = [j for j, v in enumerate(scope) if v in partial]
        if cols and tuple(partial[scope[j]] for j in cols) not in project(rel, cols):
            return False
    return True


# ---------------------------------------------------------------- sensitivity


def is_sensitive(inst: Instance, *, method: str = "search",
                 max_nodes: int | None = None) -> Check:
    """Does every tuple of every constraint relation occur in some solution?

    ``method="search"`` looks for a solution through each tuple that is not
    yet covered by an earlier solution.  ``method="projection"`` enumerates
    all solutions and compares each relation with their projection, which
    is the reading "dropping the tuple loses a solution".
    """
    if method == "projection":
        return _sensitive_by_projection(inst, max_nodes)
    if method != "search":
        raise ValueError(f"unknown method {method!r}")
    covered = {s: set() for s in inst.constraints}
    nodes = 0
    for scope, rel in inst.constraints.items():
        for tup in sorted(rel):
            if tup in covered[scope]:
                continue
            budget = None if max_nodes is None else max_nodes - nodes
            plan = _Plan(search_order(inst, first=scope), inst.domains, inst.constraints,
                         dict(zip(scope, tup)))
            try:
                sol = next(plan.run(budget), None)
            except ResourceGuardError as exc:
                raise ResourceGuardError(str(exc), nodes + exc.explored) from None
            nodes += plan.nodes
            if sol is None:
                return Check(False, (scope, tup), nodes)
            assignment = dict(zip(plan.order, sol))
            for s in inst.constraints:
                covered[s].add(tuple(assignment[v] for v in s))
    return Check(True, None, nodes)


def _sensitive_by_projection(inst: Instance, max_nodes: int | None) -> Check:
    plan = _Plan(search_order(inst), inst.domains, inst.constraints)
    seen = {s: set() for s in inst.constraints}
    cols = {s: [plan.order.index(v) for v in s] for s in inst.constraints}
    for values in plan.run(max_nodes):
        for s, c in cols.items():
            seen[s].add(tuple(values[j] for j in c))
    for scope, rel in inst.constraints.items():
        for tup in sorted(rel):
            if tup not in seen[scope]:
                return Check(False, (scope, tup), plan.nodes)
    return Check(True, None, plan.nodes)


# ---------------------------------------------------------------- extension property


def has_extension_property(inst: Instance, *, max_partials: int | None = 1_000_000,
                           max_nodes: int | None = None) -> Check:
    """Does every partial solution extend to a solution?

    A partial solution on a set U of variables is an assignment whose
    restriction to scope ∩ U lies in the projection of each constraint.
    Supports are visited by increasing size; the witness is the first
    partial solution found that does not extend.
    """
    variables = sorted(inst.variables)
    proj_cache: dict[frozenset, set] = {}
    found: list[dict[str, int]] = []
    nodes = 0
    partials = 0

    def remember(sol: dict[str, int]) -> None:
        found.append(sol)
        for key, seen in proj_cache.items():
            seen.add(tuple(sol[v] for v in sorted(key)))

    first = _Plan(search_order(inst), inst.domains, inst.constraints)
    sol = next(first.run(max_nodes), None)
    nodes += first.nodes
    if sol is None:
        return Check(False, {}, nodes)
    found.append(dict(zip(first.order, sol)))

    for size in range(1, len(variables)):
        for support in itertools.combinations(variables, size):
            key = frozenset(support)
            seen = proj_cache.setdefault(key, {tuple(s[v] for v in support) for s in found})
            sub = _projected(inst, support)
            plan = _Plan(support, inst.domains, sub)
            for values in plan.run():
                partials += 1
                if max_partials is not None and partials > max_partials:
                    raise ResourceGuardError(
                        f"extension check exceeded {max_partials} partial solutions", nodes)
                if values in seen:
                    continue
                partial = dict(zip(support, values))
                budget = None if max_nodes is None else max_nodes - nodes
                search = _Plan(search_order(inst, first=support), inst.domains,
                               inst.constraints, partial)
                try:
                    sol = next(search.run(budget), None)
                except ResourceGuardError as exc:
                    raise ResourceGuardError(str(exc), nodes + exc.explored) from None
                nodes += search.nodes
                if sol is None:
                    return Check(False, partial, nodes)
                remember(dict(zip(search.order, sol)))
            nodes += plan.nodes
    return Check(True, None, nodes)


def _projected(inst: Instance, support: Sequence[str]) -> dict[tuple[str, ...], frozenset]:
    keep = set(support)
    out: dict[tuple[str, ...], frozenset] = {}
    for scope, rel in inst.constraints.items():
        cols = [j for j, v in enumerate(scope) if v in keep]
        if not cols:
            continue
        sub = tuple(scope[j] for j in cols)
        proj = project(rel, cols)
        out[sub] = out[sub] & proj if sub in out else proj
    return out
