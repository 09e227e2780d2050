"""The (k,l)-consistency algorithm and the (k,l)-instance test."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

from .checks import Check
from .errors import StructureError
from .instance import Instance
from .solver import _Plan


class Status(str, Enum):
    ENFORCED = "ENFORCED"
    REJECT = "REJECT"


@dataclass(frozen=True)
class ConsistencyResult:
    status: Status
    instance: Instance
    rounds: int
    removed: int

    @property
    def rejected(self) -> bool:
        return self.status is Status.REJECT


def complete_k_uniform(inst: Instance, k: int) -> Instance:
    """One constraint on every k-set: the tuples allowed by the constraints inside it."""
    if inst.max_arity() > k:
        raise StructureError(f"constraint of arity above {k}")
    if len(inst.variables) < k:
        raise StructureError(f"need at least {k} variables")
    names = sorted(inst.variables)
    cons = {}
    for scope in itertools.combinations(names, k):
        inside = {s: r for s, r in inst.constraints.items() if set(s) <= set(scope)}
        cons[scope] = frozenset(_Plan(scope, inst.domains, inside).run())
    return Instance(inst.variables, inst.domains, cons)


def _window_support(window, domains, rels, k):
    """For each k-subscope of the window, the tuples occurring in a window solution."""
    subscopes = list(itertools.combinations(window, k))
    inside = {s: rels[s] for s in subscopes}
    cols = {s: [window.index(v) for v in s] for s in subscopes}
    seen = {s: set() for s in subscopes}
    for values in _Plan(window, domains, inside).run():
        for s, c in cols.items():
            seen[s].add(tuple(values[j] for j in c))
    return seen


def enforce_kl(inst: Instance, k: int, l: int, *, mode: str = "jacobi") -> ConsistencyResult:
    """Shrink every k-ary relation to the tuples that extend inside every l-window.

    The instance is first completed to a k-uniform one.  ``mode="jacobi"``
    collects deletions over a full pass of the windows and applies them
    at the end of the round; ``mode="gauss-seidel"`` applies them as each
    window is processed.  Both reach the same greatest fixed point.
    ``rounds`` counts passes including the final one that changed nothing.
    """
    if not 0 < k < l:
        raise ValueError("need 0 < k < l")
    if mode not in ("jacobi", "gauss-seidel"):
        raise ValueError(f"unknown mode {mode!r}")
    start = complete_k_uniform(inst, k)
    rels = {s: frozenset(r) for s, r in start.constraints.items()}
    names = sorted(inst.variables)
    windows = list(itertools.combinations(names, l))
    removed = 0
    rounds = 0

    def result(status):
        return ConsistencyResult(status, Instance(inst.variables, inst.domains, rels), rounds, removed)

    if any(not r for r in rels.values()):
        return result(Status.REJECT)
    while True:
        rounds += 1
        removed_before = removed
        pending: dict = {}
        for window in windows:
            seen = _window_support(window, start.domains, rels, k)
            for s, ok in seen.items():
                if mode == "jacobi":
                    pending[s] = pending.get(s, rels[s]) & frozenset(ok)
                elif len(ok) < len(rels[s]):
                    removed += len(rels[s]) - len(ok)
                    rels[s] = frozenset(ok)
                    if not ok:
                        return result(Status.REJECT)
        if mode == "jacobi":
            changed = False
            for s, r in pending.items():
                if len(r) < len(rels[s]):
                    removed += len(rels[s]) - len(r)
                    rels[s] = r
                    changed = True
            if any(not r for r in rels.values()):
                return result(Status.REJECT)
        else:
            changed = removed > removed_before
        if not changed:
            return result(Status.ENFORCED)


def is_kl_instance(inst: Instance, k: int, l: int) -> Check:
    """Does every tuple of every constraint inside each l-window extend to a window solution?

    The witness on failure is ``(window, scope, tuple)``.  With more window
    size than variables there are no windows and the answer is true.
    """
    if inst.max_arity() > k:
        raise StructureError(f"constraint of arity above {k}")
    names = sorted(inst.variables)
    nodes = 0
    for window in itertools.combinations(names, l):
        inside = {s: r for s, r in inst.constraints.items() if set(s) <= set(window)}
        plan = _Plan(window, inst.domains, inside)
        cols = {s: [window.index(v) for v in s] for s in inside}
        seen = {s: set() for s in inside}
        for values in plan.run():
            for s, c in cols.items():
                seen[s].add(tuple(values[j] for j in c))
        nodes += plan.nodes
        for s, r in inside.items():
            for tup in sorted(r):
                if tup not in seen[s]:
                    return Check(False, (window, s, tup), nodes)
    return Check(True, None, nodes)
