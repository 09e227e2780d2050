"""Patterns, realizations, complete trees and quality of evaluations.

A pattern is a set of vertices labelled by variables of an instance, with
a subset-closed family of faces of size at most k.  A realization gives
every vertex a value so that each face, read through its labels, lies in
the instance's constraint on that set of labels.  Vertices with the same
label inside one face must carry the same value.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .algebra import Algebra, is_invariant
from .errors import ResourceGuardError, StructureError
from .instance import Instance, PartialAssignment


@dataclass(frozen=True)
class Pattern:
    labels: tuple[str, ...]
    faces: frozenset
    blocks: tuple = field(default=(), compare=False)
    k: int = 2

    def __post_init__(self) -> None:
        faces = frozenset(frozenset(f) for f in self.faces if f)
        n = len(self.labels)
        for f in faces:
            if len(f) > self.k:
                raise StructureError(f"face {sorted(f)} exceeds size {self.k}")
            if any(not 0 <= v < n for v in f):
                raise StructureError(f"face {sorted(f)} uses unknown vertices")
            for sub in _proper_subsets(f):
                if sub and sub not in faces:
                    raise StructureError(f"faces not closed under subsets at {sorted(f)}")
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "faces", faces)

    @property
    def vertices(self) -> range:
        return range(len(self.labels))

    @classmethod
    def complete(cls, labels: Sequence[str], k: int) -> "Pattern":
        return cls(tuple(labels), frozenset(_subsets_upto(range(len(labels)), k)), k=k)

    @classmethod
    def closure(cls, labels: Sequence[str], faces: Iterable[Iterable[int]], k: int) -> "Pattern":
        """The pattern whose faces are the given sets and all their subsets."""
        out = set()
        for f in faces:
            out.update(s for s in _subsets_upto(sorted(f), k) if s)
        return cls(tuple(labels), frozenset(out), k=k)

    def check_labels(self, inst: Instance) -> None:
        for v in self.labels:
            if v not in inst.domains:
                raise StructureError(f"label {v!r} is not a variable")

    def sorted_faces(self) -> list[tuple[int, ...]]:
        return sorted((tuple(sorted(f)) for f in self.faces), key=lambda f: (len(f), f))


def _proper_subsets(f: frozenset):
    items = sorted(f)
    for r in range(len(items)):
        for sub in itertools.combinations(items, r):
            yield frozenset(sub)


def _subsets_upto(items: Iterable[int], k: int):
    items = list(items)
    for r in range(1, min(k, len(items)) + 1):
        for sub in itertools.combinations(items, r):
            yield frozenset(sub)


# ---------------------------------------------------------------- face semantics


def satisfies(inst: Instance, labelled: Sequence[tuple[str, int]]) -> bool:
    """Do these (label, value) pairs, read as one face, satisfy the instance?

    Repeated labels must agree; the resulting evaluation must lie in every
    constraint whose scope is inside the set of labels.
    """
    evaluation: dict[str, int] = {}
    for var, val in labelled:
        if not 0 <= val < inst.domains[var]:
            return False
        if evaluation.setdefault(var, val) != val:
            return False
    names = set(evaluation)
    for scope, rel in inst.constraints.items():
        if set(scope) <= names and tuple(evaluation[v] for v in scope) not in rel:
            return False
    return True


def check_realization(inst: Instance, pat: Pattern, assign: Mapping[int, int] | Sequence[int]) -> bool:
    pat.check_labels(inst)
    values = dict(enumerate(assign)) if not isinstance(assign, Mapping) else dict(assign)
    if set(values) != set(pat.vertices):
        return False
    for v in pat.vertices:
        if not 0 <= values[v] < inst.domains[pat.labels[v]]:
            return False
    return all(satisfies(inst, [(pat.labels[v], values[v]) for v in f]) for f in pat.faces)


# ---------------------------------------------------------------- complete trees


def build_complete_ltree(base: Sequence[str], l: int, depth: int, variables: Sequence[str],
                         k: int, *, max_vertices: int = 200_000) -> Pattern:
    """The complete l-tree with the given labelled base, grown ``depth - 1`` times.

    Each growth step takes every nonempty face E present before the step
    and every set U of l+1-|E| variables, and glues on fresh vertices G
    labelled by U, with all at most k-element subsets of E and G as faces.
    ``blocks`` records ``(E, G)`` in creation order.
    """
    if not 1 <= l <= k:
        raise StructureError("need 1 <= l <= k")
    if len(base) > l:
        raise StructureError("base larger than l")
    if depth < 1:
        raise StructureError("depth must be at least 1")
    variables = sorted(variables)
    labels = list(base)
    faces = set(_subsets_upto(range(len(labels)), k))
    blocks = []
    for _ in range(depth - 1):
        step = []
        for face in sorted((tuple(sorted(f)) for f in faces), key=lambda f: (len(f), f)):
            size = l + 1 - len(face)
            if size <= 0:
                continue
            for u in itertools.combinations(variables, size):
                g = tuple(range(len(labels), len(labels) + size))
                labels.extend(u)
                if len(labels) > max_vertices:
                    raise ResourceGuardError(f"tree exceeded {max_vertices} vertices", len(labels))
                step.append((face, g))
        for face, g in step:
            faces.update(s for s in _subsets_upto(face + g, k) if set(s) & set(g))
        blocks.extend(step)
    return Pattern(tuple(labels), frozenset(faces), tuple(blocks), k)


def tree_realizations(inst: Instance, tree: Pattern, *, max_steps: int | None = None) -> frozenset:
    """Values on the base vertices that extend to a realization of the tree.

    Blocks are eliminated in reverse creation order: each one leaves behind
    the set of values on its attachment face that some choice for its
    fresh vertices supports.
    """
    tree.check_labels(inst)
    fresh = {v for _, g in tree.blocks for v in g}
    base = [v for v in tree.vertices if v not in fresh]
    extra: dict[tuple[int, ...], set] = {}
    steps = 0
    for face, g in reversed(tree.blocks):
        local = [f for f in _subsets_upto(face + g, tree.k) if set(f) & set(g)]
        local = [tuple(sorted(f)) for f in local]
        allowed = set()
        order = list(face) + list(g)
        for values in itertools.product(*(range(inst.domains[tree.labels[v]]) for v in order)):
            steps += 1
            if max_steps is not None and steps > max_steps:
                raise ResourceGuardError(f"elimination exceeded {max_steps} steps", steps)
            val = dict(zip(order, values))
            if values[:len(face)] in allowed:
                continue
            if all(_face_ok(inst, tree, f, val, extra) for f in local):
                allowed.add(values[:len(face)])
        extra[face] = extra[face] & allowed if face in extra else allowed
    out = []
    for values in itertools.product(*(range(inst.domains[tree.labels[v]]) for v in base)):
        val = dict(zip(base, values))
        faces = [tuple(sorted(f)) for f in tree.faces if set(f) <= set(base)]
        if all(_face_ok(inst, tree, f, val, extra) for f in faces):
            out.append(values)
    return frozenset(out)


def _face_ok(inst, tree, f, val, extra) -> bool:
    if not satisfies(inst, [(tree.labels[v], val[v]) for v in f]):
        return False
    allowed = extra.get(f)
    return allowed is None or tuple(val[v] for v in f) in allowed


def find_realization(inst: Instance, pat: Pattern, fixed: Mapping[int, int] | None = None,
                     *, max_nodes: int | None = None) -> dict[int, int] | None:
    """Backtracking search for a realization of an arbitrary pattern."""
    pat.check_labels(inst)
    fixed = dict(fixed or {})
    order = sorted(pat.vertices, key=lambda v: (v not in fixed, v))
    pos = {v: i for i, v in enumerate(order)}
    due = [[] for _ in order]
    for f in pat.faces:
        due[max(pos[v] for v in f)].append(tuple(sorted(f)))
    val: dict[int, int] = {}
    nodes = 0

    def go(i: int) -> bool:
        nonlocal nodes
        if i == len(order):
            return True
        v = order[i]
        choices = [fixed[v]] if v in fixed else range(inst.domains[pat.labels[v]])
        for a in choices:
            nodes += 1
            if max_nodes is not None and nodes > max_nodes:
                raise ResourceGuardError(f"search exceeded {max_nodes} nodes", nodes)
            val[v] = a
            if all(satisfies(inst, [(pat.labels[u], val[u]) for u in f]) for f in due[i]) and go(i + 1):
                return True
        del val[v]
        return False

    return dict(val) if go(0) else None


# ---------------------------------------------------------------- quality


class Quality:
    """Quality of labelled faces, computed by recursion on the depth.

    A face (a multiset of (label, value) pairs of size at most k) has
    quality 1 when it and all its subfaces are satisfied.  It has quality
    d+1 when, in addition, for every nonempty subface E and every set U of
    k+1-|E| variables, fresh values for U can be chosen so that every face
    of E and U of size at most k that meets U has quality d.  This matches
    extending to a realization of the complete k-tree of depth d+1.
    """

    def __init__(self, inst: Instance, k: int):
        if inst.max_arity() > k:
            raise StructureError(f"constraint of arity above {k}")
        self.inst = inst
        self.k = k
        self.variables = sorted(inst.variables)
        self._memo: dict = {}

    def evaluation_key(self, evaluation: PartialAssignment) -> tuple:
        if len(evaluation) > self.k:
            raise StructureError(f"evaluation on more than {self.k} variables")
        self.inst.check_partial(evaluation)
        return tuple(sorted(evaluation.items()))

    def __call__(self, evaluation: PartialAssignment, d: int) -> bool:
        return self.face(self.evaluation_key(evaluation), d)

    def level(self, evaluation: PartialAssignment, d_max: int) -> int:
        """Largest d <= d_max with the evaluation of quality d (0 if unsatisfied)."""
        key = self.evaluation_key(evaluation)
        best = 0
        for d in range(1, d_max + 1):
            if not self.face(key, d):
                break
            best = d
        return best

    def face(self, face: tuple, d: int) -> bool:
        face = tuple(sorted(face))
        key = (face, d)
        if key in self._memo:
            return self._memo[key]
        if d < 1:
            raise ValueError("quality depth starts at 1")
        ok = all(satisfies(self.inst, sub) for sub in _sub_multisets(face))
        if ok and d > 1:
            ok = all(self._extends(e, d - 1) for e in _sub_multisets(face))
        self._memo[key] = ok
        return ok

    def _extends(self, e: tuple, d: int) -> bool:
        size = self.k + 1 - len(e)
        for u in itertools.combinations(self.variables, size):
            for values in itertools.product(*(range(self.inst.domains[x]) for x in u)):
                g = tuple(zip(u, values))
                if all(self.face(t, d) for t in _meeting_faces(e, g, self.k)):
                    break
            else:
                return False
        return True


def _sub_multisets(face: tuple):
    """Distinct nonempty sub-multisets of a face."""
    seen = set()
    for r in range(1, len(face) + 1):
        for idx in itertools.combinations(range(len(face)), r):
            sub = tuple(sorted(face[i] for i in idx))
            if sub not in seen:
                seen.add(sub)
                yield sub


def _meeting_faces(e: tuple, g: tuple, k: int):
    """Faces of at most k elements of e + g that contain an element of g."""
    items = list(e) + list(g)
    fresh = set(range(len(e), len(items)))
    seen = set()
    for r in range(1, k + 1):
        for idx in itertools.combinations(range(len(items)), r):
            if fresh.isdisjoint(idx):
                continue
            sub = tuple(sorted(items[i] for i in idx))
            if sub not in seen:
                seen.add(sub)
                yield sub


def quality(inst: Instance, evaluation: PartialAssignment, d: int, k: int | None = None) -> bool:
    """Does the evaluation (on at most k variables) have quality d?"""
    k = inst.max_arity() if k is None else k
    return Quality(inst, k)(evaluation, d)


def explicit_quality(inst: Instance, evaluation: PartialAssignment, d: int, k: int, *,
                     max_vertices: int = 200_000) -> bool:
    """Quality by building the complete k-tree and eliminating it (slow oracle)."""
    names = sorted(evaluation)
    tree = build_complete_ltree(names, k, d, inst.variables, k, max_vertices=max_vertices)
    return tuple(evaluation[v] for v in names) in tree_realizations(inst, tree)


# ---------------------------------------------------------------- closure of realizations


def quality_realizations(inst: Instance, pat: Pattern, d: int, k: int | None = None) -> list[tuple[int, ...]]:
    """All realizations of the pattern in which every face has quality d."""
    k = pat.k if k is None else k
    pat.check_labels(inst)
    q = Quality(inst, k)
    faces = pat.sorted_faces()
    out = []
    for values in itertools.product(*(range(inst.domains[x]) for x in pat.labels)):
        if all(q.face(tuple((pat.labels[v], values[v]) for v in f), d) for f in faces):
            out.append(values)
    return out


def realizations_closed(alg: Algebra, inst: Instance, pat: Pattern, d: int) -> bool:
    """Is the set of quality-d realizations closed under the operations, applied vertex-wise?"""
    sizes = {inst.domains[x] for x in pat.labels}
    if sizes and sizes != {alg.domain_size}:
        raise StructureError("pattern labels must range over the algebra's carrier")
    return is_invariant(alg, quality_realizations(inst, pat, d))


def random_pattern(variables: Sequence[str], k: int, seed: int, *, max_vertices: int = 4,
                   max_faces: int = 4) -> Pattern:
    rng = np.random.default_rng(seed)
    variables = sorted(variables)
    n = int(rng.integers(1, max_vertices + 1))
    labels = [variables[int(i)] for i in rng.integers(0, len(variables), size=n)]
    faces = []
    for _ in range(int(rng.integers(0, max_faces + 1))):
        size = int(rng.integers(1, min(k, n) + 1))
        faces.append(sorted(int(i) for i in rng.choice(n, size=size, replace=False)))
    return Pattern.closure(labels, faces, k)
