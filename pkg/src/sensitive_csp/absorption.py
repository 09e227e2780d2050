"""Binary relations, local absorption witnesses, walks, and loop-lemma checks."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .algebra import (Algebra, Leaf, Term, _build_terms, _closure, clone_part,
                      eval_term, generate_subpower, is_idempotent, is_invariant)
from .errors import StructureError


@dataclass(frozen=True)
class BinRel:
    size: int
    pairs: frozenset

    def __post_init__(self) -> None:
        pairs = frozenset((int(a), int(b)) for a, b in self.pairs)
        for a, b in pairs:
            if not (0 <= a < self.size and 0 <= b < self.size):
                raise StructureError(f"pair {(a, b)} outside carrier of size {self.size}")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def equality(cls, size: int) -> "BinRel":
        return cls(size, frozenset((a, a) for a in range(size)))

    @classmethod
    def full(cls, size: int) -> "BinRel":
        return cls(size, frozenset(itertools.product(range(size), repeat=2)))

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "BinRel":
        return cls(m.shape[0], frozenset(zip(*map(list, np.nonzero(m)))))

    def matrix(self) -> np.ndarray:
        m = np.zeros((self.size, self.size), dtype=bool)
        for a, b in self.pairs:
            m[a, b] = True
        return m

    def __contains__(self, pair) -> bool:
        return tuple(pair) in self.pairs

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(sorted(self.pairs))

    def is_symmetric(self) -> bool:
        return all((b, a) in self.pairs for a, b in self.pairs)

    def __str__(self) -> str:
        return "{" + ", ".join(f"{a}{b}" for a, b in sorted(self.pairs)) + "}"


def compose(r: BinRel, s: BinRel) -> BinRel:
    """Pairs (a, c) with (a, b) in r and (b, c) in s for some b."""
    if r.size != s.size:
        raise StructureError("carriers differ")
    m = (r.matrix().astype(np.int64) @ s.matrix().astype(np.int64)) > 0
    return BinRel.from_matrix(m)


def inverse(r: BinRel) -> BinRel:
    return BinRel(r.size, frozenset((b, a) for a, b in r.pairs))


def power(r: BinRel, l: int) -> BinRel:
    """The l-fold composition of r with itself; l = 0 gives equality."""
    if l < 0:
        raise ValueError("l must be nonnegative")
    out = BinRel.equality(r.size)
    for _ in range(l):
        out = compose(out, r)
    return out


def has_loop(r: BinRel) -> bool:
    return any(a == b for a, b in r.pairs)


def find_closed_walk(r: BinRel, max_len: int | None = None) -> list[int] | None:
    """A shortest closed walk ``[v0, v1, .., v0]``, or None.

    Ties go to the smallest starting vertex.
    """
    best = None
    succ = {a: sorted(b for x, b in r.pairs if x == a) for a in range(r.size)}
    for start in range(r.size):
        parent = {start: None}
        queue = deque([start])
        found = None
        while queue and found is None:
            v = queue.popleft()
            for w in succ[v]:
                if w == start:
                    found = v
                    break
                if w not in parent:
                    parent[w] = v
                    queue.append(w)
        if found is None:
            continue
        walk = _closed_from(parent, start, found)
        if best is None or len(walk) < len(best):
            best = walk
    if best is not None and max_len is not None and len(best) - 1 > max_len:
        return None
    return best


def _closed_from(parent: dict, start: int, last: int) -> list[int]:
    back = []
    v = last
    while v is not None:
        back.append(v)
        v = parent[v]
    return back[::-1] + [start]


def find_walk(r: BinRel, length: int) -> list[int] | None:
    """Some directed walk with ``length`` edges (``length + 1`` vertices), or None."""
    if length < 0:
        raise ValueError("length must be nonnegative")
    m = r.matrix()
    # reach[i][v]: a walk with i edges starts at v
    reach = [np.ones(r.size, dtype=bool)]
    for _ in range(length):
        reach.append((m & reach[-1][None, :]).any(axis=1))
    starts = np.flatnonzero(reach[length])
    if len(starts) == 0:
        return None
    walk = [int(starts[0])]
    for i in range(length, 0, -1):
        nxt = np.flatnonzero(m[walk[-1]] & reach[i - 1])
        walk.append(int(nxt[0]))
    return walk


# ---------------------------------------------------------------- absorption


def one_s_in_r(tuples: Sequence[tuple[int, int]], r: BinRel, s: BinRel) -> bool:
    """Some entry lies in S and every other entry lies in R.

    The other entries may lie in S as well; the composition and walk
    arguments produce such tuples, so excluding them would break both.
    """
    tuples = [tuple(p) for p in tuples]
    in_r = [p in r.pairs for p in tuples]
    outside = in_r.count(False)
    if outside > 1:
        return False
    if outside == 1:
        return tuples[in_r.index(False)] in s.pairs
    return any(p in s.pairs for p in tuples)


def one_s_in_r_tuples(r: BinRel, s: BinRel, n: int) -> list[tuple[tuple[int, int], ...]]:
    """All one-S-in-R tuples of length n, by S-position then lexicographically, without repeats."""
    out = {}
    rs = sorted(r.pairs)
    for i in range(n):
        for mid in sorted(s.pairs):
            for rest in itertools.product(rs, repeat=n - 1):
                out.setdefault(rest[:i] + (mid,) + rest[i:], None)
    return list(out)


def _validate(alg: Algebra, *rels: BinRel) -> None:
    for rel in rels:
        if rel.size != alg.domain_size:
            raise StructureError("relation carrier differs from the algebra")
        if not is_invariant(alg, rel.pairs):
            raise StructureError(f"relation {rel} is not a subuniverse of the square")


def _coordinates(c: Sequence[Sequence[tuple[int, int]]], n: int):
    """Distinct argument rows of the n-ary operation, and for each C-tuple the rows of its two components."""
    rows: dict[tuple[int, ...], int] = {}
    left, right = [], []
    for tup in c:
        if len(tup) != n:
            raise StructureError(f"tuple of length {len(tup)}, expected {n}")
        for comp, sink in ((0, left), (1, right)):
            row = tuple(p[comp] for p in tup)
            sink.append(rows.setdefault(row, len(rows)))
    return list(rows), np.array(left), np.array(right)


def find_absorption_witness(alg: Algebra, r: BinRel, s: BinRel, n: int,
                            c: Iterable[Sequence[tuple[int, int]]] | None = None, *,
                            max_size: int | None = None, validate: bool = True) -> Term | None:
    """An n-ary term t with t(C) inside R, or None when no term operation works.

    C defaults to every one-S-in-R tuple of length n, the hardest finite
    choice: a term for it serves every finite set of such tuples.  With no
    such tuples at all any projection works.  The
    search runs the witnessed closure of the projections on the distinct
    argument rows, so None is a complete answer.  ``max_size`` bounds the
    closure; hitting it raises ResourceGuardError, meaning unknown.
    """
    if validate:
        _validate(alg, r, s)
    c = one_s_in_r_tuples(r, s, n) if c is None else list(c)
    if not c:
        return Leaf(0)
    rows, left, right = _coordinates(c, n)
    gens = np.array(rows, dtype=np.int64).T
    rmat = r.matrix()

    def accept(row: np.ndarray) -> bool:
        return bool(rmat[row[left], row[right]].all())

    _, derivations, hit = _closure(alg, gens, accept=accept, max_size=max_size)
    if hit is None:
        return None
    return _build_terms(derivations, [hit])[hit]


@dataclass
class CloneCache:
    """The n-ary term operations of an algebra as tables, computed once per arity."""

    alg: Algebra
    max_size: int | None = None
    _parts: dict = field(default_factory=dict)

    def tables(self, n: int):
        if n not in self._parts:
            part = clone_part(self.alg, n, max_size=self.max_size)
            ordered = part.sorted_tuples()
            self._parts[n] = (np.array(ordered, dtype=np.int64), ordered, part.witnesses)
        return self._parts[n]

    def absorbs(self, r: BinRel, s: BinRel, n: int) -> Term | None:
        """Same answer as ``find_absorption_witness`` with the default C, via cached tables."""
        c = one_s_in_r_tuples(r, s, n)
        if not c:
            return Leaf(0)
        size = self.alg.domain_size
        table, ordered, witnesses = self.tables(n)
        weights = size ** np.arange(n - 1, -1, -1)
        left = np.array([sum(p[0] * w for p, w in zip(t, weights)) for t in c])
        right = np.array([sum(p[1] * w for p, w in zip(t, weights)) for t in c])
        ok = r.matrix()[table[:, left], table[:, right]].all(axis=1)
        hits = np.flatnonzero(ok)
        if len(hits) == 0:
            return None
        return witnesses[ordered[hits[0]]]


def walk_join_tuples(a_walk: Sequence[int], b_walk: Sequence[int]) -> list[tuple[tuple[int, int], ...]]:
    """The n tuples of pairs a term must send into R for ``walk_join`` to succeed.

    Step i pairs vertex i with vertex i+1 of the joined walk.  Its S-entry
    is (a_{i+1}, b_{i+1}); the other entries are R-edges of the input walks.
    """
    n = len(a_walk)
    out = []
    for i in range(n):
        left = [(b_walk[i - 1], b_walk[i])] * i
        right = [(a_walk[i], a_walk[i + 1])] * (n - i - 1) if i + 1 < n else []
        out.append(tuple(left + [(a_walk[i], b_walk[i])] + right))
    return out


def walk_join(alg: Algebra, r: BinRel, s: BinRel, t: Term,
              a_walk: Sequence[int], b_walk: Sequence[int]) -> list[int]:
    """Merge two R-walks linked by S into one R-walk from a_1 to b_n.

    Vertex i of the result is ``t(b_i,..,b_i, a_{i+1},..,a_{i+1})`` with i
    copies of b_i; consecutive vertices are checked to be in R and the
    first failing step is reported.  The step tuples are one-S-in-R
    tuples, so a witness of local n-absorption always works.
    """
    n = len(a_walk)
    if len(b_walk) != n or n < 1:
        raise StructureError("walks must have the same positive number of vertices")
    for i in range(n - 1):
        if (a_walk[i], a_walk[i + 1]) not in r.pairs or (b_walk[i], b_walk[i + 1]) not in r.pairs:
            raise StructureError(f"input walks are not R-walks at step {i}")
    for a, b in zip(a_walk, b_walk):
        if (a, b) not in s.pairs:
            raise StructureError(f"pair {(a, b)} is not in S")
    out = []
    for i in range(n + 1):
        args = [b_walk[i - 1]] * i + ([a_walk[i]] * (n - i) if i < n else [])
        out.append(eval_term(alg, t, args))
    for i in range(n):
        if (out[i], out[i + 1]) not in r.pairs:
            raise StructureError(f"joined walk leaves R at step {i}: {out[i]} -> {out[i + 1]}")
    return out


# ---------------------------------------------------------------- loop lemmata


def invariant_binary_relations(alg: Algebra) -> list[BinRel]:
    """Every subuniverse of the square, in order of the bitmask of pairs."""
    size = alg.domain_size
    cells = list(itertools.product(range(size), repeat=2))
    out = []
    for mask in range(1 << len(cells)):
        pairs = [cells[i] for i in range(len(cells)) if mask >> i & 1]
        if is_invariant(alg, pairs):
            out.append(BinRel(size, frozenset(pairs)))
    return out


def sample_binary_relations(alg: Algebra, count: int, seed: int,
                            max_generators: int = 4) -> list[BinRel]:
    """Subuniverses of the square generated by random pairs (with repetition)."""
    rng = np.random.default_rng(seed)
    size = alg.domain_size
    out = []
    for _ in range(count):
        k = int(rng.integers(1, max_generators + 1))
        gens = [tuple(int(v) for v in rng.integers(0, size, 2)) for _ in range(k)]
        out.append(BinRel(size, generate_subpower(alg, gens).tuples))
    return out


@dataclass
class LoopReport:
    relations: int = 0
    with_loop: int = 0
    checked: dict = field(default_factory=lambda: {"symmetric": 0, "closed_walk": 0, "walk_and_inverse": 0})
    vacuous: dict = field(default_factory=lambda: {"symmetric": 0, "closed_walk": 0, "walk_and_inverse": 0})
    violations: list = field(default_factory=list)
    stability_checked: int = 0
    stability_failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations and not self.stability_failures

    def to_json(self) -> dict:
        return {
            "relations": self.relations,
            "with_loop": self.with_loop,
            "hypothesis_met": self.checked,
            "vacuous": self.vacuous,
            "violations": self.violations,
            "stability_checked": self.stability_checked,
            "stability_failures": self.stability_failures,
        }


def verify_loop_theorems(alg: Algebra, relations: Iterable[BinRel] | None = None, *,
                         n_max: int = 4, powers: Sequence[int] = (1, 2, 3),
                         cache: CloneCache | None = None) -> LoopReport:
    """Check the three loop statements on every given (or every invariant) binary relation.

    For a relation without a loop:

    * symmetric and nonempty, absorbing equality            -> violation
    * containing a closed walk, absorbing equality          -> violation
    * with a walk of n-1 edges, n-absorbing equality, and
      some power in ``powers`` n-absorbing the inverse      -> violation

    Local absorption for some arity up to ``n_max`` is decided at
    ``n_max`` itself, since a witness for n also serves n+1 (ignore the
    extra argument).  Relations with a loop satisfy all three trivially.
    Every witness found is also checked to survive inversion and
    composition of both relations.
    """
    if not is_idempotent(alg):
        raise StructureError("the loop statements need an idempotent algebra")
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    cache = cache or CloneCache(alg)
    eq = BinRel.equality(alg.domain_size)
    report = LoopReport()
    memo: dict = {}

    def absorbs(r: BinRel, s: BinRel, n: int):
        key = (r.pairs, s.pairs, n)
        if key not in memo:
            memo[key] = cache.absorbs(r, s, n)
            if memo[key] is not None:
                stability(r, s, n)
        return memo[key]

    def stability(r: BinRel, s: BinRel, n: int) -> None:
        report.stability_checked += 1
        for name, r2, s2 in (("inverse", inverse(r), inverse(s)),
                             ("square", compose(r, r), compose(s, s))):
            if cache.absorbs(r2, s2, n) is None:
                report.stability_failures.append(
                    {"relation": sorted(r.pairs), "absorbed": sorted(s.pairs), "n": n, "via": name})

    for r in relations if relations is not None else invariant_binary_relations(alg):
        report.relations += 1
        if has_loop(r):
            report.with_loop += 1
            continue
        if not r.pairs:
            for key in report.vacuous:
                report.vacuous[key] += 1
            continue
        eq_term = absorbs(r, eq, n_max)
        for key, structural in (("symmetric", r.is_symmetric()),
                                ("closed_walk", find_closed_walk(r) is not None)):
            if structural and eq_term is not None:
                report.checked[key] += 1
                report.violations.append({"theorem": key, "relation": sorted(r.pairs),
                                          "term": str(eq_term)})
            else:
                report.vacuous[key] += 1
        hit = None
        for n in range(2, n_max + 1):
            if find_walk(r, n - 1) is None or absorbs(r, eq, n) is None:
                continue
            inv = inverse(r)
            for l in powers:
                if absorbs(power(r, l), inv, n) is not None:
                    hit = (n, l)
                    break
            if hit:
                break
        if hit:
            report.checked["walk_and_inverse"] += 1
            report.violations.append({"theorem": "walk_and_inverse", "relation": sorted(r.pairs),
                                      "n": hit[0], "l": hit[1]})
        else:
            report.vacuous["walk_and_inverse"] += 1
    return report
