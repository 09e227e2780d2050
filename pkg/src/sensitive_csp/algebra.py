"""Finite algebras given by operation tables, terms, and subpower closure.

The carrier of an algebra is always ``{0, ..., n-1}``.  Operation tables are
row-major: the last argument varies fastest, so the entry for ``f(a_1..a_r)``
sits at index ``sum(a_i * n**(r-i))``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import ResourceGuardError, StructureError


@dataclass(frozen=True)
class Operation:
    name: str
    arity: int
    table: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "table", tuple(int(v) for v in self.table))


@dataclass(frozen=True)
class Algebra:
    domain_size: int
    operations: tuple[Operation, ...]
    _tables: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        n = self.domain_size
        if n < 1:
            raise StructureError("domain size must be positive")
        ops = tuple(self.operations)
        object.__setattr__(self, "operations", ops)
        names = [op.name for op in ops]
        if len(set(names)) != len(names):
            raise StructureError(f"duplicate operation names in {names}")
        tables = {}
        for op in ops:
            if op.arity < 1:
                raise StructureError(f"operation {op.name!r} must have positive arity")
            if len(op.table) != n**op.arity:
                raise StructureError(
                    f"operation {op.name!r}: table has {len(op.table)} entries, "
                    f"expected {n**op.arity}")
            if any(v < 0 or v >= n for v in op.table):
                raise StructureError(f"operation {op.name!r}: entry outside carrier")
            tables[op.name] = np.asarray(op.table, dtype=np.int64)
        object.__setattr__(self, "_tables", tables)

    @classmethod
    def from_functions(cls, domain_size: int, ops: Mapping[str, tuple]) -> "Algebra":
        """Build an algebra from ``{name: (arity, callable)}``."""
        built = []
        for name, (arity, fn) in ops.items():
            table = [fn(*args) for args in itertools.product(range(domain_size), repeat=arity)]
            built.append(Operation(name, arity, tuple(table)))
        return cls(domain_size, tuple(built))

    def operation(self, name: str) -> Operation:
        for op in self.operations:
            if op.name == name:
                return op
        raise StructureError(f"unknown operation {name!r}")

    def table(self, name: str) -> np.ndarray:
        try:
            return self._tables[name]
        except KeyError:
            raise StructureError(f"unknown operation {name!r}") from None

    def apply(self, name: str, args: Sequence[int]) -> int:
        op = self.operation(name)
        if len(args) != op.arity:
            raise StructureError(f"{name!r} takes {op.arity} arguments, got {len(args)}")
        index = 0
        for a in args:
            if not 0 <= a < self.domain_size:
                raise StructureError(f"argument {a} outside carrier")
            index = index * self.domain_size + a
        return op.table[index]

    def power(self, m: int) -> "Algebra":
        """The algebra A^m with elements encoded in base n (first coordinate most significant)."""
        n = self.domain_size
        size = n**m

        def decode(v: int) -> tuple[int, ...]:
            digits = []
            for _ in range(m):
                digits.append(v % n)
                v //= n
            return tuple(reversed(digits))

        codes = [decode(v) for v in range(size)]
        ops = []
        for op in self.operations:
            table = []
            for args in itertools.product(range(size), repeat=op.arity):
                coords = [codes[a] for a in args]
                out = 0
                for j in range(m):
                    out = out * n + self.apply(op.name, [c[j] for c in coords])
                table.append(out)
            ops.append(Operation(op.name, op.arity, tuple(table)))
        return Algebra(size, tuple(ops))

    def square(self) -> "Algebra":
        return self.power(2)

    def to_json(self) -> dict:
        return {
            "domain": self.domain_size,
            "operations": [
                {"name": op.name, "arity": op.arity, "table": list(op.table)}
                for op in self.operations
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Algebra":
        try:
            ops = tuple(Operation(str(o["name"]), int(o["arity"]), tuple(o["table"]))
                        for o in data["operations"])
            return cls(int(data["domain"]), ops)
        except (KeyError, TypeError) as exc:
            raise StructureError(f"malformed algebra: {exc}") from exc


def load_algebra(path) -> Algebra:
    with open(path) as fh:
        return Algebra.from_json(json.load(fh))


def save_algebra(alg: Algebra, path) -> None:
    with open(path, "w") as fh:
        json.dump(alg.to_json(), fh, indent=1)
        fh.write("\n")


# ---------------------------------------------------------------- terms


@dataclass(frozen=True)
class Leaf:
    index: int

    def __str__(self) -> str:
        return f"x{self.index}"


@dataclass(frozen=True)
class Node:
    op: str
    children: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "children", tuple(self.children))

    def __str__(self) -> str:
        return f"{self.op}({','.join(str(c) for c in self.children)})"


Term = Union[Leaf, Node]


def term_arity(t: Term) -> int:
    """One more than the largest variable index occurring in ``t``."""
    seen: dict[int, int] = {}

    def go(s: Term) -> int:
        key = id(s)
        if key not in seen:
            if isinstance(s, Leaf):
                seen[key] = s.index + 1
            else:
                seen[key] = max((go(c) for c in s.children), default=0)
        return seen[key]

    return go(t)


def term_to_json(t: Term):
    if isinstance(t, Leaf):
        return t.index
    return [t.op] + [term_to_json(c) for c in t.children]


def term_from_json(data) -> Term:
    if isinstance(data, bool):
        raise StructureError("booleans are not terms")
    if isinstance(data, int):
        if data < 0:
            raise StructureError("variable index must be non-negative")
        return Leaf(data)
    if isinstance(data, list) and data and isinstance(data[0], str):
        return Node(data[0], tuple(term_from_json(c) for c in data[1:]))
    raise StructureError(f"malformed term {data!r}")


def eval_term(alg: Algebra, t: Term, args: Sequence[int]) -> int:
    """Evaluate ``t`` at ``args``; shared subterms are evaluated once."""
    cache: dict[int, int] = {}

    def go(s: Term) -> int:
        key = id(s)
        if key in cache:
            return cache[key]
        if isinstance(s, Leaf):
            if s.index >= len(args):
                raise StructureError(f"variable x{s.index} has no argument")
            value = args[s.index]
        else:
            op = alg.operation(s.op)
            if len(s.children) != op.arity:
                raise StructureError(
                    f"{s.op!r} has arity {op.arity} but got {len(s.children)} children")
            value = alg.apply(s.op, [go(c) for c in s.children])
        cache[key] = value
        return value

    for a in args:
        if not 0 <= a < alg.domain_size:
            raise StructureError(f"argument {a} outside carrier")
    return go(t)


def eval_term_on_tuples(alg: Algebra, t: Term, tuples: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Apply ``t`` coordinate-wise to a list of equal-length tuples."""
    length = len(tuples[0])
    return tuple(eval_term(alg, t, [tup[c] for tup in tuples]) for c in range(length))


def is_idempotent(alg: Algebra) -> bool:
    n = alg.domain_size
    return all(alg.apply(op.name, [a] * op.arity) == a
               for op in alg.operations for a in range(n))


def is_nu(alg: Algebra, t: Term, arity: int) -> bool:
    """True iff ``t`` is a near-unanimity operation of the given arity."""
    if arity < 3 or term_arity(t) > arity:
        return False
    n = alg.domain_size
    for a in range(n):
        for b in range(n):
            for i in range(arity):
                args = [a] * arity
                args[i] = b
                if eval_term(alg, t, args) != a:
                    return False
    return True


# ---------------------------------------------------------------- subpowers


@dataclass(frozen=True)
class Subpower:
    coordinate_domains: tuple[int, ...]
    tuples: frozenset
    generators: tuple = ()
    witnesses: Mapping | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "coordinate_domains", tuple(self.coordinate_domains))
        object.__setattr__(self, "tuples", frozenset(tuple(t) for t in self.tuples))
        r = len(self.coordinate_domains)
        for tup in self.tuples:
            if len(tup) != r:
                raise StructureError(f"tuple {tup} does not have length {r}")
            if any(not 0 <= v < d for v, d in zip(tup, self.coordinate_domains)):
                raise StructureError(f"tuple {tup} leaves its coordinate domains")

    @classmethod
    def over(cls, n: int, tuples: Iterable[Sequence[int]], arity: int | None = None) -> "Subpower":
        tuples = [tuple(t) for t in tuples]
        if arity is None:
            if not tuples:
                raise StructureError("arity needed for an empty relation")
            arity = len(tuples[0])
        return cls((n,) * arity, frozenset(tuples))

    @property
    def arity(self) -> int:
        return len(self.coordinate_domains)

    def __len__(self) -> int:
        return len(self.tuples)

    def __contains__(self, tup) -> bool:
        return tuple(tup) in self.tuples

    def __iter__(self):
        return iter(self.sorted_tuples())

    def sorted_tuples(self) -> list[tuple[int, ...]]:
        return sorted(self.tuples)

    def project(self, coords: Sequence[int]) -> frozenset:
        return frozenset(tuple(t[c] for c in coords) for t in self.tuples)


class _RowKeys:
    """Hashable keys for rows; packed integers when they fit, raw bytes otherwise."""

    def __init__(self, n: int, length: int):
        self.packed = length * max(1, (n - 1).bit_length()) <= 62
        if self.packed:
            self.weights = n ** np.arange(length, dtype=np.int64)

    def __call__(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        if self.packed:
            return rows @ self.weights
        rows = np.ascontiguousarray(rows)
        return rows.view(np.dtype((np.void, 8 * rows.shape[1]))).ravel()

    @staticmethod
    def scalar(key):
        return int(key) if isinstance(key, (np.integer, int)) else key.tobytes()


def _is_symmetric(table: np.ndarray, n: int, r: int) -> bool:
    if r < 2:
        return False
    cube = table.reshape((n,) * r)
    return all(np.array_equal(cube, np.swapaxes(cube, j, j + 1)) for j in range(r - 1))


def _argument_blocks(r: int, lo: int, hi: int, chunk: int, symmetric: bool):
    """Index tuples over ``[0, hi)`` using at least one index from ``[lo, hi)``.

    Yields lists of ``r`` index arrays.  For symmetric operations only
    nondecreasing tuples are produced.
    """
    if symmetric:
        # sorted tuples whose largest entry is new
        for last in range(lo, hi):
            combos = np.array(list(itertools.combinations_with_replacement(range(last + 1), r - 1)),
                              dtype=np.int64).reshape(-1, r - 1)
            for start in range(0, len(combos), chunk):
                block = combos[start:start + chunk]
                yield [block[:, j] for j in range(r - 1)] + [np.full(len(block), last, dtype=np.int64)]
        return
    for p in range(r):
        ranges = [(0, lo)] * p + [(lo, hi)] + [(0, hi)] * (r - p - 1)
        sizes = [b - a for a, b in ranges]
        total = int(np.prod(sizes, dtype=object))
        for start in range(0, total, chunk):
            stop = min(total, start + chunk)
            flat = np.arange(start, stop, dtype=np.int64)
            digits = []
            for size in reversed(sizes):
                digits.append(flat % size)
                flat = flat // size
            digits.reverse()
            yield [d + a for d, (a, _) in zip(digits, ranges)]


def _closure(alg: Algebra, generators: np.ndarray, *, target: tuple | None = None,
             accept=None, max_size: int | None = None, chunk: int = 1 << 18):
    """Fixed-point closure of the rows of ``generators`` under ``alg``.

    Returns ``(rows, derivations, hit)`` where ``derivations[i]`` is either
    ``("gen", j)`` or ``(op_name, arg_indices)`` recording the first
    derivation found in breadth-first order, and ``hit`` is the index of
    ``target`` if it was reached (the search stops there).  ``accept`` is
    an optional predicate on rows that stops the search the same way.
    """
    n = alg.domain_size
    gens = np.asarray(generators, dtype=np.int64)
    if gens.ndim != 2 or gens.shape[0] == 0:
        raise StructureError("need a nonempty list of equal-length generators")
    if gens.size and (gens.min() < 0 or gens.max() >= n):
        raise StructureError("generator entry outside carrier")
    length = gens.shape[1]
    keyer = _RowKeys(n, length)
    target_key = None
    if target is not None:
        target_key = keyer.scalar(keyer(np.asarray(target, dtype=np.int64).reshape(1, -1))[0])

    index: dict = {}
    rows: list[np.ndarray] = []
    derivations: list[tuple] = []
    known = np.empty(0, dtype=np.int64)

    def add(row: np.ndarray, key, how: tuple):
        index[key] = len(rows)
        rows.append(row)
        derivations.append(how)
        if max_size is not None and len(rows) > max_size:
            raise ResourceGuardError(f"closure exceeded {max_size} elements", len(rows))
        return key == target_key or (accept is not None and bool(accept(row)))

    keys = keyer(gens)
    for j in range(gens.shape[0]):
        key = keyer.scalar(keys[j])
        if key not in index and add(gens[j], key, ("gen", j)):
            return np.array(rows), derivations, index[key]

    lo, hi = 0, len(rows)
    while lo < hi:
        current = np.array(rows)
        if keyer.packed:
            known = np.fromiter(index.keys(), dtype=np.int64, count=len(index))
        for op in alg.operations:
            table = alg.table(op.name)
            r = op.arity
            weights = n ** np.arange(r - 1, -1, -1, dtype=np.int64)
            for digits in _argument_blocks(r, lo, hi, chunk, _is_symmetric(table, n, r)):
                idx = np.zeros((len(digits[0]), length), dtype=np.int64)
                for j in range(r):
                    idx += current[digits[j]] * weights[j]
                out = table[idx]
                out_keys = keyer(out)
                if keyer.packed:
                    fresh = ~np.isin(out_keys, known)
                    if not fresh.any():
                        continue
                    positions = np.flatnonzero(fresh)
                    _, first = np.unique(out_keys[positions], return_index=True)
                    candidates = positions[np.sort(first)]
                else:
                    _, first = np.unique(out_keys, return_index=True)
                    candidates = np.sort(first)
                for pos in candidates:
                    key = keyer.scalar(out_keys[pos])
                    if key in index:
                        continue
                    args = tuple(int(digits[j][pos]) for j in range(r))
                    if add(out[pos], key, (op.name, args)):
                        return np.array(rows), derivations, index[key]
                if keyer.packed:
                    known = np.fromiter(index.keys(), dtype=np.int64, count=len(index))
        lo, hi = hi, len(rows)
    return np.array(rows), derivations, None


def _build_terms(derivations: Sequence[tuple], wanted: Iterable[int]) -> dict[int, Term]:
    terms: dict[int, Term] = {}

    def go(i: int) -> Term:
        stack = [i]
        while stack:
            j = stack[-1]
            if j in terms:
                stack.pop()
                continue
            how = derivations[j]
            if how[0] == "gen":
                terms[j] = Leaf(how[1])
                stack.pop()
                continue
            missing = [a for a in how[1] if a not in terms]
            if missing:
                stack.extend(missing)
                continue
            terms[j] = Node(how[0], tuple(terms[a] for a in how[1]))
            stack.pop()
        return terms[i]

    for i in wanted:
        go(i)
    return terms


def generate_subpower(alg: Algebra, generators: Sequence[Sequence[int]],
                      with_witnesses: bool = False, max_size: int | None = None) -> Subpower:
    """Subuniverse of A^r generated by ``generators``.

    With ``with_witnesses`` every tuple maps to a term over the generator
    indices that produces it.
    """
    gens = [tuple(int(v) for v in g) for g in generators]
    if not gens:
        raise StructureError("generators must be nonempty")
    if len({len(g) for g in gens}) != 1:
        raise StructureError("generators must have equal length")
    rows, derivations, _ = _closure(alg, np.array(gens), max_size=max_size)
    tuples = [tuple(int(v) for v in row) for row in rows]
    witnesses = None
    if with_witnesses:
        terms = _build_terms(derivations, range(len(rows)))
        witnesses = {tuples[i]: terms[i] for i in range(len(rows))}
    return Subpower((alg.domain_size,) * len(gens[0]), frozenset(tuples),
                    tuple(gens), witnesses)


def is_invariant(alg: Algebra, tuples: Iterable[Sequence[int]]) -> bool:
    """True iff the relation is closed under every basic operation."""
    rel = {tuple(t) for t in tuples}
    if not rel:
        return True
    rows = list(rel)
    for op in alg.operations:
        for args in itertools.product(rows, repeat=op.arity):
            out = tuple(alg.apply(op.name, col) for col in zip(*args))
            if out not in rel:
                return False
    return True


def nu_rows(n: int, m: int) -> tuple[list[tuple[int, ...]], list[int]]:
    """Argument rows ``(a,..,b,..,a)`` of the near-unanimity identities and their required values."""
    rows, values = [], []
    seen = set()
    for a in range(n):
        for b in range(n):
            for i in range(m):
                row = [a] * m
                row[i] = b
                row = tuple(row)
                if row not in seen:
                    seen.add(row)
                    rows.append(row)
                    values.append(a)
    return rows, values


def find_nu_term(alg: Algebra, m: int, max_size: int | None = None) -> Term | None:
    """Search the clone for an ``m``-ary near-unanimity term.

    Each near-unanimity identity instance ``t(a,..,b,..,a) = a`` becomes one
    coordinate; the projections become generators and the identity values
    the target tuple.  The clone's ``m``-ary part restricted to these
    coordinates is the generated subpower, so the search is complete.
    """
    if m < 3:
        raise StructureError("near-unanimity arity must be at least 3")
    rows, values = nu_rows(alg.domain_size, m)
    gens = np.array(rows, dtype=np.int64).T
    _, derivations, hit = _closure(alg, gens, target=tuple(values), max_size=max_size)
    if hit is None:
        return None
    return _build_terms(derivations, [hit])[hit]


def clone_part(alg: Algebra, m: int, max_size: int | None = None) -> Subpower:
    """All ``m``-ary term operations, as tables over the rows of A^m, with witnesses."""
    n = alg.domain_size
    rows = list(itertools.product(range(n), repeat=m))
    gens = [tuple(row[j] for row in rows) for j in range(m)]
    return generate_subpower(alg, gens, with_witnesses=True, max_size=max_size)


def star_closure(rel: Subpower, k: int) -> Subpower:
    """All tuples whose every ``k``-coordinate projection lies in the matching projection of ``rel``."""
    r = rel.arity
    if not 0 <= k < r:
        raise StructureError(f"projection size {k} must be below arity {r}")
    subsets = list(itertools.combinations(range(r), k))
    projections = {s: rel.project(s) for s in subsets}
    # a projection check fires once the highest coordinate of its subset is placed
    by_last: dict[int, list] = {c: [] for c in range(r)}
    for s in subsets:
        if s:
            by_last[s[-1]].append(s)
    empty_ok = () not in projections or bool(projections[()])

    out = []
    prefix: list[int] = []

    def extend(c: int) -> None:
        if c == r:
            out.append(tuple(prefix))
            return
        for v in range(rel.coordinate_domains[c]):
            prefix.append(v)
            if all(tuple(prefix[i] for i in s) in projections[s] for s in by_last[c]):
                extend(c + 1)
            prefix.pop()

    if empty_ok:
        extend(0)
    return Subpower(rel.coordinate_domains, frozenset(out))


def determined_by_projections(rel: Subpower, k: int) -> bool:
    return star_closure(rel, k).tuples == rel.tuples
