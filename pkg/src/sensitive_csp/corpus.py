"""Bundled algebras and instances.

The JSON files under ``corpus/`` are produced by the builders below
(``write_corpus``); a test checks that they stay in sync.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .algebra import Algebra, Subpower, generate_subpower
from .consistency import enforce_kl
from .constructions import build_prop_sens, build_prop_sw
from .instance import Instance, random_instance


def maj_algebra() -> Algebra:
    return Algebra.from_functions(2, {"maj": (3, lambda a, b, c: int(a + b + c >= 2))})


def min_algebra() -> Algebra:
    return Algebra.from_functions(2, {"min": (2, min)})


def threshold24_algebra() -> Algebra:
    """Two-element algebra whose 4-ary operation is 1 iff at least two arguments are 1."""
    return Algebra.from_functions(2, {"th": (4, lambda *a: int(sum(a) >= 2))})


def second_of_four_algebra(n: int = 3) -> Algebra:
    """On {0..n-1}: the second smallest of four arguments, a 4-ary near-unanimity operation."""
    return Algebra.from_functions(n, {"q": (4, lambda *a: sorted(a)[1])})


def median_chain_algebra(n: int = 3) -> Algebra:
    return Algebra.from_functions(n, {"med": (3, lambda *a: sorted(a)[1])})


def slupecki_algebra(n: int = 3) -> Algebra:
    """All unary operations on {0..n-1} plus one binary non-surjective operation."""
    ops = {}
    for i, images in enumerate(itertools.product(range(n), repeat=n)):
        ops[f"u{i}"] = (1, lambda a, images=images: images[a])
    ops["neq"] = (2, lambda a, b: int(a != b))
    return Algebra.from_functions(n, ops)


NE2 = frozenset({(0, 1), (1, 0)})


def triangle() -> Instance:
    """Three variables over {0,1}, pairwise different."""
    return Instance.build({v: 2 for v in "abc"}, [(s, NE2) for s in ("ab", "bc", "ac")])


def four_cycle() -> Instance:
    """Four variables over {0,1}, different along a 4-cycle."""
    return Instance.build({v: 2 for v in "abcd"}, [(s, NE2) for s in ("ab", "bc", "cd", "ad")])


def min_not_starred() -> Subpower:
    """R <= {0,1}^4 under min generated by the four tuples with one 0."""
    gens = [tuple(0 if j == i else 1 for j in range(4)) for i in range(4)]
    return generate_subpower(min_algebra(), gens)


def threshold_unit_vectors() -> Subpower:
    """R <= {0,1}^3 under the threshold operation generated by the unit vectors."""
    gens = [tuple(1 if j == i else 0 for j in range(3)) for i in range(3)]
    return generate_subpower(threshold24_algebra(), gens)


def maj_relation() -> Subpower:
    return generate_subpower(maj_algebra(), [(0, 0, 1, 1), (0, 1, 0, 1), (1, 1, 1, 0)])


def not_strict_threshold_square() -> Instance:
    """A random enforced (2,3)-instance over the square of the threshold algebra
    in which some partial solution does not extend."""
    inst = random_instance(threshold24_algebra().square(), 4, 2, 29, planted=3, max_generators=2)
    return enforce_kl(inst, 2, 3).instance


@dataclass(frozen=True)
class Entry:
    builder: object
    kind: str
    k: int | None = None
    kl_instance: bool = False
    note: str = ""


ALGEBRAS = {
    "maj": Entry(maj_algebra, "algebra", note="majority on {0,1}"),
    "min-horn": Entry(min_algebra, "algebra", note="binary min on {0,1}"),
    "threshold24": Entry(threshold24_algebra, "algebra", note="4-ary 2-threshold on {0,1}"),
    "second-of-four3": Entry(second_of_four_algebra, "algebra", note="4-ary near-unanimity on {0,1,2}"),
    "median3": Entry(median_chain_algebra, "algebra", note="median on the 3-chain"),
    "slupecki3": Entry(slupecki_algebra, "algebra", note="unary maps and a non-surjective map on {0,1,2}"),
}

INSTANCES = {
    "triangle": Entry(triangle, "instance", 2, False, "odd cycle, no 2-colouring"),
    "four-cycle": Entry(four_cycle, "instance", 2, False, "even cycle, two colourings"),
    "four-cycle-23": Entry(lambda: enforce_kl(four_cycle(), 2, 3).instance, "instance", 2, True,
                           "the 4-cycle after (2,3)-consistency"),
    "gadget-sens-min": Entry(lambda: build_prop_sens(min_not_starred(), 2), "instance", 2, True,
                             "(2,3)-instance over min, not sensitive"),
    "gadget-sens-maj": Entry(lambda: build_prop_sens(maj_relation(), 2), "instance", 2, True,
                             "(2,3)-instance over maj squared"),
    "gadget-sw-threshold": Entry(lambda: build_prop_sw(threshold_unit_vectors(), 2), "instance", 2, True,
                                 "sensitive, without the extension property"),
    "threshold-square-not-strict": Entry(not_strict_threshold_square, "instance", 2, True,
                                         "sensitive, without the extension property"),
}


def corpus_dir() -> Path:
    return Path(str(resources.files("sensitive_csp") / "corpus"))


def bundled_corpus() -> dict[str, Path]:
    """Name to file path for every bundled algebra and instance."""
    root = corpus_dir()
    names = list(ALGEBRAS) + list(INSTANCES)
    return {name: root / f"{name}.json" for name in names}


def load(name: str):
    path = bundled_corpus()[name]
    with open(path) as fh:
        data = json.load(fh)
    return Algebra.from_json(data) if name in ALGEBRAS else Instance.from_json(data)


def build(name: str):
    entry = ALGEBRAS.get(name) or INSTANCES[name]
    return entry.builder()


def write_corpus(root: Path | None = None) -> None:
    root = Path(root) if root is not None else corpus_dir()
    root.mkdir(parents=True, exist_ok=True)
    for name in list(ALGEBRAS) + list(INSTANCES):
        with open(root / f"{name}.json", "w") as fh:
            json.dump(build(name).to_json(), fh, indent=1)
            fh.write("\n")
