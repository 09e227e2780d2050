"""Seeded experiment runners shared by the command line and the acceptance tests."""

from __future__ import annotations

import itertools
import subprocess
import time
from pathlib import Path

import numpy as np

from . import __version__
from .algebra import Algebra, determined_by_projections, generate_subpower
from .consistency import enforce_kl
from .instance import Instance, random_instance, small_arity_closure
from .patterns import Quality
from .solver import extends_to_solution, has_extension_property, is_sensitive


def build_tag() -> str:
    """``git describe`` of the source tree when available, else the package version."""
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"],
                             cwd=Path(__file__).resolve().parent, capture_output=True,
                             text=True, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def trial_seeds(seed: int, trials: int) -> list[np.random.SeedSequence]:
    """Independent child seeds, one per trial."""
    return np.random.SeedSequence(seed).spawn(trials)


def _trial_instance(template: Algebra, k: int, child: np.random.SeedSequence, min_vars: int,
                    max_vars: int, planted: int, max_generators: int) -> Instance:
    rng = np.random.default_rng(child)
    n_vars = int(rng.integers(min_vars, max_vars + 1))
    return random_instance(template, n_vars, k, child, planted=planted, max_generators=max_generators)


def _instance_trials(alg: Algebra, k: int, trials: int, seed: int, max_vars: int, square: bool,
                     planted: int, max_generators: int, check, name: str) -> dict:
    template = alg.square() if square else alg
    start = time.perf_counter()
    counts = {"trials": trials, "rejected": 0, "checked": 0, "holds": 0, "fails": 0}
    counterexamples = []
    for index, child in enumerate(trial_seeds(seed, trials)):
        inst = _trial_instance(template, k, child, k + 1, max_vars, planted, max_generators)
        result = enforce_kl(inst, k, k + 1)
        if result.rejected:
            counts["rejected"] += 1
            continue
        counts["checked"] += 1
        outcome = check(result.instance)
        if outcome.holds:
            counts["holds"] += 1
        else:
            counts["fails"] += 1
            counterexamples.append({"trial": index, "witness": _jsonable(outcome.witness),
                                    "instance": result.instance.to_json()})
    return {
        "experiment": name,
        "seed": seed,
        "k": k,
        "squared": square,
        "max_vars": max_vars,
        "planted": planted,
        "max_generators": max_generators,
        **counts,
        "counterexamples": counterexamples,
        "seconds": round(time.perf_counter() - start, 3),
        "build": build_tag(),
    }


def sensitivity_experiment(alg: Algebra, k: int = 2, trials: int = 200, seed: int = 7, *,
                           max_vars: int = 6, square: bool = True, planted: int = 3,
                           max_generators: int = 2) -> dict:
    """Random instances over A^2 (or A), made (k,k+1)-consistent, then tested for sensitivity."""
    return _instance_trials(alg, k, trials, seed, max_vars, square, planted, max_generators,
                            is_sensitive, "sensitivity")


def extension_experiment(alg: Algebra, k: int = 2, trials: int = 200, seed: int = 7, *,
                         max_vars: int = 6, square: bool = True, planted: int = 3,
                         max_generators: int = 2) -> dict:
    """Like the sensitivity experiment, testing that every partial solution extends."""
    return _instance_trials(alg, k, trials, seed, max_vars, square, planted, max_generators,
                            has_extension_property, "extension")


def baker_pixley_experiment(alg: Algebra, arity: int, k: int, seeds: int = 500, seed: int = 0, *,
                            max_generators: int = 4) -> dict:
    """Random subpowers of A^arity: how many are determined by their k-ary projections?"""
    start = time.perf_counter()
    n = alg.domain_size
    violations = []
    distinct = set()
    for index, child in enumerate(trial_seeds(seed, seeds)):
        rng = np.random.default_rng(child)
        count = int(rng.integers(1, max_generators + 1))
        gens = [tuple(int(a) for a in rng.integers(0, n, size=arity)) for _ in range(count)]
        rel = generate_subpower(alg, gens)
        distinct.add(rel.tuples)
        if not determined_by_projections(rel, k):
            violations.append({"trial": index, "generators": [list(g) for g in gens]})
    return {
        "experiment": "baker-pixley",
        "seed": seed,
        "arity": arity,
        "k": k,
        "trials": seeds,
        "distinct_relations": len(distinct),
        "violations": len(violations),
        "examples": violations[:5],
        "seconds": round(time.perf_counter() - start, 3),
        "build": build_tag(),
    }


def all_subpowers(alg: Algebra, arity: int, max_generators: int = 3) -> list:
    """Distinct subpowers of A^arity generated by at most ``max_generators`` tuples."""
    points = list(itertools.product(range(alg.domain_size), repeat=arity))
    seen = {}
    for r in range(1, max_generators + 1):
        for gens in itertools.combinations(points, r):
            rel = generate_subpower(alg, gens)
            seen.setdefault(rel.tuples, rel)
    return [seen[key] for key in sorted(seen, key=lambda t: (len(t), sorted(t)))]


def weak_instance(alg: Algebra, n_vars: int, k: int, seed, **kwargs) -> Instance:
    """A random k-uniform instance with full constraints on every smaller set of variables."""
    inst = random_instance(alg, n_vars, k, seed, **kwargs)
    extra = {}
    for size in range(1, k):
        for scope in itertools.combinations(sorted(inst.variables), size):
            extra[scope] = inst.full_relation(scope)
    return inst.with_constraints(extra)


def least_sufficient_quality(inst: Instance, k: int, d_max: int = 4) -> int | None:
    """Least d <= d_max such that every evaluation on at most k variables of quality d extends."""
    q = Quality(inst, k)
    names = sorted(inst.variables)
    evaluations = []
    for size in range(1, k + 1):
        for scope in itertools.combinations(names, size):
            for values in itertools.product(*(range(inst.domains[v]) for v in scope)):
                evaluations.append(dict(zip(scope, values)))
    extends = [extends_to_solution(inst, ev) for ev in evaluations]
    for d in range(1, d_max + 1):
        if all(ok or not q(ev, d) for ev, ok in zip(evaluations, extends)):
            return d
    return None


def tree_realizability_failures(inst: Instance, k: int, depth: int) -> list:
    """Satisfied evaluations on at most k variables of an enforced instance lacking quality ``depth``."""
    closed = small_arity_closure(inst, k)
    q = Quality(closed, k)
    bad = []
    names = sorted(closed.variables)
    for size in range(1, k + 1):
        for scope in itertools.combinations(names, size):
            for values in itertools.product(*(range(closed.domains[v]) for v in scope)):
                ev = dict(zip(scope, values))
                if q(ev, 1) and not q(ev, depth):
                    bad.append(ev)
    return bad


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj
