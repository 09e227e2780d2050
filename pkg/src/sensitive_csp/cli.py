"""Command line entry point.

Exit codes: 0 property holds or task done, 1 property fails (a witness is
reported), 2 usage or input error, 3 a resource guard was hit (unknown).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import corpus
from .absorption import CloneCache, sample_binary_relations, verify_loop_theorems
from .algebra import Algebra, Subpower, find_nu_term, is_nu, term_to_json
from .consistency import enforce_kl
from .constructions import build_prop_sens, build_prop_sw
from .errors import ResourceGuardError, StructureError
from .experiments import (baker_pixley_experiment, build_tag, extension_experiment,
                          sensitivity_experiment)
from .instance import Instance
from .patterns import Quality
from .solver import enumerate_solutions, has_extension_property, is_sensitive

EXIT_OK, EXIT_FAILS, EXIT_USAGE, EXIT_GUARD = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _read_json(path: str):
    """Parse a JSON file, or a bundled corpus entry when ``path`` names one."""
    p = Path(path)
    if not p.exists():
        bundled = corpus.bundled_corpus()
        if path in bundled:
            p = bundled[path]
        else:
            raise UsageError(f"{path}: no such file or bundled corpus entry")
    text = p.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}")


def _load_algebra(path: str) -> Algebra:
    return Algebra.from_json(_read_json(path))


def _load_instance(path: str) -> Instance:
    return Instance.from_json(_read_json(path))


def _load_relation(path: str) -> Subpower:
    data = _read_json(path)
    try:
        tuples = [tuple(int(a) for a in t) for t in data["tuples"]]
        if "domains" in data:
            domains = [int(d) for d in data["domains"]]
        else:
            domains = [int(data["domain"])] * int(data.get("arity", len(tuples[0])))
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise UsageError(f"{path}: malformed relation: {exc}")
    return Subpower(tuple(domains), frozenset(tuples))


def _emit(report: dict, out: str | None = None) -> None:
    text = json.dumps(report, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    print(text)


def _write_instance(inst: Instance, path: str | None) -> None:
    if path:
        Path(path).write_text(json.dumps(inst.to_json(), indent=1) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


# ---------------------------------------------------------------- subcommands


def cmd_enforce(args) -> int:
    inst = _load_instance(args.input)
    result = enforce_kl(inst, args.k, args.l, mode=args.mode)
    report = {"status": result.status.value, "k": args.k, "l": args.l, "mode": args.mode}
    if args.stats:
        report.update(rounds=result.rounds, removed=result.removed,
                      tuples=sum(len(r) for r in result.instance.constraints.values()))
    _write_instance(result.instance, args.out)
    report["build"] = build_tag()
    _emit(report)
    return EXIT_OK if not result.rejected else EXIT_FAILS


def cmd_check(args) -> int:
    inst = _load_instance(args.input)
    if args.property == "solve":
        sols = enumerate_solutions(inst, args.limit, max_nodes=args.max_nodes)
        report = {"property": "solve", "holds": bool(sols), "solutions": sols,
                  "limit": args.limit}
        _emit(report)
        return EXIT_OK if sols else EXIT_FAILS
    if args.property == "sensitive":
        outcome = is_sensitive(inst, max_nodes=args.max_nodes)
    else:
        outcome = has_extension_property(inst, max_nodes=args.max_nodes,
                                         max_partials=args.max_partials)
    report = {"property": args.property, "holds": outcome.holds,
              "nodes_explored": outcome.nodes_explored}
    if not outcome.holds:
        report["witness"] = _jsonable(outcome.witness)
    report["guards"] = {"max_nodes": args.max_nodes, "max_partials": args.max_partials}
    _emit(report)
    return EXIT_OK if outcome.holds else EXIT_FAILS


def cmd_find_nu(args) -> int:
    alg = _load_algebra(args.alg)
    term = find_nu_term(alg, args.arity, max_size=args.max_size)
    report = {"arity": args.arity, "found": term is not None, "guards": {"max_size": args.max_size}}
    if term is not None:
        if not is_nu(alg, term, args.arity):
            raise RuntimeError("search returned a term that is not near-unanimity")
        report.update(term=str(term), json=term_to_json(term))
    _emit(report)
    return EXIT_OK if term is not None else EXIT_FAILS


def cmd_gadget(args) -> int:
    rel = _load_relation(args.relation)
    build = build_prop_sw if args.kind == "sw" else build_prop_sens
    inst = build(rel, args.k)
    _write_instance(inst, args.out)
    _emit({"gadget": args.kind, "k": args.k, "variables": list(inst.variables),
           "domains": inst.domains, "constraints": len(inst.constraints)})
    return EXIT_OK


def cmd_loop(args) -> int:
    alg = _load_algebra(args.alg)
    if alg.domain_size > args.max_domain:
        raise UsageError(f"carrier of size {alg.domain_size} exceeds --max-domain {args.max_domain}")
    cache = CloneCache(alg, max_size=args.max_size)
    relations = None
    if args.sample:
        relations = sample_binary_relations(alg, args.sample, args.seed)
    report = verify_loop_theorems(alg, relations, n_max=args.n, cache=cache).to_json()
    report.update(seed=args.seed, sample=args.sample, n=args.n, build=build_tag())
    _emit(report, args.report)
    return EXIT_OK if not report["violations"] and not report["stability_failures"] else EXIT_FAILS


def cmd_quality(args) -> int:
    inst = _load_instance(args.input)
    names = [v for v in args.vars.split(",") if v]
    values = [int(v) for v in args.values.split(",") if v]
    if len(names) != len(values):
        raise UsageError("--vars and --values differ in length")
    k = args.k or inst.max_arity()
    q = Quality(inst, k)
    evaluation = dict(zip(names, values))
    holds = q(evaluation, args.d)
    _emit({"evaluation": evaluation, "d": args.d, "k": k, "holds": holds,
           "level": q.level(evaluation, args.d)})
    return EXIT_OK if holds else EXIT_FAILS


def cmd_experiment(args) -> int:
    alg = _load_algebra(args.alg)
    if args.kind == "baker-pixley":
        arity = args.arity or args.k + 1
        report = baker_pixley_experiment(alg, arity, args.k, args.trials, args.seed,
                                         max_generators=args.max_generators)
        _emit(report, args.report)
        return EXIT_OK
    run = sensitivity_experiment if args.kind == "sensitivity" else extension_experiment
    report = run(alg, args.k, args.trials, args.seed, max_vars=args.max_vars,
                 square=not args.no_square)
    _emit(report, args.report)
    return EXIT_OK if report["fails"] == 0 else EXIT_FAILS


def cmd_corpus(args) -> int:
    entries = {**corpus.ALGEBRAS, **corpus.INSTANCES}
    paths = corpus.bundled_corpus()
    _emit({name: {"path": str(paths[name]), "kind": e.kind, "note": e.note}
           for name, e in entries.items()})
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sensitive-csp", description=__doc__.splitlines()[0])
    parser.add_argument("--threads", type=int, default=1,
                        help="accepted for compatibility; work runs in one thread")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enforce", help="run (k,l)-consistency")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    p.add_argument("--stats", action="store_true")
    p.add_argument("--mode", choices=["jacobi", "gauss-seidel"], default="jacobi")
    p.set_defaults(func=cmd_enforce)

    p = sub.add_parser("check", help="test sensitivity, the extension property, or solve")
    p.add_argument("property", choices=["sensitive", "extension", "solve"])
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--limit", type=int)
    p.add_argument("--max-nodes", type=int)
    p.add_argument("--max-partials", type=int, default=1_000_000)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("find-nu", help="search for a near-unanimity term")
    p.add_argument("--alg", required=True)
    p.add_argument("--arity", type=int, required=True)
    p.add_argument("--max-size", type=int)
    p.set_defaults(func=cmd_find_nu)

    p = sub.add_parser("gadget", help="build a gadget instance from a relation")
    p.add_argument("kind", choices=["sw", "sens"])
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--relation", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gadget)

    p = sub.add_parser("loop", help="check the loop statements on binary relations")
    p.add_argument("action", choices=["verify"])
    p.add_argument("--alg", required=True)
    p.add_argument("--max-domain", type=int, default=3)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--sample", type=int, default=0,
                   help="sample this many generated relations instead of all of them")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-size", type=int)
    p.add_argument("--report")
    p.set_defaults(func=cmd_loop)

    p = sub.add_parser("quality", help="quality of an evaluation")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--vars", required=True)
    p.add_argument("--values", required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int)
    p.set_defaults(func=cmd_quality)

    p = sub.add_parser("experiment", help="seeded random experiments")
    p.add_argument("kind", choices=["sensitivity", "extension", "baker-pixley"])
    p.add_argument("--alg", required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--max-vars", type=int, default=6)
    p.add_argument("--arity", type=int)
    p.add_argument("--max-generators", type=int, default=4)
    p.add_argument("--no-square", action="store_true", help="use A instead of A x A")
    p.add_argument("--report")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("corpus", help="list the bundled algebras and instances")
    p.set_defaults(func=cmd_corpus)
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, StructureError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceGuardError as exc:
        print(f"resource guard hit after {exc.explored} steps: {exc} (result unknown)", file=sys.stderr)
        return EXIT_GUARD


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
