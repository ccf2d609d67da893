"""Command-line interface.

Exit codes: 0 success, 1 validation failure (or malformed input), 2 usage
error, 3 capacity error. Reports go to standard output as JSON.
"""

import argparse
import json
import sys
from fractions import Fraction

from . import compiler, dnnf, permwidth, probability, triples
from .errors import CapacityError, ContractError, DnnfLabError, StructuralError
from .instances import build_thk, encode_cnf, graph_from_json, parse_dimacs, parse_vertex_id


class UsageError(Exception):
    pass


def _read(path):
    with open(path, encoding="ascii", newline="") as fh:
        return fh.read()


def _write(path, text):
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(text)


def _emit(obj):
    sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _load_graph(path):
    return graph_from_json(json.loads(_read(path)))


def _vertex_parser(g):
    if hasattr(g, "h"):
        return parse_vertex_id
    return lambda s: s


def _fmt(g):
    return g.format_vertex


def _size_class(b, args):
    if args.theta is not None:
        return dnnf.SizeClass(args.theta)
    if args.alpha is not None:
        return dnnf.SizeClass.from_alpha(len(b.support()), args.alpha)
    raise UsageError("one of --theta or --alpha is required")


def cmd_gen_graph(args):
    g = build_thk(args.h, args.k)
    _write(args.output, json.dumps(g.to_json()) + "\n")
    _emit({"vertices": len(g.vertices), "edges": g.num_edges(), "h": g.h, "k": g.k})
    return 0


def cmd_gen_cnf(args):
    g = _load_graph(args.graph)
    cnf = encode_cnf(g)
    _write(args.output, cnf.to_dimacs())
    if args.map:
        _write(args.map, json.dumps(cnf.var_map(_fmt(g)), indent=1, sort_keys=True) + "\n")
    _emit({"variables": len(cnf.variables), "clauses": len(cnf.clauses)})
    return 0


def cmd_compile(args):
    cnf = parse_dimacs(_read(args.cnf))
    b = compiler.compile_cnf(cnf, heuristic=args.heuristic, theta=args.theta,
                             max_nodes=args.max_nodes)
    _write(args.output, dnnf.write_ddnnf(b))
    _emit({"nodes": len(b), "variables": b.num_vars, "modelCount": str(dnnf.model_count(b))})
    return 0


def cmd_validate(args):
    b = dnnf.parse_ddnnf(_read(args.circuit))
    sc = _size_class(b, args)
    report = dnnf.validate(b, sc)
    out = report.to_json()
    out["theta"] = sc.theta
    _emit(out)
    return 0 if report.ok else 1


def _read_model(path):
    """Signed variable indices separated by whitespace; a trailing 0 is ignored."""
    out = {}
    for tok in _read(path).split():
        x = int(tok)
        if x:
            out[abs(x)] = int(x > 0)
    return out


def cmd_mainstream(args):
    b = dnnf.parse_ddnnf(_read(args.circuit))
    model = _read_model(args.model)
    missing = sorted(b.support() - set(model))
    if missing:
        raise UsageError(f"model does not assign variable {missing[0]}")
    sc = dnnf.SizeClass(args.theta)
    p = dnnf.mainstream_path(b, model, sc)
    _emit({
        "steps": list(p.steps),
        "nodes": list(p.nodes),
        "order": list(p.order),
        "assignment": {str(x): v for x, v in p.assignment.items()},
        "alternatives": list(p.alternatives),
        "end": p.end,
        "endSupport": b.support_size(p.end),
        "mainstream": dnnf.is_mainstream(b, p, sc),
    })
    return 0


def cmd_analyze_perm(args):
    g = _load_graph(args.graph)
    if not hasattr(g, "h"):
        raise UsageError("analyze-perm needs a T[h,k] graph")
    ids = [line for line in _read(args.permutation).split("\n") if line != ""]
    perm = permwidth.Permutation(g, [parse_vertex_id(s) for s in ids])
    if args.alpha is not None:
        res = permwidth.analyze(perm, args.theta, alpha=args.alpha)
    else:
        if args.h0 is None or args.h1 is None:
            raise UsageError("give --h0 and --h1, or --alpha")
        res = permwidth.analyze(perm, args.theta, args.h0, args.h1)
    _emit(res.to_json(_fmt(g)))
    return 0


def cmd_check_triple(args):
    g = _load_graph(args.graph)
    t = triples.triple_from_json(json.loads(_read(args.triple)), _vertex_parser(g))
    report = triples.validate_triple(g, t)
    out = report.to_json(_fmt(g))
    out["rank"] = t.rank
    _emit(out)
    return 0 if report.ok else 1


def cmd_prob_set(args):
    g = _load_graph(args.graph)
    parse = _vertex_parser(g)
    S = {parse(s) for s in args.set.split(",") if s}
    p = probability.pr_set(g, S)
    bound = probability.beta_bound(len(S))
    _emit({
        "probability": str(p),
        "float": float(p),
        "independent": g.is_independent(S),
        "betaBound": str(bound),
        "withinBound": bool(p <= bound) if g.is_independent(S) else None,
    })
    return 0


def cmd_experiment_ledger(args):
    g = _load_graph(args.graph)
    b = dnnf.parse_ddnnf(_read(args.circuit))
    names = None
    if args.map:
        index = json.loads(_read(args.map))
        parse = _vertex_parser(g)
        names = [None] * b.num_vars
        for s, x in index.items():
            names[x - 1] = parse(s)
    report = probability.distinct_nodes_ledger(
        b, g, args.theta, args.samples, args.seed, h0=args.h0, h1=args.h1,
        jobs=args.jobs, est_samples=args.est_samples, names=names)
    _write(args.output, report.csv_text())
    if args.summary:
        _write(args.summary, report.summary_json())
    s = dict(report.summary)
    s.pop("estimates")
    _emit(s)
    bad = s["falsificationEvents"] or s["elposViolations"]
    return 1 if bad else 0


def build_parser():
    p = argparse.ArgumentParser(prog="dnnflab", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen-graph", help="write T[h,k] as graph JSON")
    s.add_argument("--h", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_gen_graph)

    s = sub.add_parser("gen-cnf", help="write φ(G) in DIMACS with a vertex map")
    s.add_argument("graph")
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--map")
    s.set_defaults(func=cmd_gen_cnf)

    s = sub.add_parser("compile", help="compile a DIMACS CNF into a ddnnf file")
    s.add_argument("cnf")
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--heuristic", choices=compiler.HEURISTICS, default="lexical")
    s.add_argument("--theta", type=int, help="only split off components of at most theta variables")
    s.add_argument("--max-nodes", type=int, default=5_000_000)
    s.set_defaults(func=cmd_compile)

    s = sub.add_parser("validate", help="structural and imbalance checks")
    s.add_argument("circuit")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--alpha", type=float)
    g.add_argument("--theta", type=int)
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("mainstream", help="mainstream path of a total assignment")
    s.add_argument("circuit")
    s.add_argument("--model", required=True)
    s.add_argument("--theta", type=int, required=True)
    s.set_defaults(func=cmd_mainstream)

    s = sub.add_parser("analyze-perm", help="target triple from a vertex order")
    s.add_argument("graph")
    s.add_argument("permutation")
    s.add_argument("--h0", type=int)
    s.add_argument("--h1", type=int)
    s.add_argument("--alpha", type=float)
    s.add_argument("--theta", type=int, required=True)
    s.set_defaults(func=cmd_analyze_perm)

    s = sub.add_parser("check-triple", help="validate a target triple")
    s.add_argument("graph")
    s.add_argument("triple")
    s.set_defaults(func=cmd_check_triple)

    s = sub.add_parser("prob-set", help="exact probability that a vertex set is all positive")
    s.add_argument("graph")
    s.add_argument("--set", required=True)
    s.set_defaults(func=cmd_prob_set)

    s = sub.add_parser("experiment", help="sampling experiments")
    esub = s.add_subparsers(dest="experiment", required=True)
    e = esub.add_parser("ledger", help="distinct u(g) nodes and the union-bound sum")
    e.add_argument("graph")
    e.add_argument("circuit")
    e.add_argument("--theta", type=int, required=True)
    e.add_argument("--samples", type=int, required=True)
    e.add_argument("--seed", type=int, required=True)
    e.add_argument("--est-samples", type=int)
    e.add_argument("--h0", type=int)
    e.add_argument("--h1", type=int)
    e.add_argument("--jobs", type=int, default=1)
    e.add_argument("--map")
    e.add_argument("--summary")
    e.add_argument("-o", "--output", required=True)
    e.set_defaults(func=cmd_experiment_ledger)
    return p


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3
    except (StructuralError, ContractError, DnnfLabError) as exc:
        node = getattr(exc, "node", None)
        where = f" (node {node})" if node is not None else ""
        print(f"error: {exc}{where}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())
