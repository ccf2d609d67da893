"""Exhaustive Decision-DNNF compilation of CNFs.

Shannon expansion on one variable at a time, unit propagation emitted as
decision chains, connected-component splitting into AND nodes, and a cache
keyed by the residual clause set. With ``theta`` set, only components of at
most ``theta`` variables are split off, which keeps every AND node imbalanced
with respect to that threshold.
"""

import math
import sys
import threading
from dataclasses import dataclass

from .dnnf import DecisionDnnf, SizeClass, bits, popcount
from .errors import CapacityError
from .instances import Cnf

HEURISTICS = ("lexical", "most-constrained")


class _Builder:
    def __init__(self, heuristic, theta, use_cache, max_nodes):
        if heuristic not in HEURISTICS:
            raise ValueError(f"unknown heuristic {heuristic!r}")
        self.heuristic = heuristic
        self.theta = theta
        self.use_cache = use_cache
        self.max_nodes = max_nodes
        self.nodes = [("F",), ("T",)]
        self.index = {("F",): 0, ("T",): 1}
        self.cache = {}

    def node(self, rec):
        u = self.index.get(rec)
        if u is None:
            if len(self.nodes) >= self.max_nodes:
                raise CapacityError(f"compilation exceeded {self.max_nodes} nodes")
            u = len(self.nodes)
            self.nodes.append(rec)
            self.index[rec] = u
        return u

    def compile(self, f):
        if frozenset() in f:
            return 0
        if not f:
            return 1
        if self.use_cache:
            hit = self.cache.get(f)
            if hit is not None:
                return hit
        u = self._compile(f)
        if self.use_cache:
            self.cache[f] = u
        return u

    def _compile(self, f):
        units = [next(iter(cl)) for cl in f if len(cl) == 1]
        if units:
            lit = min(units, key=lambda l: (abs(l), l))
            rest = self.compile(condition(f, lit))
            x = abs(lit)
            return self.node(("D", x, 0, rest) if lit > 0 else ("D", x, rest, 0))
        comps = components(f)
        if len(comps) > 1:
            if self.theta is None:
                return self.conjoin([c for _, c in comps])
            small = [c for vs, c in comps if len(vs) <= self.theta]
            large = [c for vs, c in comps if len(vs) > self.theta]
            if small:
                parts = small + ([frozenset().union(*large)] if large else [])
                return self.conjoin(parts, keep_last=bool(large))
        x = self.pick(f)
        lo = self.compile(condition(f, -x))
        hi = self.compile(condition(f, x))
        return self.node(("D", x, lo, hi))

    def conjoin(self, parts, keep_last=False):
        """Nest AND nodes so that every left child is the smaller side."""
        key = _mask_key if isinstance(parts[0], int) else _part_key
        if keep_last:
            head = sorted(parts[:-1], key=key)
            parts = head + [parts[-1]]
        else:
            parts = sorted(parts, key=key)
        u = self.compile(parts[-1])
        for p in reversed(parts[:-1]):
            u = self.node(("A", self.compile(p), u))
        return u

    def pick(self, f):
        if self.heuristic == "lexical":
            return min(abs(l) for cl in f for l in cl)
        occ = {}
        for cl in f:
            for l in cl:
                occ[abs(l)] = occ.get(abs(l), 0) + 1
        return min(occ, key=lambda x: (-occ[x], x))


class _VertexCoverBuilder(_Builder):
    """Specialization for monotone 2-CNFs (φ(G)).

    The residual of φ(G) under a partial assignment is φ(G[R]) for the set R of
    unassigned vertices, so the cache key is the bit mask of R with isolated
    vertices dropped (those are free and left to padding).
    """

    def __init__(self, adj, heuristic, theta, use_cache, max_nodes):
        super().__init__(heuristic, theta, use_cache, max_nodes)
        self.adj = adj

    def active(self, r):
        out = 0
        m = r
        adj = self.adj
        while m:
            low = m & -m
            m ^= low
            if adj[low.bit_length() - 1] & r:
                out |= low
        return out

    def split(self, r):
        out = []
        rest = r
        adj = self.adj
        while rest:
            seen = front = rest & -rest
            while front:
                grow = 0
                m = front
                while m:
                    low = m & -m
                    m ^= low
                    grow |= adj[low.bit_length() - 1]
                front = grow & r & ~seen
                seen |= front
            out.append(seen)
            rest &= ~seen
        return out

    def compile(self, r):
        if r == 0:
            return 1
        if self.use_cache:
            hit = self.cache.get(r)
            if hit is not None:
                return hit
        u = self._compile(r)
        if self.use_cache:
            self.cache[r] = u
        return u

    def _compile(self, r):
        comps = self.split(r)
        if len(comps) > 1:
            if self.theta is None:
                return self.conjoin(comps)
            small = [c for c in comps if popcount(c) <= self.theta]
            large = [c for c in comps if popcount(c) > self.theta]
            if small:
                big = 0
                for c in large:
                    big |= c
                return self.conjoin(small + ([big] if large else []), keep_last=bool(large))
        x = self.pick(r)
        hi = self.compile(self.active(r & ~(1 << x)))
        forced = self.adj[x] & r
        lo = self.compile(self.active(r & ~(1 << x) & ~forced))
        for v in reversed(bits(forced)):
            lo = self.node(("D", v, 0, lo))
        return self.node(("D", x, lo, hi))

    def pick(self, r):
        if self.heuristic == "lexical":
            return (r & -r).bit_length() - 1
        return min(bits(r), key=lambda v: (-popcount(self.adj[v] & r), v))


def _mask_key(mask):
    return (popcount(mask), mask & -mask)


def _part_key(clauses):
    vs = {abs(l) for cl in clauses for l in cl}
    return (len(vs), min(vs))


def condition(f, lit):
    """Residual clause set after setting ``lit`` true."""
    out = set()
    for cl in f:
        if lit in cl:
            continue
        if -lit in cl:
            cl = cl - {-lit}
        out.add(cl)
    return frozenset(out)


def components(f):
    """Connected components of the primal graph, as (variables, clauses) pairs."""
    parent = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for cl in f:
        vs = [abs(l) for l in cl]
        for v in vs:
            parent.setdefault(v, v)
        for v in vs[1:]:
            a, b = find(vs[0]), find(v)
            if a != b:
                parent[max(a, b)] = min(a, b)
    groups = {}
    for cl in f:
        groups.setdefault(find(abs(next(iter(cl)))), []).append(cl)
    out = []
    for root, cls in groups.items():
        vs = frozenset(abs(l) for cl in cls for l in cl)
        out.append((vs, frozenset(cls)))
    out.sort(key=lambda p: min(p[0]))
    return out


def _run_deep(fn):
    """Run ``fn`` in a thread with a large stack; compilation recurses per variable."""
    result = {}

    def target():
        try:
            result["value"] = fn()
        except BaseException as exc:  # re-raised in the caller
            result["error"] = exc

    old_limit = sys.getrecursionlimit()
    old_size = threading.stack_size()
    sys.setrecursionlimit(max(old_limit, 200000))
    threading.stack_size(512 * 1024 * 1024)
    try:
        t = threading.Thread(target=target)
        t.start()
        t.join()
    finally:
        threading.stack_size(old_size)
        sys.setrecursionlimit(old_limit)
    if "error" in result:
        raise result["error"]
    return result["value"]


def is_vertex_cover_cnf(clauses):
    return all(len(set(cl)) == 2 and all(l > 0 for l in cl) for cl in clauses)


def compile_cnf(cnf, heuristic="lexical", theta=None, use_cache=True,
                max_nodes=5_000_000, route="auto"):
    """Compile a :class:`Cnf` into a :class:`DecisionDnnf` over indices 1..n.

    ``route`` selects the clause-set engine ("clauses"), the vertex-cover
    engine ("graph", monotone 2-CNF only), or picks automatically.
    """
    clauses = cnf.int_clauses()
    if route == "auto":
        route = "graph" if is_vertex_cover_cnf(clauses) else "clauses"
    if route == "graph":
        if not is_vertex_cover_cnf(clauses):
            raise ValueError("graph route needs a monotone 2-CNF")
        adj = [0] * (len(cnf.variables) + 1)
        for a, c in clauses:
            adj[a] |= 1 << c
            adj[c] |= 1 << a
        b = _VertexCoverBuilder(adj, heuristic, theta, use_cache, max_nodes)
        start = 0
        for cl in clauses:
            for x in cl:
                start |= 1 << x
        root = _run_deep(lambda: b.compile(start))
    else:
        f = frozenset(frozenset(cl) for cl in clauses)
        b = _Builder(heuristic, theta, use_cache, max_nodes)
        root = _run_deep(lambda: b.compile(f))
    circuit = DecisionDnnf(b.nodes, root, len(cnf.variables), cnf.variables)
    return circuit.compact()


compile = compile_cnf


@dataclass
class ImbalanceProfile:
    rows: list
    max_balanced_min: int
    alpha_threshold: float

    def to_json(self):
        return {
            "rows": [
                {"node": u, "left": l, "right": r, "balanced": bal} for u, l, r, bal in self.rows
            ],
            "max_balanced_min": self.max_balanced_min,
            "alpha_threshold": self.alpha_threshold,
        }


def imbalance_profile(b, sc):
    """Child support sizes of every AND node, and the least α making B imbalanced."""
    rows = []
    worst = 0
    for u in sorted(b.reachable()):
        n = b.nodes[u]
        if n[0] != "A":
            continue
        l, r = b.support_size(n[1]), b.support_size(n[2])
        rows.append((u, l, r, l > sc.theta and r > sc.theta))
        worst = max(worst, min(l, r))
    balanced_min = max((min(l, r) for _, l, r, bal in rows if bal), default=0)
    n_vars = b.num_vars
    if worst <= 1 or n_vars <= 1:
        alpha = 0.0
    else:
        alpha = math.log(worst) / math.log(n_vars)
    return ImbalanceProfile(rows, balanced_min, alpha)


def default_size_class(b, alpha):
    return SizeClass.from_alpha(b.num_vars, alpha)
