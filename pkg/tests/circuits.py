"""Test helpers: random Decision-DNNFs and brute-force oracles."""

import random
from itertools import product as iproduct

from dnnflab.assignments import AssignmentSet
from dnnflab.dnnf import DecisionDnnf
from dnnflab.instances import Cnf


def random_ddnnf(seed, n, p_and=0.35, p_sink=0.15):
    """A random read-once, decomposable circuit over variables 1..n."""
    rng = random.Random(seed)
    nodes = [("F",), ("T",)]

    def gen(vs):
        if not vs or rng.random() < p_sink:
            return 1 if rng.random() < 0.8 else 0
        if len(vs) >= 2 and rng.random() < p_and:
            vs = list(vs)
            rng.shuffle(vs)
            cut = rng.randint(1, len(vs) - 1)
            left, right = gen(vs[:cut]), gen(vs[cut:])
            nodes.append(("A", left, right))
            return len(nodes) - 1
        x = rng.choice(sorted(vs))
        rest = [v for v in vs if v != x]
        c0 = gen([v for v in rest if rng.random() < 0.8])
        c1 = gen([v for v in rest if rng.random() < 0.8])
        nodes.append(("D", x, c0, c1))
        return len(nodes) - 1

    src = gen(list(range(1, n + 1)))
    return DecisionDnnf(nodes, src, n).compact()


def evaluate(b, g, u=None):
    """Plain circuit evaluation of B_u on a total assignment g."""
    u = b.source if u is None else u
    n = b.nodes[u]
    if n[0] == "T":
        return True
    if n[0] == "F":
        return False
    if n[0] == "A":
        return evaluate(b, g, n[1]) and evaluate(b, g, n[2])
    return evaluate(b, g, n[2 + g[n[1]]])


def brute_semantics(b, u=None):
    """S(B_u) by evaluating every assignment of Var(B_u)."""
    u = b.source if u is None else u
    vs = sorted(b.support(u))
    rows = []
    for bits in iproduct((0, 1), repeat=len(vs)):
        if evaluate(b, dict(zip(vs, bits)), u):
            rows.append(bits)
    return AssignmentSet(vs, rows)


def brute_count(clauses, n):
    """Number of assignments of 1..n satisfying integer clauses."""
    count = 0
    for bits in iproduct((0, 1), repeat=n):
        if all(any((lit > 0) == bool(bits[abs(lit) - 1]) for lit in cl) for cl in clauses):
            count += 1
    return count


def all_paths(b, limit=None):
    """Every target path from the source, as step tuples."""
    out = []
    stack = [(b.source, ())]
    while stack:
        u, steps = stack.pop()
        out.append(steps)
        if limit is not None and len(out) >= limit:
            break
        for s, c in enumerate(b.children(u)):
            stack.append((c, steps + (s,)))
    return out


def cnf_from_ints(n, clauses):
    return Cnf(range(1, n + 1), [tuple((abs(l), l > 0) for l in cl) for cl in clauses])


def random_cnf(rng, n, m, width=3):
    clauses = []
    for _ in range(m):
        w = rng.randint(1, min(width, n))
        vs = rng.sample(range(1, n + 1), w)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    return clauses
