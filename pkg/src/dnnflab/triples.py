"""Target triples (W, U0, U1), the Pos/Neg split, and the bottleneck set I."""

from dataclasses import dataclass, field

from .assignments import sorted_vars
from .errors import ContractError

CONDITIONS = (
    "disjoint",
    "large_components",
    "u0_touches_u1_and_w",
    "u1_not_adjacent_w",
    "u0_independent",
    "w_neighbors_independent",
    "w_single_u0_neighbor",
)


@dataclass(frozen=True)
class TargetTriple:
    W: frozenset
    U0: frozenset
    U1: frozenset
    theta: int

    @property
    def rank(self):
        return len(self.U0)

    def to_json(self, fmt=str):
        return {
            "W": [fmt(v) for v in sorted_vars(self.W)],
            "U0": [fmt(v) for v in sorted_vars(self.U0)],
            "U1": [fmt(v) for v in sorted_vars(self.U1)],
            "theta": self.theta,
        }


def make_triple(W, U0, U1, theta):
    return TargetTriple(frozenset(W), frozenset(U0), frozenset(U1), int(theta))


def triple_from_json(data, parse=lambda s: s):
    return make_triple(
        [parse(v) for v in data["W"]],
        [parse(v) for v in data["U0"]],
        [parse(v) for v in data["U1"]],
        data["theta"],
    )


@dataclass
class TripleReport:
    passed: dict = field(default_factory=dict)
    counterexample: dict = field(default_factory=dict)

    @property
    def ok(self):
        return all(self.passed.values())

    def failures(self):
        return [c for c in CONDITIONS if not self.passed[c]]

    def to_json(self, fmt=str):
        return {
            "ok": self.ok,
            "conditions": dict(self.passed),
            "counterexamples": {
                c: (fmt(v) if v is not None else None) for c, v in self.counterexample.items()
            },
        }


def validate_triple(g, t):
    """Check the six target-triple conditions plus pairwise disjointness."""
    W, U0, U1 = set(t.W), set(t.U0), set(t.U1)
    r = TripleReport()

    def record(name, bad):
        bad = sorted_vars(bad)
        r.passed[name] = not bad
        if bad:
            r.counterexample[name] = bad[0]

    missing = (W | U0 | U1) - set(g.vertices)
    record("disjoint", (W & U0) | (W & U1) | (U0 & U1) | missing)
    small = set()
    for comp in g.components(U1):
        if len(comp) <= t.theta:
            small |= comp
    record("large_components", small)
    record(
        "u0_touches_u1_and_w",
        {u for u in U0 if not (g.neighbors(u) & U1 and g.neighbors(u) & W)},
    )
    record("u1_not_adjacent_w", {u for u in U1 if g.neighbors(u) & W})
    record("u0_independent", {u for u in U0 if g.neighbors(u) & U0})
    nw = g.neighborhood(U0) & W
    record("w_neighbors_independent", {u for u in nw if g.neighbors(u) & nw})
    record("w_single_u0_neighbor", {w for w in W if len(g.neighbors(w) & U0) > 1})
    return r


def pos_neg_split(g, path_vars, a, U0):
    """Pos: vertices of U0 whose neighbours on the path are all set to 1 by a."""
    path_vars = set(path_vars)
    pos = set()
    for u in U0:
        if all(a[v] == 1 for v in g.neighbors(u) & path_vars):
            pos.add(u)
    return frozenset(pos), frozenset(set(U0) - pos)


def bottleneck_set(g, path_vars, a, t):
    """I = ⋃ I_u with I_u = N(u) ∩ W for u in Pos and I_u = {u} otherwise."""
    if not validate_triple(g, t).ok:
        raise ContractError("bottleneck_set needs a valid target triple")
    path_vars = frozenset(path_vars)
    if path_vars != t.W or set(a) != set(path_vars):
        raise ContractError("the path variables, a(P) and W must coincide")
    pos, neg = pos_neg_split(g, path_vars, a, t.U0)
    out = set(neg)
    for u in pos:
        out |= g.neighbors(u) & path_vars
    return frozenset(out)


def greedy_triple(g, W, theta):
    """Some target triple with the given W, built greedily.

    U1 is the union of the components of size > theta that avoid W and N(W);
    U0 is grown in vertex order from N(W) ∖ W subject to the remaining
    conditions. Intended for instances too small for the layered constructions.
    """
    W = set(W)
    nw = g.neighborhood(W) - W
    outside = set(g.vertices) - W - nw
    U1 = set()
    for comp in g.components(outside):
        if len(comp) > theta:
            U1 |= comp
    U0 = set()
    used_w = set()
    for u in sorted_vars(nw):
        if not g.neighbors(u) & U1:
            continue
        wn = g.neighbors(u) & W
        if g.neighbors(u) & U0 or wn & used_w:
            continue
        cand = used_w | wn
        if any(g.neighbors(w) & cand for w in wn):
            continue
        U0.add(u)
        used_w = cand
    return make_triple(W, U0, U1, theta)
