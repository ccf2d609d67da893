"""The edge-orientation distribution over models of φ(G) and the union-bound ledger.

Every edge independently picks one of its endpoints with a fair coin; the
picked vertices are set to 1 and all others to 0. The result always satisfies
φ(G). Exact probabilities are rationals; sampled quantities come with
Clopper-Pearson intervals.
"""

import csv
import io
import json
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct

import numpy as np
from scipy.stats import binomtest

from .assignments import Assignment
from .dnnf import SizeClass, carried_set, mainstream_path, path_profile
from .errors import CapacityError, ContractError
from .permwidth import Permutation, analyze, anchor_h0
from .triples import bottleneck_set

ENUMERATION_CAP = 20
BETA = Fraction(64, 63)
EST_STREAM = 1


def assign_of(g, choice):
    """The model whose positive set is the set of chosen endpoints.

    ``choice`` maps edges (as returned by ``g.edges()``) to an endpoint, or is a
    0/1 sequence aligned with ``g.edges()`` (0 picks the first endpoint).
    """
    edges = g.edges()
    if isinstance(choice, dict):
        out = {choice[e] for e in edges}
    else:
        if len(choice) != len(edges):
            raise ValueError("orientation must cover every edge")
        out = {e[int(c)] for e, c in zip(edges, choice)}
    return Assignment((v, int(v in out)) for v in g.vertices)


def sample_model(g, rng):
    bits = rng.integers(0, 2, size=g.num_edges())
    return assign_of(g, bits)


def pr_set_product(g, S):
    """Π (1 - 2^-deg v) over S; exact when S is independent."""
    p = Fraction(1)
    for v in S:
        p *= 1 - Fraction(1, 2 ** g.degree(v))
    return p


def pr_set_enumerate(g, S, cap=ENUMERATION_CAP):
    """Pr(S ⊆ Pos) by enumerating orientations of the edges incident to S."""
    S = set(S)
    edges = [e for e in g.edges() if e[0] in S or e[1] in S]
    if len(edges) > cap:
        raise CapacityError(f"{len(edges)} incident edges exceed the cap {cap}")
    good = 0
    for bits in iproduct((0, 1), repeat=len(edges)):
        hit = {e[b] for e, b in zip(edges, bits)}
        if S <= hit:
            good += 1
    return Fraction(good, 2 ** len(edges))


def pr_set(g, S, cap=ENUMERATION_CAP):
    S = set(S)
    if not S <= set(g.vertices):
        raise ValueError("S must be a set of vertices")
    if g.is_independent(S):
        return pr_set_product(g, S)
    return pr_set_enumerate(g, S, cap)


def beta_bound(size):
    return BETA ** -size


@dataclass
class Estimate:
    hits: int
    samples: int
    low: float
    high: float

    @property
    def value(self):
        return self.hits / self.samples if self.samples else 0.0

    def to_json(self):
        return {"estimate": self.value, "hits": self.hits, "samples": self.samples,
                "ciLow": self.low, "ciHigh": self.high}


def make_estimate(hits, n):
    if n == 0:
        return Estimate(0, 0, 0.0, 1.0)
    ci = binomtest(hits, n).proportion_ci(0.95, method="exact")
    return Estimate(hits, n, float(ci.low), float(ci.high))


def _var_bits(b, g, names):
    index = {v: n + 1 for n, v in enumerate(names)}
    return {v: index[v] for v in g.vertices if v in index}


def _to_circuit(model, var_of):
    return {x: model[v] for v, x in var_of.items()}


def circuit_names(b, g):
    """Variable names of b: its own, or the sorted vertices of g."""
    if b.names is not None:
        return list(b.names)
    names = g.sorted_vertices()
    if len(names) != b.num_vars:
        raise ContractError("circuit variable count does not match the graph")
    return list(names)


def mc_carried(b, g, u, samples, seed, names=None):
    """Estimate of Pr(model carried through u) under the orientation distribution."""
    names = names or circuit_names(b, g)
    var_of = _var_bits(b, g, names)
    hits = 0
    for j in range(samples):
        rng = np.random.default_rng([seed, EST_STREAM, j])
        gv = _to_circuit(sample_model(g, rng), var_of)
        hits += u in carried_set(b, gv)
    return make_estimate(hits, samples)


@dataclass
class SampleRecord:
    index: int
    node: int | None
    prefix_len: int | None
    rank: int | None
    status: str
    branch: str | None = None
    mainstream_len: int = 0
    elpos_ok: bool | None = None


def prefix_steps(profile, b, decisions):
    """Steps of the shortest prefix of a path that contains ``decisions`` decision nodes."""
    if decisions == 0:
        return ()
    seen = 0
    for n, w in enumerate(profile.nodes[:-1]):
        if b.kind(w) == "D":
            seen += 1
            if seen == decisions:
                return profile.steps[: n + 1]
    raise ContractError("path has fewer decision nodes than requested")


def analyze_sample(b, g, theta, h0, h1, names, idx, seed):
    """One ledger row: mainstream path, analysis of its order, u(g), linkage check."""
    var_of = _var_bits(b, g, names)
    rng = np.random.default_rng([seed, idx])
    model = sample_model(g, rng)
    gv = _to_circuit(model, var_of)
    sc = SizeClass(theta)
    p0 = mainstream_path(b, gv, sc)
    head = [names[x - 1] for x in p0.order]
    perm = Permutation.complete(g, head)
    try:
        res = analyze(perm, theta, h0, h1)
    except CapacityError:
        # No triple at these heights: fall back to the end of the mainstream
        # path, through which g is carried as well.
        return SampleRecord(idx, p0.end, None, None, "infeasible", mainstream_len=len(head))
    if res.prefix_len >= len(head):
        return SampleRecord(idx, None, res.prefix_len, res.rank, "falsified", res.branch,
                            len(head))
    steps = prefix_steps(p0, b, res.prefix_len)
    p = path_profile(b, steps)
    a = Assignment((names[x - 1], bit) for x, bit in p.assignment.items())
    I = bottleneck_set(g, set(a), a, res.triple)
    ok = all(model[v] == 1 for v in I)
    return SampleRecord(idx, p.end, res.prefix_len, res.rank, "ok", res.branch, len(head), ok)


def _ledger_chunk(args):
    b, g, theta, h0, h1, names, seed, indices = args
    return [analyze_sample(b, g, theta, h0, h1, names, i, seed) for i in indices]


def _estimate_chunk(args):
    b, g, names, seed, nodes, indices = args
    var_of = _var_bits(b, g, names)
    hits = Counter()
    for j in indices:
        rng = np.random.default_rng([seed, EST_STREAM, j])
        reach = carried_set(b, _to_circuit(sample_model(g, rng), var_of))
        for u in nodes:
            if u in reach:
                hits[u] += 1
    return hits


def _chunks(n, parts):
    parts = max(1, min(parts, n)) if n else 1
    return [list(range(n))[i::parts] for i in range(parts)]


def _run(fn, tasks, jobs):
    if jobs <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, tasks))


@dataclass
class LedgerReport:
    records: list
    estimates: dict
    summary: dict = field(default_factory=dict)

    def csv_text(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["sampleIdx", "nodeId", "prefixLen", "triplerank",
                    "carriedEstimate", "ciLow", "ciHigh"])
        for r in self.records:
            est = self.estimates.get(r.node)
            w.writerow([
                r.index,
                "" if r.node is None else r.node,
                "" if r.prefix_len is None else r.prefix_len,
                "" if r.rank is None else r.rank,
                "" if est is None else repr(est.value),
                "" if est is None else repr(est.low),
                "" if est is None else repr(est.high),
            ])
        return buf.getvalue()

    def summary_json(self):
        return json.dumps(self.summary, indent=2, sort_keys=True) + "\n"


def distinct_nodes_ledger(b, g, theta, samples, seed, h0=None, h1=None, jobs=1,
                          est_samples=None, names=None):
    """Sample models, locate u(g) for each, and estimate carried probabilities.

    The union-bound sum adds the carried-through estimates of all observed
    nodes; in exact arithmetic it is at least 1.
    """
    if not hasattr(g, "h"):
        raise ContractError("the ledger needs a layered graph T[h,k]")
    names = names or circuit_names(b, g)
    h0 = anchor_h0(g.k, theta) if h0 is None else h0
    h1 = g.h if h1 is None else h1
    est_samples = samples if est_samples is None else est_samples
    tasks = [(b, g, theta, h0, h1, names, seed, idx) for idx in _chunks(samples, jobs)]
    records = sorted((r for part in _run(_ledger_chunk, tasks, jobs) for r in part),
                     key=lambda r: r.index)
    nodes = sorted({r.node for r in records if r.node is not None})
    tasks = [(b, g, names, seed, nodes, idx) for idx in _chunks(est_samples, jobs)]
    hits = Counter()
    for part in _run(_estimate_chunk, tasks, jobs):
        hits.update(part)
    estimates = {u: make_estimate(hits[u], est_samples) for u in nodes}
    status = Counter(r.status for r in records)
    ranks = [r.rank for r in records if r.status == "ok"]
    summary = {
        "samples": samples,
        "estimationSamples": est_samples,
        "seed": seed,
        "theta": theta,
        "h": g.h,
        "k": g.k,
        "h0": h0,
        "h1": h1,
        "distinctNodes": len(nodes),
        "nodeCounts": {str(u): sum(1 for r in records if r.node == u) for u in nodes},
        "unionBoundSum": sum(e.value for e in estimates.values()),
        "unionBoundSumCiLow": sum(e.low for e in estimates.values()),
        "falsificationEvents": [r.index for r in records if r.status == "falsified"],
        "infeasibleEvents": [r.index for r in records if r.status == "infeasible"],
        "elposViolations": [r.index for r in records if r.elpos_ok is False],
        "statusCounts": dict(sorted(status.items())),
        "branches": dict(sorted(Counter(r.branch for r in records if r.branch).items())),
        "minRank": min(ranks) if ranks else None,
        "maxRank": max(ranks) if ranks else None,
        "estimates": {str(u): estimates[u].to_json() for u in nodes},
    }
    return LedgerReport(records, estimates, summary)
