"""Vertex orders of T[h,k] and target triples extracted from their prefixes.

A permutation is classified as top-down (td) or bottom-up (bu) relative to two
heights h0 < h1. A td permutation yields an independent family of anchored
paths, which becomes a target triple of rank equal to the family size. A
failure of the td test yields a bu witness, from which an "easy" prefix and a
target triple of rank 3^(h2-h0-2) - 1 are built.
"""

import math
from dataclasses import dataclass, field

from .errors import CapacityError, ContractError, StructuralError
from .instances import m_of, tree_distance, tree_node_path
from .triples import make_triple, validate_triple


def ceil_log3(k):
    """Smallest e with 3^e >= k."""
    e, p = 0, 1
    while p < k:
        p *= 3
        e += 1
    return e


def ceil_log2(x):
    return max(0, math.ceil(math.log2(x))) if x > 0 else 0


class Permutation:
    """A linear order of all vertices of a layered graph."""

    def __init__(self, g, order):
        order = list(order)
        if len(order) != len(g.vertices) or set(order) != set(g.vertices):
            raise StructuralError("a permutation must list every vertex exactly once")
        self.g = g
        self.order = order
        self.pos = {v: n for n, v in enumerate(order)}

    def __len__(self):
        return len(self.order)

    def prefix(self, length):
        return self.order[:length]

    def prefix_set(self, length):
        return frozenset(self.order[:length])

    @classmethod
    def complete(cls, g, head):
        """Extend a sequence of distinct vertices by the rest in lexicographic order."""
        head = list(head)
        seen = set(head)
        if len(seen) != len(head):
            raise StructuralError("prefix repeats a vertex")
        return cls(g, head + [v for v in sorted(g.vertices) if v not in seen])


def index_bags(U):
    """Index(U), Bags(U) and the per-bag / per-index views."""
    index_t = {}
    bags_i = {}
    for t, i in U:
        index_t.setdefault(t, set()).add(i)
        bags_i.setdefault(i, set()).add(t)
    return {
        "index": frozenset(bags_i),
        "bags": frozenset(index_t),
        "index_t": {t: frozenset(s) for t, s in index_t.items()},
        "bags_i": {i: frozenset(s) for i, s in bags_i.items()},
    }


@dataclass
class TdRecord:
    t: str
    prefix_len: int
    untouched: str | None


def _first_position(perm, vs):
    return min(perm.pos[v] for v in vs)


def td_record(perm, h0, t):
    """Shortest prefix with k vertices of V_{>h0}(t) and an untouched S_{h0} set."""
    g = perm.g
    upper = sorted(perm.pos[v] for v in g.strata(h0, "gt", t))
    if len(upper) < g.k:
        raise StructuralError(f"fewer than k vertices above height {h0} under {t!r}")
    length = upper[g.k - 1] + 1
    untouched = None
    for r, s in g.subtree_family(h0, t).items():
        if _first_position(perm, s) >= length:
            untouched = r
            break
    return TdRecord(t, length, untouched)


def is_td(perm, h0, h1):
    """True if every node of height h1 passes the top-down test; with records."""
    g = perm.g
    if not 0 <= h0 < h1 <= g.h:
        raise ValueError("need 0 <= h0 < h1 <= h")
    records = [td_record(perm, h0, t) for t in g.tree_nodes(h1)]
    return all(r.untouched is not None for r in records), records


def is_td_brute(perm, h0, h1):
    """Direct transcription of the td definition, scanning prefixes one by one."""
    g = perm.g
    for t in g.tree_nodes(h1):
        upper = g.strata(h0, "gt", t)
        fam = list(g.subtree_family(h0, t).values())
        seen = set()
        count = 0
        for v in perm.order:
            seen.add(v)
            if v in upper:
                count += 1
                if count >= g.k:
                    break
        if not any(not (s & seen) for s in fam):
            return False
    return True


def is_bu_witness(perm, h0, t, length):
    """Check the bu definition for node t and the prefix of the given length."""
    g = perm.g
    pre = perm.prefix_set(length)
    if pre & g.strata(h0, "gt", t):
        return False
    return all(s & pre for s in g.subtree_family(h0, t).values())


def bu_from_td_failure(perm, h0, h1, t0, prefix_len):
    """From a failed td test at t0, find t1 of height h2 = h1 - ceil(log3 k) and a
    prefix witnessing the bu property there."""
    g = perm.g
    if not h0 + ceil_log3(g.k) + 1 < h1 <= g.h:
        raise ContractError("height gap h0 + ceil(log3 k) + 1 < h1 does not hold")
    h2 = h1 - ceil_log3(g.k)
    length = prefix_len - 1
    pre = perm.prefix_set(length)
    for t1 in g.tree_nodes(h2, t0):
        if pre & g.strata(h0, "gt", t1):
            continue
        if all(s & pre for s in g.subtree_family(h0, t1).values()):
            return t1, length
    raise ContractError(f"no bu witness below {t0!r} at height {h2}")


# Anchored paths -----------------------------------------------------------


@dataclass(frozen=True)
class AnchoredPath:
    """Vertices from first(P) to last(P); anchor is the root of the S_{h0} set of last(P)."""

    vertices: tuple
    anchor: str

    @property
    def first(self):
        return self.vertices[0]

    @property
    def last(self):
        return self.vertices[-1]


@dataclass
class PathFamily:
    paths: list
    U: frozenset
    method: str = ""

    def __len__(self):
        return len(self.paths)

    def firsts(self):
        return frozenset(p.first for p in self.paths)


def check_anchored_path(g, U, h0, p):
    """Problems with p as a U,h0-path, from the definition (empty list if valid)."""
    U = set(U)
    problems = []
    seq = list(p.vertices)
    if not seq or len(set(seq)) != len(seq):
        return ["empty or repeating path"]
    if any(not g.has_edge(a, b) for a, b in zip(seq, seq[1:])):
        problems.append("not a path")
    if any(g.height(v) <= h0 for v in seq[:-1]):
        problems.append("an inner vertex is at height <= h0")
    if g.height(p.last) != h0:
        problems.append("last vertex is not at height h0")
    root = p.last[0] if g.height(p.last) == h0 else None
    if root != p.anchor:
        problems.append("anchor does not contain the last vertex")
    anchor = g.subtree_vertices(p.anchor) if root is not None else frozenset()
    if (set(seq) | anchor) & U:
        problems.append("path or anchor meets U")
    if not g.neighbors(p.first) & U:
        problems.append("first vertex is not adjacent to U")
    if any(g.neighbors(v) & U for v in seq[1:]):
        problems.append("a non-first vertex is adjacent to U")
    return problems


def check_family(g, U, h0, fam):
    """Problems with an anchored-path family (validity of each path and independence)."""
    U = set(U)
    problems = []
    for p in fam.paths:
        for msg in check_anchored_path(g, U, h0, p):
            problems.append(f"{p.first}: {msg}")
    firsts = [p.first for p in fam.paths]
    if len(set(firsts)) != len(firsts):
        problems.append("two paths share a first vertex")
    fs = set(firsts)
    if not g.is_independent(fs):
        problems.append("first vertices are not independent")
    nu = g.neighborhood(fs) & U
    if not g.is_independent(nu):
        problems.append("U-neighbours of first vertices are not independent")
    if any(len(g.neighbors(w) & fs) != 1 for w in nu):
        problems.append("a U-neighbour touches two first vertices")
    return problems


def _trim(g, U, seq, anchor):
    """Suffix of seq starting at its last vertex adjacent to U."""
    cut = max(n for n, v in enumerate(seq) if g.neighbors(v) & U)
    return AnchoredPath(tuple(seq[cut:]), anchor)


def _check_region(g, U, U0, S, h0):
    U = frozenset(U)
    U0 = set(U0)
    W0 = frozenset((t, i) for t in U0 for i in range(1, g.k + 1))
    if len(S) != g.h - h0 or not set(g.tree_nodes(None, S)) <= U0:
        raise ContractError(f"anchor {S!r} is not a height-{h0} subtree inside U0")
    if g.subtree_vertices(S) & U:
        raise ContractError("anchor set meets U")
    W1 = frozenset(v for v in U & W0 if g.height(v) > h0)
    return U, W0, W1


def path_by_index(g, U, U0, i, S, h0):
    """A U,h0-path inside U0 × {i} ending in the anchor rooted at S."""
    U, W0, W1 = _check_region(g, U, U0, S, h0)
    bags = index_bags(W1)["bags_i"].get(i)
    if not bags:
        raise ContractError(f"index {i} does not occur in U ∩ W0 ∩ V_>h0")
    t1 = min(bags, key=lambda t: (tree_distance(t, S), t))
    nodes = tree_node_path(t1, S)
    if not set(nodes) <= set(U0):
        raise ContractError("U0 is not connected along the tree path")
    seq = [(c, i) for c in nodes[1:]]
    return _trim(g, U, seq, S)


def greedy_spaced(values, gap):
    """Ascending greedy subset with pairwise distance >= gap."""
    out = []
    for x in sorted(values):
        if not out or x - out[-1] >= gap:
            out.append(x)
    return out


def family_by_index(g, U, U0, S, h0):
    U, W0, W1 = _check_region(g, U, U0, S, h0)
    index = index_bags(W1)["index"]
    chosen = greedy_spaced(index, 4)
    return PathFamily([path_by_index(g, U, U0, i, S, h0) for i in chosen], U, "index")


def path_by_bag(g, U, U0, S, t1, j, h0):
    """A U,h0-path on the hook from (t1,i) over to (t1,j) and down to (S,j)."""
    U, W0, W1 = _check_region(g, U, U0, S, h0)
    info = index_bags(W1)
    I = info["index"]
    if t1 not in info["bags"]:
        raise ContractError(f"{t1!r} is not a bag of U ∩ W0 ∩ V_>h0")
    if j in I or any(abs(j - a) < 2 for a in I) or not 1 <= j <= g.k:
        raise ContractError(f"index {j} is within distance 1 of Index")
    row = sorted(x for (t, x) in U if t == t1)
    i = min(row, key=lambda x: (abs(x - j), x))
    hook = g.tree_path(t1, S, i, j)
    if not {c for c, _ in hook} <= set(U0):
        raise ContractError("hook leaves U0")
    return _trim(g, U, hook[1:], S)


def family_by_bags(g, U, U0, S, h0):
    U, W0, W1 = _check_region(g, U, U0, S, h0)
    info = index_bags(W1)
    I = info["index"]
    root_k = math.isqrt(g.k)
    sqrt_k = root_k if root_k * root_k == g.k else root_k + 1
    if len(I) > math.sqrt(g.k):
        raise ContractError("family_by_bags needs |Index| <= sqrt(k)")
    b0 = []
    for t in sorted(info["bags"]):
        if all(tree_distance(t, s) >= 4 for s in b0):
            b0.append(t)
    b1 = b0[:sqrt_k] if len(b0) > math.sqrt(g.k) else b0
    free = [j for j in range(1, g.k + 1) if all(abs(j - a) >= 2 for a in I)]
    spaced = greedy_spaced(free, 4)
    if len(spaced) < len(b1):
        raise CapacityError(
            f"k={g.k} leaves {len(spaced)} spaced free indices for {len(b1)} bags"
        )
    paths = [path_by_bag(g, U, U0, S, t, j, h0) for t, j in zip(b1, spaced)]
    return PathFamily(paths, U, "bags")


def family_dispatch(g, U, U0, S, h0):
    """Index-based family when Index is large, bag-based otherwise.

    When k is too small for the bag construction the index-based family (which
    always has at least one path) is used instead.
    """
    U, W0, W1 = _check_region(g, U, U0, S, h0)
    if len(W1) < g.k:
        raise ContractError(f"|U ∩ W0 ∩ V_>h0| = {len(W1)} < k = {g.k}")
    index = index_bags(W1)["index"]
    if len(index) >= math.sqrt(g.k):
        return family_by_index(g, U, U0, S, h0)
    try:
        return family_by_bags(g, U, U0, S, h0)
    except CapacityError:
        fam = family_by_index(g, U, U0, S, h0)
        fam.method = "index-fallback"
        return fam


# Top-down branch ------------------------------------------------------------


def c_value(x0, x1):
    return ((x1 - x0) // 4 + 1) / 65


@dataclass
class TopDownResult:
    prefix_len: int
    family: PathFamily
    anchor: str
    levels: list = field(default_factory=list)


def top_down_triple(perm, h0, h1, records=None):
    """Independent anchored-path family for a td permutation, by recursion over
    heights h1, h1+4, h1+8, ... (always taking the first descendant)."""
    g = perm.g
    if records is None:
        td, records = is_td(perm, h0, h1)
        if not td:
            raise ContractError("permutation is not td for these heights")
    by_node = {r.t: r for r in records}
    levels = []

    def solve(t):
        ht = g.height(t)
        if ht == h1:
            r = by_node[t]
            if r.untouched is None:
                raise ContractError(f"td test fails at {t!r}")
            U = perm.prefix_set(r.prefix_len)
            fam = family_dispatch(g, U, g.tree_nodes(None, t), r.untouched, h0)
            levels.append((ht, len(fam)))
            return r.prefix_len, fam, r.untouched
        subs = []
        for d in "012":
            sub = t + d + "0" * 3
            subs.append((solve(sub), d))
        subs.sort(key=lambda x: (x[0][0], x[1]))
        (len1, _, _), _ = subs[0]
        (len2, fam2, _), mid = subs[1]
        (len3, _, s3), _ = subs[2]
        U = perm.prefix_set(len2)
        skip = t + mid
        U0 = [c for c in g.tree_nodes(None, t) if not c.startswith(skip)]
        W0 = {(c, i) for c in U0 for i in range(1, g.k + 1)}
        upper = g.strata(h0, "gt", t)
        if len(W0 & U & upper) < g.k:
            raise ContractError(f"invariant |W0 ∩ π2 ∩ V_>h0(t)| >= k fails at {t!r}")
        if s3.startswith(skip) or g.subtree_vertices(s3) & U:
            raise ContractError(f"invariant 'π2 ∩ S = ∅ with S ⊆ W0' fails at {t!r}")
        extra = family_dispatch(g, U, U0, s3, h0)
        merged = PathFamily(fam2.paths + extra.paths, U, f"{fam2.method}+{extra.method}")
        levels.append((ht, len(merged)))
        return len2, merged, s3

    top = h1 + 4 * ((g.h - h1) // 4)
    start = "0" * (g.h - top)
    length, fam, anchor = solve(start)
    return TopDownResult(length, fam, anchor, levels)


def assemble_top_down(g, fam, theta, h0):
    """(U, first-vertices, shifted paths plus child-0 subtrees of the anchors)."""
    if not fam.paths:
        raise ContractError("empty path family")
    if h0 < 1 or m_of(h0 - 1) * g.k <= theta:
        raise CapacityError(
            f"anchor subtree size m(h0-1)*k = {m_of(h0 - 1) * g.k} is not above theta={theta}"
        )
    U0 = set()
    U1 = set()
    for p in fam.paths:
        child = p.anchor + "0"
        U0.add(p.first)
        U1 |= set(p.vertices[1:])
        U1.add((child, p.last[1]))
        U1 |= g.subtree_vertices(child)
    return make_triple(fam.U, U0, U1, theta)


# Bottom-up branch ------------------------------------------------------------


@dataclass
class BottomUpParts:
    free: str
    root: str
    loaded: list
    w: dict
    first: dict


def easy_free_set(g, U, t, h0):
    """root of the unique S_{h0+1}(t) set missed by U, or raise if U is not easy on t."""
    U = set(U)
    if U & g.strata(h0, "gt", t):
        raise ContractError(f"U meets V_>h0 under {t!r}")
    missed = [r for r, s in g.subtree_family(h0 + 1, t).items() if not s & U]
    if len(missed) != 1:
        raise ContractError(f"U misses {len(missed)} sets of S_(h0+1) under {t!r}, not one")
    return missed[0]


def assemble_bottom_up(g, U, t, theta, h0):
    U = frozenset(U)
    if h0 + 1 > g.height(t):
        raise CapacityError("node too low for the bottom-up construction")
    free = easy_free_set(g, U, t, h0)
    if m_of(h0 + 1) * g.k <= theta:
        raise CapacityError(
            f"free subtree size m(h0+1)*k = {m_of(h0 + 1) * g.k} is not above theta={theta}"
        )
    root = free[: len(t) + 1]
    U0 = set()
    U1 = set(g.bag(root)) | set(g.subtree_vertices(free))
    U1 |= {(c, 1) for c in tree_node_path(root, free)}
    loaded = [r for r in g.tree_nodes(h0 + 1, root) if r != free]
    if not loaded:
        raise CapacityError(
            f"no loaded subtrees below {root!r}: the bottom-up triple would have rank 0"
        )
    ws, firsts = {}, {}
    for r in loaded:
        s = g.subtree_vertices(r) & U
        w = min(s, key=lambda v: (-g.height(v), v))
        path = [(c, w[1]) for c in tree_node_path(w[0], root)][1:]
        if len(path) < 2:
            raise CapacityError(
                f"path from {w} to the root row has no interior; height gap too small"
            )
        ws[r], firsts[r] = w, path[0]
        U0.add(path[0])
        U1 |= set(path[1:])
    return make_triple(U, U0, U1, theta), BottomUpParts(free, root, loaded, ws, firsts)


def easy_prefix(perm, t, h0, bu_len):
    """Shortest prefix meeting every S_{h0+1}(t) set, minus its last element."""
    g = perm.g
    firsts = [_first_position(perm, s) for s in g.subtree_family(h0 + 1, t).values()]
    length = max(firsts)
    if length >= bu_len:
        raise ContractError("bu prefix does not meet every S_(h0+1) set")
    return length


# Parameter schedule and pipeline -------------------------------------------


def schedule(alpha, h, k):
    """h0 = ceil(alpha*h) + 2 and h1 = h0 + 2*ceil(log3 k) + ceil(log2 h)."""
    h0 = math.ceil(alpha * h - 1e-12) + 2
    h1 = h0 + 2 * ceil_log3(k) + ceil_log2(h)
    return h0, h1


def minimal_height(alpha, k, limit=10**6):
    """Least h with h >= 2(ceil(log2 h) + 2 ceil(log3 k) + 2)/(1 - alpha) whose
    schedule also fits inside the tree (h1 <= h)."""
    for h in range(1, limit):
        need = 2 * (ceil_log2(h) + 2 * ceil_log3(k) + 2) / (1 - alpha)
        if h >= need and schedule(alpha, h, k)[1] <= h:
            return h
    raise CapacityError("no admissible height below the search limit")


@dataclass
class Analysis:
    branch: str
    h0: int
    h1: int
    h2: int | None
    prefix_len: int
    triple: object
    rank: int
    report: object
    details: dict = field(default_factory=dict)

    @property
    def prefix(self):
        return self.details.get("prefix")

    def to_json(self, fmt=str):
        return {
            "branch": self.branch,
            "h0": self.h0,
            "h1": self.h1,
            "h2": self.h2,
            "prefixLen": self.prefix_len,
            "rank": self.rank,
            "triple": self.triple.to_json(fmt),
            "validatorReport": self.report.to_json(fmt),
            "details": {k: v for k, v in self.details.items() if k != "prefix"},
        }


def analyze(perm, theta, h0=None, h1=None, alpha=None):
    """Prefix and target triple for a permutation, via the td or bu branch."""
    g = perm.g
    if alpha is not None:
        h0, h1 = schedule(alpha, g.h, g.k)
        if h1 > g.h or g.h < 2 * (ceil_log2(g.h) + 2 * ceil_log3(g.k) + 2) / (1 - alpha):
            raise CapacityError(
                f"schedule h0={h0}, h1={h1} does not fit h={g.h}; "
                f"minimal h is {minimal_height(alpha, g.k)}"
            )
    if h0 is None or h1 is None or not 0 <= h0 < h1 <= g.h:
        raise CapacityError(f"need 0 <= h0 < h1 <= h, got h0={h0}, h1={h1}, h={g.h}")
    td, records = is_td(perm, h0, h1)
    if td:
        res = top_down_triple(perm, h0, h1, records)
        triple = assemble_top_down(g, res.family, theta, h0)
        problems = check_family(g, res.family.U, h0, res.family)
        if problems:
            raise ContractError(f"family fails validation: {problems[0]}")
        details = {
            "familySize": len(res.family),
            "familyMethod": res.family.method,
            "levels": res.levels,
            "sqrtK": math.sqrt(g.k),
            "cBound": c_value(h1, g.h) * math.sqrt(g.k),
            "bound260": (g.h - h1) * math.sqrt(g.k) / 260,
            "measuredRatio": len(res.family) / math.sqrt(g.k),
            "prefix": perm.prefix(res.prefix_len),
        }
        branch, h2, length = "td", None, res.prefix_len
    else:
        if not h0 + ceil_log3(g.k) + 1 < h1:
            raise CapacityError(
                f"permutation is not td and the gap h0 + ceil(log3 k) + 1 < h1 fails "
                f"(h0={h0}, h1={h1}, k={g.k})"
            )
        failing = next(r for r in records if r.untouched is None)
        t1, bu_len = bu_from_td_failure(perm, h0, h1, failing.t, failing.prefix_len)
        h2 = g.height(t1)
        if not is_bu_witness(perm, h0, t1, bu_len):
            raise ContractError("constructed bu witness fails the bu definition")
        length = easy_prefix(perm, t1, h0, bu_len + 1)
        triple, parts = assemble_bottom_up(g, perm.prefix_set(length), t1, theta, h0)
        details = {
            "buNode": t1,
            "buPrefixLen": bu_len,
            "free": parts.free,
            "root": parts.root,
            "expectedRank": 3 ** (h2 - h0 - 2) - 1,
            "prefix": perm.prefix(length),
        }
        branch = "bu"
    report = validate_triple(g, triple)
    if not report.ok:
        raise ContractError(f"{branch} triple fails conditions {report.failures()}")
    return Analysis(branch, h0, h1, h2, length, triple, triple.rank, report, details)


def anchor_h0(k, theta):
    """Smallest h0 >= 1 whose anchor subtrees have more than theta vertices."""
    h0 = 1
    while m_of(h0 - 1) * k <= theta:
        h0 += 1
    return h0
