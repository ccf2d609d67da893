"""Graphs, the layered family T[h,k], the vertex-cover CNF φ(G), and helpers.

Vertices of T[h,k] are pairs ``(code, i)``: ``code`` is the child-digit string
from the root of the ternary tree (root is ``""``) and ``i`` is a 1-based
position on the path P_k. The external string form is ``"<code>:<i>"`` with the
root code written as ``"@"``.
"""

import json
from collections import deque
from itertools import product as iproduct

from .assignments import Assignment, sorted_vars, var_key
from .errors import ContractError, StructuralError


class Graph:
    """A simple undirected graph with hashable vertex identifiers."""

    def __init__(self, vertices, edges=()):
        self.adj = {v: set() for v in vertices}
        for u, v in edges:
            if u == v:
                raise StructuralError(f"self-loop at {u!r}")
            if u not in self.adj or v not in self.adj:
                raise StructuralError(f"edge ({u!r},{v!r}) references a missing vertex")
            self.adj[u].add(v)
            self.adj[v].add(u)
        self.adj = {v: frozenset(ns) for v, ns in self.adj.items()}

    @property
    def vertices(self):
        return frozenset(self.adj)

    def sorted_vertices(self):
        return sorted_vars(self.adj)

    def edges(self):
        """Each edge once, as a pair ordered by vertex sort key, in sorted order."""
        out = []
        for u in self.sorted_vertices():
            ku = var_key(u)
            for v in self.adj[u]:
                if ku < var_key(v):
                    out.append((u, v))
        out.sort(key=lambda e: (var_key(e[0]), var_key(e[1])))
        return out

    def num_edges(self):
        return sum(len(ns) for ns in self.adj.values()) // 2

    def neighbors(self, v):
        return self.adj[v]

    def degree(self, v):
        return len(self.adj[v])

    def max_degree(self):
        return max((len(ns) for ns in self.adj.values()), default=0)

    def has_edge(self, u, v):
        return v in self.adj.get(u, ())

    def neighborhood(self, vs):
        """N(S): all vertices adjacent to some vertex of S (may intersect S)."""
        out = set()
        for v in vs:
            out |= self.adj[v]
        return out

    def is_independent(self, vs):
        vs = set(vs)
        return all(not (self.adj[v] & vs) for v in vs)

    def are_adjacent(self, a, b):
        """True if some vertex of ``a`` is adjacent to some vertex of ``b``."""
        b = set(b)
        return any(self.adj[v] & b for v in a)

    def components(self, vs=None):
        """Connected components of the subgraph induced by ``vs`` (default: all)."""
        vs = set(self.adj) if vs is None else set(vs)
        seen = set()
        out = []
        for s in sorted_vars(vs):
            if s in seen:
                continue
            comp = {s}
            seen.add(s)
            queue = deque([s])
            while queue:
                x = queue.popleft()
                for y in self.adj[x]:
                    if y in vs and y not in seen:
                        seen.add(y)
                        comp.add(y)
                        queue.append(y)
            out.append(frozenset(comp))
        return out

    def is_connected(self, vs=None):
        vs = set(self.adj) if vs is None else set(vs)
        return len(vs) > 0 and len(self.components(vs)) == 1

    def induced(self, vs):
        vs = set(vs)
        return Graph(vs, [(u, v) for u, v in self.edges() if u in vs and v in vs])

    def format_vertex(self, v):
        return v if isinstance(v, str) else json.dumps(v)

    def to_json(self):
        return {
            "vertices": [self.format_vertex(v) for v in self.sorted_vertices()],
            "edges": [[self.format_vertex(u), self.format_vertex(v)] for u, v in self.edges()],
        }


def graph_from_json(data):
    """Load a graph; layered graphs (with "h" and "k" fields) come back as LayeredGraph."""
    if "h" in data and "k" in data:
        g = build_thk(int(data["h"]), int(data["k"]))
        ids = {vertex_id(v) for v in g.vertices}
        if set(data.get("vertices", ids)) != ids:
            raise StructuralError("vertex list does not match T[h,k]")
        return g
    vertices = data["vertices"]
    if len(set(vertices)) != len(vertices):
        raise StructuralError("duplicate vertex identifiers")
    return Graph(vertices, [tuple(e) for e in data["edges"]])


def path_graph(k):
    return Graph(range(1, k + 1), [(i, i + 1) for i in range(1, k)])


def cartesian_product(h1, h2):
    """H1 □ H2: vertices are pairs, edges change exactly one coordinate along an edge."""
    vertices = list(iproduct(h1.sorted_vertices(), h2.sorted_vertices()))
    edges = []
    for u, v in h1.edges():
        for w in h2.sorted_vertices():
            edges.append(((u, w), (v, w)))
    for u in h1.sorted_vertices():
        for v, w in h2.edges():
            edges.append(((u, v), (u, w)))
    return Graph(vertices, edges)


def m_of(h):
    """Number of nodes of the complete ternary tree of height h."""
    if h < 0:
        return 0
    return (3 ** (h + 1) - 1) // 2


def ternary_tree(h):
    codes = tree_codes(h)
    return Graph(codes, [(c[:-1], c) for c in codes if c])


def tree_codes(h, root=""):
    """All codes of the subtree rooted at ``root`` within T[h], in preorder."""
    out = []
    stack = [root]
    while stack:
        c = stack.pop()
        out.append(c)
        if len(c) < h:
            stack.extend(c + d for d in "210")
    return out


def vertex_id(v):
    code, i = v
    return f"{code or '@'}:{i}"


def parse_vertex_id(s):
    try:
        code, i = s.split(":")
        code = "" if code == "@" else code
        if code and set(code) - set("012"):
            raise ValueError
        return (code, int(i))
    except ValueError:
        raise StructuralError(f"malformed vertex id {s!r}") from None


def tree_distance(a, b):
    n = 0
    while n < min(len(a), len(b)) and a[n] == b[n]:
        n += 1
    return len(a) + len(b) - 2 * n


def tree_node_path(t0, t1):
    """Codes on the unique tree path from t0 to t1, both ends included."""
    n = 0
    while n < min(len(t0), len(t1)) and t0[n] == t1[n]:
        n += 1
    up = [t0[:j] for j in range(len(t0), n - 1, -1)]
    down = [t1[:j] for j in range(n + 1, len(t1) + 1)]
    return up + down


_MODES = {
    "eq": lambda x, a: x == a,
    "gt": lambda x, a: x > a,
    "lt": lambda x, a: x < a,
    "geq": lambda x, a: x >= a,
    "leq": lambda x, a: x <= a,
}


class LayeredGraph(Graph):
    """T[h,k] = T[h] □ P_k with coordinates (code, index)."""

    def __init__(self, h, k):
        if h < 0 or k < 1:
            raise ValueError("need h >= 0 and k >= 1")
        self.h = h
        self.k = k
        self.codes = tree_codes(h)
        vertices = [(c, i) for c in self.codes for i in range(1, k + 1)]
        edges = []
        for c in self.codes:
            for i in range(1, k + 1):
                if c:
                    edges.append(((c[:-1], i), (c, i)))
                if i < k:
                    edges.append(((c, i), (c, i + 1)))
        super().__init__(vertices, edges)

    def format_vertex(self, v):
        return vertex_id(v)

    def to_json(self):
        data = super().to_json()
        data["h"] = self.h
        data["k"] = self.k
        return data

    def height(self, t):
        """Height of a tree code (or of a vertex's tree coordinate)."""
        if isinstance(t, tuple):
            t = t[0]
        return self.h - len(t)

    def check_code(self, t):
        if len(t) > self.h or set(t) - set("012"):
            raise ValueError(f"invalid tree node {t!r} for height {self.h}")

    def children(self, t):
        return [t + d for d in "012"] if len(t) < self.h else []

    def tree_nodes(self, a=None, t=""):
        """Descendants of t (inclusive), optionally only those of height a."""
        self.check_code(t)
        if a is None:
            return tree_codes(self.h, t)
        depth = self.h - a
        if depth < len(t):
            return []
        return [t + "".join(s) for s in iproduct("012", repeat=depth - len(t))]

    def bag(self, t):
        """t × [k]."""
        return frozenset((t, i) for i in range(1, self.k + 1))

    def strata(self, a, mode="eq", t=""):
        """V_a, V_{>a}, ... restricted to the subtree of t."""
        if not 0 <= a <= self.h:
            raise ValueError(f"height {a} outside 0..{self.h}")
        self.check_code(t)
        test = _MODES[mode]
        return frozenset(
            (c, i)
            for c in tree_codes(self.h, t)
            if test(self.h - len(c), a)
            for i in range(1, self.k + 1)
        )

    def subtree_vertices(self, t):
        """V(h,k,t): all vertices whose tree coordinate descends from t."""
        return frozenset((c, i) for c in tree_codes(self.h, t) for i in range(1, self.k + 1))

    def subtree_family(self, a, t=""):
        """S_a(h,k,t) as a dict root -> V(h,k,root)."""
        self.check_code(t)
        if a > self.height(t):
            raise ValueError(f"height {a} exceeds height of {t!r}")
        return {r: self.subtree_vertices(r) for r in self.tree_nodes(a, t)}

    def tree_path(self, t0, t1, i, j=None):
        """P(t0,t1)×i, or the hook P(t0,t1,i,j) = t0×(i..j) + P(t0,t1)×j."""
        self.check_code(t0)
        self.check_code(t1)
        for x in (i, j):
            if x is not None and not 1 <= x <= self.k:
                raise ValueError(f"path index {x} outside 1..{self.k}")
        if j is None:
            return [(c, i) for c in tree_node_path(t0, t1)]
        step = 1 if j >= i else -1
        horizontal = [(t0, x) for x in range(i, j, step)]
        return horizontal + [(c, j) for c in tree_node_path(t0, t1)]

    def lex_order(self):
        return sorted(self.vertices)

    def bfs_order(self):
        return sorted(self.vertices, key=lambda v: (len(v[0]), v[0], v[1]))

    def dfs_order(self):
        return [(c, i) for c in self.codes for i in range(1, self.k + 1)]


def build_thk(h, k):
    return LayeredGraph(h, k)


def is_path(g, seq):
    """True if ``seq`` is a simple path in g (consecutive vertices adjacent)."""
    if len(set(seq)) != len(seq):
        return False
    return all(g.has_edge(a, b) for a, b in zip(seq, seq[1:]))


class Cnf:
    """Clauses over named variables; a literal is a pair (variable, polarity)."""

    def __init__(self, variables, clauses):
        self.variables = tuple(variables)
        self.index = {v: n + 1 for n, v in enumerate(self.variables)}
        if len(self.index) != len(self.variables):
            raise StructuralError("duplicate CNF variables")
        self.clauses = []
        for cl in clauses:
            cl = tuple(cl)
            for v, _ in cl:
                if v not in self.index:
                    raise StructuralError(f"clause mentions unknown variable {v!r}")
            self.clauses.append(cl)

    def satisfied_by(self, a):
        return all(any(a.get(v) == int(s) for v, s in cl) for cl in self.clauses)

    def falsified_by(self, a):
        """True if some clause has every literal assigned false."""
        return any(
            all(v in a and a[v] != int(s) for v, s in cl) for cl in self.clauses
        )

    def int_clauses(self):
        return [tuple(self.index[v] if s else -self.index[v] for v, s in cl) for cl in self.clauses]

    def to_dimacs(self):
        lines = [f"p cnf {len(self.variables)} {len(self.clauses)}"]
        for cl in self.int_clauses():
            lines.append(" ".join(str(x) for x in cl) + " 0")
        return "\n".join(lines) + "\n"

    def var_map(self, fmt=str):
        return {fmt(v): n for v, n in self.index.items()}


def parse_dimacs(text):
    """Parse DIMACS CNF; variables are named 1..n."""
    n = None
    clauses = []
    cur = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise StructuralError(f"bad problem line {line!r}")
            n = int(parts[2])
            continue
        if n is None:
            raise StructuralError("clause before problem line")
        for tok in line.split():
            x = int(tok)
            if x == 0:
                clauses.append(tuple(cur))
                cur = []
            else:
                if abs(x) > n:
                    raise StructuralError(f"literal {x} exceeds variable count {n}")
                cur.append((abs(x), x > 0))
    if cur:
        clauses.append(tuple(cur))
    if n is None:
        raise StructuralError("missing problem line")
    return Cnf(range(1, n + 1), clauses)


def encode_cnf(g, order=None):
    """φ(G): one positive clause (u ∨ v) per edge. Variables follow ``order``."""
    isolated = [v for v in g.sorted_vertices() if g.degree(v) == 0]
    if isolated:
        raise StructuralError(f"isolated vertex {isolated[0]!r} cannot be encoded")
    order = list(order) if order is not None else list(g.sorted_vertices())
    if set(order) != set(g.vertices) or len(order) != len(g.vertices):
        raise ValueError("variable order must list every vertex once")
    return Cnf(order, [((u, True), (v, True)) for u, v in g.edges()])


def fixed_vertices(g, a):
    """Vertices forced to 1 by a: those with a neighbor assigned 0."""
    out = set()
    for v, b in a.pairs():
        if b == 0:
            out |= g.neighbors(v)
    return frozenset(out)


def respects_clauses(g, a):
    """True if a falsifies no clause of φ(G), i.e. no edge has both ends at 0."""
    zeros = a.negative()
    return all(not (g.neighbors(v) & zeros) for v in zeros)


def extend_unfixed(g, a, u):
    """g_u: extend a by u←0 and every other unassigned vertex ←1."""
    if not respects_clauses(g, a):
        raise ContractError("assignment falsifies a clause of φ(G)")
    if u in a:
        raise ContractError(f"{u!r} is already assigned")
    if u in fixed_vertices(g, a):
        raise ContractError(f"{u!r} is fixed by the assignment")
    out = dict(a)
    for v in g.vertices:
        if v not in out:
            out[v] = 0 if v == u else 1
    return Assignment(out)


def tree_decomposition_thk(g):
    """Bags {t, parent(t)}×[k] for non-root t, joined like the tree itself."""
    if g.h == 0:
        return {"@": g.bag("")}, []
    bags = {}
    tree = []
    for t in g.codes:
        if not t:
            continue
        bags[t] = g.bag(t) | g.bag(t[:-1])
        if len(t) > 1:
            tree.append((t[:-1], t))
    tree.extend(("0", d) for d in ("1", "2"))
    return bags, tree


def decomposition_width(bags):
    return max(len(b) for b in bags.values()) - 1


def validate_tree_decomposition(g, bags, tree):
    """Generic check: bag graph is a tree, covers every vertex and edge, and each
    vertex occurs in a connected set of bags. Returns a list of problems."""
    problems = []
    names = set(bags)
    bag_graph = Graph(names, tree) if names else None
    if bag_graph is None or not bag_graph.is_connected() or len(tree) != len(names) - 1:
        problems.append("bags do not form a tree")
    covered = set().union(*bags.values()) if bags else set()
    if covered != set(g.vertices):
        problems.append("bags do not cover every vertex")
    for u, v in g.edges():
        if not any(u in b and v in b for b in bags.values()):
            problems.append(f"edge {u!r}-{v!r} not covered")
            break
    if bag_graph is not None:
        for v in g.vertices:
            holding = [n for n, b in bags.items() if v in b]
            if holding and not bag_graph.is_connected(holding):
                problems.append(f"occurrences of {v!r} are disconnected")
                break
    return problems
