"""Decision-DNNF circuits: free decision diagrams with decomposable AND nodes.

Nodes are tuples: ``("T",)``, ``("F",)``, ``("D", var, child0, child1)`` and
``("A", left, right)``. Variables are integers ``1..num_vars``; children are
node indices. Variable supports are cached as integer bit masks (bit ``x`` set
for variable ``x``).
"""

from dataclasses import dataclass, field

from .assignments import Assignment, AssignmentSet, product, product_all
from .errors import CapacityError, ContractError, StructuralError

SEMANTICS_CAP = 18


def bits(mask):
    """Variables encoded in a support mask, ascending."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def popcount(mask):
    return bin(mask).count("1")


class DecisionDnnf:
    def __init__(self, nodes, source=None, num_vars=0, names=None):
        self.nodes = [tuple(n) for n in nodes]
        if not self.nodes:
            raise StructuralError("circuit has no nodes")
        self.source = len(self.nodes) - 1 if source is None else source
        self.num_vars = num_vars
        self.names = list(names) if names is not None else None
        self._check_records()
        self.order = self._topological()
        self.mask = [0] * len(self.nodes)
        for u in self.order:
            n = self.nodes[u]
            if n[0] == "D":
                self.mask[u] = (1 << n[1]) | self.mask[n[2]] | self.mask[n[3]]
            elif n[0] == "A":
                self.mask[u] = self.mask[n[1]] | self.mask[n[2]]

    def _check_records(self):
        size = len(self.nodes)
        if not 0 <= self.source < size:
            raise StructuralError(f"source {self.source} out of range", node=self.source)
        for u, n in enumerate(self.nodes):
            kind = n[0] if n else None
            if kind in ("T", "F") and len(n) == 1:
                continue
            if kind == "D" and len(n) == 4:
                if not 1 <= n[1] <= self.num_vars:
                    raise StructuralError(f"node {u}: variable {n[1]} out of range", node=u)
                kids = n[2:]
            elif kind == "A" and len(n) == 3:
                kids = n[1:]
            else:
                raise StructuralError(f"node {u}: malformed record {n!r}", node=u)
            for c in kids:
                if not isinstance(c, int) or not 0 <= c < size:
                    raise StructuralError(f"node {u}: child {c!r} out of range", node=u)

    def _topological(self):
        """Children-first order of all nodes; raises on a cycle."""
        state = [0] * len(self.nodes)
        order = []
        for start in range(len(self.nodes)):
            if state[start]:
                continue
            stack = [(start, 0)]
            state[start] = 1
            while stack:
                u, i = stack.pop()
                kids = self.children(u)
                if i < len(kids):
                    stack.append((u, i + 1))
                    c = kids[i]
                    if state[c] == 1:
                        raise StructuralError(f"cycle through node {c}", node=c)
                    if state[c] == 0:
                        state[c] = 1
                        stack.append((c, 0))
                else:
                    state[u] = 2
                    order.append(u)
        return order

    def __len__(self):
        return len(self.nodes)

    def kind(self, u):
        return self.nodes[u][0]

    def children(self, u):
        n = self.nodes[u]
        if n[0] == "D":
            return n[2:]
        if n[0] == "A":
            return n[1:]
        return ()

    def var(self, u):
        return self.nodes[u][1]

    def support(self, u=None):
        """Var(B_u) as a frozenset of variable indices (default: the source)."""
        return frozenset(bits(self.mask[self.source if u is None else u]))

    def support_size(self, u):
        return popcount(self.mask[u])

    def reachable(self):
        seen = {self.source}
        stack = [self.source]
        while stack:
            for c in self.children(stack.pop()):
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return seen

    def name(self, x):
        return self.names[x - 1] if self.names is not None else x

    def var_of_name(self):
        if self.names is None:
            return {x: x for x in range(1, self.num_vars + 1)}
        return {v: n + 1 for n, v in enumerate(self.names)}

    def to_vars(self, a):
        """Translate an assignment keyed by names into one keyed by indices."""
        index = self.var_of_name()
        return Assignment((index[v], b) for v, b in a.items() if v in index)

    def to_names(self, a):
        return Assignment((self.name(x), b) for x, b in a.items())

    def compact(self):
        """Copy keeping only nodes reachable from the source, children first."""
        keep = self.reachable()
        order = [u for u in self.order if u in keep]
        remap = {u: i for i, u in enumerate(order)}
        nodes = []
        for u in order:
            n = self.nodes[u]
            if n[0] == "D":
                nodes.append(("D", n[1], remap[n[2]], remap[n[3]]))
            elif n[0] == "A":
                nodes.append(("A", remap[n[1]], remap[n[2]]))
            else:
                nodes.append(n)
        return DecisionDnnf(nodes, len(nodes) - 1, self.num_vars, self.names)


@dataclass(frozen=True)
class SizeClass:
    """Node u is small iff |Var(B_u)| <= theta."""

    theta: int

    @classmethod
    def from_alpha(cls, n, alpha):
        return cls(int(n ** alpha + 1e-9))

    def is_small(self, b, u):
        return b.support_size(u) <= self.theta

    def is_large(self, b, u):
        return b.support_size(u) > self.theta


@dataclass
class ValidationReport:
    acyclic: bool = True
    single_source: bool = True
    sink_labels: bool = True
    read_once: bool = True
    decomposable: bool = True
    imbalanced: bool = True
    balanced_nodes: list = field(default_factory=list)
    offenders: dict = field(default_factory=dict)

    @property
    def ok(self):
        return all((self.acyclic, self.single_source, self.sink_labels,
                    self.read_once, self.decomposable, self.imbalanced))

    def to_json(self):
        return {
            "ok": self.ok,
            "acyclic": self.acyclic,
            "single_source": self.single_source,
            "sink_labels": self.sink_labels,
            "read_once": self.read_once,
            "decomposable": self.decomposable,
            "imbalanced": self.imbalanced,
            "balanced_nodes": self.balanced_nodes,
            "offenders": self.offenders,
        }


def validate(b, sc=None):
    """Check the structural conditions of a Decision-DNNF and gate imbalance."""
    r = ValidationReport()
    keep = b.reachable()
    if len(keep) != len(b.nodes):
        r.single_source = False
        r.offenders["single_source"] = min(set(range(len(b.nodes))) - keep)
    sinks = {"T": [], "F": []}
    for u in sorted(keep):
        n = b.nodes[u]
        if n[0] in sinks:
            sinks[n[0]].append(u)
        elif n[0] == "D":
            if (b.mask[n[2]] | b.mask[n[3]]) >> n[1] & 1:
                r.read_once = False
                r.offenders.setdefault("read_once", u)
        else:
            if b.mask[n[1]] & b.mask[n[2]]:
                r.decomposable = False
                r.offenders.setdefault("decomposable", u)
            if sc is not None and sc.is_large(b, n[1]) and sc.is_large(b, n[2]):
                r.balanced_nodes.append(u)
    if len(sinks["T"]) > 1 or len(sinks["F"]) > 1:
        r.sink_labels = False
        r.offenders["sink_labels"] = (sinks["T"][1:] + sinks["F"][1:])[0]
    if r.balanced_nodes:
        r.imbalanced = False
        r.offenders["imbalanced"] = r.balanced_nodes[0]
    return r


def semantics(b, u=None, cap=SEMANTICS_CAP):
    """S(B_u) as an explicit assignment set over Var(B_u)."""
    u = b.source if u is None else u
    if b.support_size(u) > cap:
        raise CapacityError(f"support of {b.support_size(u)} variables exceeds cap {cap}")
    return _sem(b, u, {})


def _sem(b, u, memo):
    if u in memo:
        return memo[u]
    n = b.nodes[u]
    if n[0] == "T":
        out = AssignmentSet.unit()
    elif n[0] == "F":
        out = AssignmentSet.empty()
    elif n[0] == "A":
        out = product(_sem(b, n[1], memo), _sem(b, n[2], memo))
    else:
        x, c0, c1 = n[1], n[2], n[3]
        v0 = bits(b.mask[c1] & ~b.mask[c0])
        v1 = bits(b.mask[c0] & ~b.mask[c1])
        lo = product_all([AssignmentSet((x,), [(0,)]), _sem(b, c0, memo), AssignmentSet.full(v0)])
        hi = product_all([AssignmentSet((x,), [(1,)]), _sem(b, c1, memo), AssignmentSet.full(v1)])
        out = AssignmentSet(lo.variables, lo.rows | hi.rows)
    memo[u] = out
    return out


def model_count(b, u=None, given=None, padded=False):
    """|S(B_u)|, optionally counting only members consistent with ``given``.

    With ``padded`` the count is taken over all ``num_vars`` variables, the
    ones outside Var(B_u) being free.
    """
    u = b.source if u is None else u
    given = dict(given or {})
    gmask = 0
    for x in given:
        gmask |= 1 << x
    counts = {}
    for w in b.order:
        n = b.nodes[w]
        if n[0] == "T":
            c = 1
        elif n[0] == "F":
            c = 0
        elif n[0] == "A":
            c = counts[n[1]] * counts[n[2]]
        else:
            x, c0, c1 = n[1], n[2], n[3]
            pad0 = popcount(b.mask[c1] & ~b.mask[c0] & ~gmask)
            pad1 = popcount(b.mask[c0] & ~b.mask[c1] & ~gmask)
            c = 0
            if given.get(x, 0) == 0:
                c += counts[c0] << pad0
            if given.get(x, 1) == 1:
                c += counts[c1] << pad1
        counts[w] = c
    total = counts[u]
    if padded:
        outside = ((1 << (b.num_vars + 1)) - 2) & ~b.mask[u] & ~gmask
        total <<= popcount(outside)
    return total


def find_model(b, given=None, u=None):
    """Some member of S(B_u) extending ``given`` restricted to Var(B_u), or None."""
    u = b.source if u is None else u
    given = dict(given or {})
    if model_count(b, u, given) == 0:
        return None
    out = {}
    stack = [u]
    while stack:
        w = stack.pop()
        n = b.nodes[w]
        if n[0] == "A":
            stack.extend((n[1], n[2]))
        elif n[0] == "D":
            x, c0, c1 = n[1], n[2], n[3]
            choice = given.get(x)
            if choice is None:
                choice = 0 if model_count(b, c0, given) > 0 else 1
            elif model_count(b, (c0, c1)[choice], given) == 0:
                raise ContractError("inconsistent counts while extracting a model")
            out[x] = choice
            stack.append((c0, c1)[choice])
    for x in bits(b.mask[u]):
        if x not in out:
            out[x] = given.get(x, 1)
    return Assignment(out)


@dataclass(frozen=True)
class PathProfile:
    nodes: tuple
    steps: tuple
    variables: frozenset
    order: tuple
    assignment: Assignment
    junctions: tuple
    alternatives: tuple
    v0: frozenset
    end: int


def path_from_steps(b, steps):
    """Nodes visited by following child choices (0/1) from the source."""
    nodes = [b.source]
    for s in steps:
        kids = b.children(nodes[-1])
        if not kids or s not in (0, 1):
            raise ContractError(f"step {s!r} is not available at node {nodes[-1]}")
        nodes.append(kids[s])
    return tuple(nodes)


def path_profile(b, steps):
    """Var(P), π(P), a(P), junctions, Alt(P), V0(P), u(P) of a target path.

    The path is given as child choices from the source; choosing by position
    keeps ``D(x, c, c)`` unambiguous.
    """
    steps = tuple(steps)
    nodes = path_from_steps(b, steps)
    order = []
    pairs = []
    junctions = []
    alts = []
    for w, s in zip(nodes, steps):
        n = b.nodes[w]
        if n[0] == "D":
            order.append(n[1])
            pairs.append((n[1], s))
        else:
            junctions.append(w)
            alts.append(n[2] if s == 0 else n[1])
    end = nodes[-1]
    covered = b.mask[end]
    for v in alts:
        covered |= b.mask[v]
    pmask = 0
    for x in order:
        pmask |= 1 << x
    v0 = bits(b.mask[b.source] & ~covered & ~pmask)
    return PathProfile(
        nodes=nodes,
        steps=steps,
        variables=frozenset(order),
        order=tuple(order),
        assignment=Assignment(pairs),
        junctions=tuple(junctions),
        alternatives=tuple(alts),
        v0=frozenset(v0),
        end=end,
    )


def restriction_decomposition(b, steps, cap=SEMANTICS_CAP):
    """S(B_{u(P)}) × Π_{v∈Alt(P)} S(B_v) × {0,1}^{V0(P)}."""
    p = path_profile(b, steps)
    if model_count(b, given=p.assignment) == 0:
        raise ContractError("a(P) does not extend to a model of B")
    parts = [semantics(b, p.end, cap)]
    parts += [semantics(b, v, cap) for v in p.alternatives]
    parts.append(AssignmentSet.full(p.v0))
    return product_all(parts)


def mainstream_path(b, g, sc):
    """Walk from the source while the current node is large.

    At a decision node follow ``g``; at an AND node go to the large child, or
    to the left child when both are small.
    """
    steps = []
    u = b.source
    while sc.is_large(b, u):
        n = b.nodes[u]
        if n[0] == "D":
            s = g[n[1]]
        elif n[0] == "A":
            s = 1 if sc.is_large(b, n[2]) and not sc.is_large(b, n[1]) else 0
        else:
            break
        steps.append(s)
        u = b.children(u)[s]
    return path_profile(b, steps)


def is_mainstream(b, profile, sc):
    return all(sc.is_small(b, v) for v in profile.alternatives)


def carried_set(b, g):
    """All nodes u such that some target path ending at u has a(P) ⊆ g."""
    seen = {b.source}
    stack = [b.source]
    while stack:
        u = stack.pop()
        n = b.nodes[u]
        if n[0] == "D":
            bit = g.get(n[1])
            nxt = () if bit is None else (n[2 + bit],)
        elif n[0] == "A":
            nxt = n[1:]
        else:
            nxt = ()
        for c in nxt:
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return seen


def carried_through(b, g, u):
    return u in carried_set(b, g)


def parse_ddnnf(text):
    """Strict reader for the ``ddnnf`` text format."""
    if "\r" in text:
        raise StructuralError("carriage returns are not allowed")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise StructuralError("empty file")
    header = lines[0].split(" ")
    if len(header) != 3 or header[0] != "ddnnf" or not all(_is_uint(t) for t in header[1:]):
        raise StructuralError(f"bad header {lines[0]!r}")
    size, nv = int(header[1]), int(header[2])
    if size < 1 or len(lines) - 1 != size:
        raise StructuralError(f"header announces {size} nodes, found {len(lines) - 1}")
    nodes = []
    for u, line in enumerate(lines[1:]):
        toks = line.split(" ")
        if any(t == "" for t in toks):
            raise StructuralError(f"node {u}: irregular spacing", node=u)
        kind = toks[0]
        nums = toks[1:]
        arity = {"T": 0, "F": 0, "D": 3, "A": 2}.get(kind)
        if arity is None or len(nums) != arity or not all(_is_uint(t) for t in nums):
            raise StructuralError(f"node {u}: malformed line {line!r}", node=u)
        nums = [int(t) for t in nums]
        kids = nums[1:] if kind == "D" else nums
        if any(c >= u for c in kids):
            raise StructuralError(f"node {u}: child does not precede its parent", node=u)
        if kind == "D" and not 1 <= nums[0] <= nv:
            raise StructuralError(f"node {u}: variable {nums[0]} out of range", node=u)
        nodes.append((kind, *nums))
    return DecisionDnnf(nodes, len(nodes) - 1, nv)


def _is_uint(t):
    return t.isdigit() and (t == "0" or not t.startswith("0"))


def write_ddnnf(b):
    c = b.compact()
    out = [f"ddnnf {len(c.nodes)} {c.num_vars}"]
    for n in c.nodes:
        out.append(" ".join(str(x) for x in n))
    return "\n".join(out) + "\n"
