"""Partial assignments and finite sets of assignments over a common universe.

An :class:`Assignment` maps variables to bits. An :class:`AssignmentSet` holds
assignments that are all total over the same finite universe. Internally the
set stores one bit tuple per member, aligned with the sorted universe, so
equality of two sets is plain structural equality.
"""

from collections.abc import Iterable, Mapping
from itertools import combinations
from operator import itemgetter

from .errors import CapacityError, UndefinedPartitionError, VariableCollisionError

FINEST_PARTITION_CAP = 20


def var_key(v):
    """Sort key that orders mixed variable identifiers deterministically."""
    if isinstance(v, bool):
        return (1, str(v))
    if isinstance(v, int):
        return (0, v)
    if isinstance(v, tuple):
        return (2, v)
    return (1, str(v))


def sorted_vars(vs):
    return tuple(sorted(vs, key=var_key))


class Assignment(Mapping):
    """An immutable map from variables to bits."""

    __slots__ = ("_items", "_map", "_hash")

    def __init__(self, bindings=()):
        if isinstance(bindings, Mapping):
            pairs = bindings.items()
        else:
            pairs = bindings
        m = {}
        for var, bit in pairs:
            if bit not in (0, 1):
                raise ValueError(f"bit for {var!r} must be 0 or 1, got {bit!r}")
            if var in m and m[var] != bit:
                raise ValueError(f"variable {var!r} bound twice with different bits")
            m[var] = int(bit)
        self._map = m
        self._items = tuple((v, m[v]) for v in sorted_vars(m))
        self._hash = hash(self._items)

    def __getitem__(self, var):
        return self._map[var]

    def __iter__(self):
        return (v for v, _ in self._items)

    def __len__(self):
        return len(self._items)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if isinstance(other, Assignment):
            return self._items == other._items
        if isinstance(other, Mapping):
            return self._map == dict(other)
        return NotImplemented

    def __repr__(self):
        body = ", ".join(f"({v!r},{b})" for v, b in self._items)
        return "{" + body + "}"

    @property
    def variables(self):
        return frozenset(self._map)

    def pairs(self):
        return self._items

    def issubset(self, other):
        """True if every binding of self also appears in ``other``."""
        return all(other.get(v) == b for v, b in self._items)

    def union(self, other):
        return Assignment(self._items + tuple(other.items()))

    def minus(self, other):
        """Remove the bindings that also occur in ``other`` (set difference of pairs)."""
        return Assignment((v, b) for v, b in self._items if other.get(v) != b)

    def positive(self):
        return frozenset(v for v, b in self._items if b == 1)

    def negative(self):
        return frozenset(v for v, b in self._items if b == 0)


EMPTY = Assignment()


def project(a, ys):
    """Restrict ``a`` to the variables in ``ys``; ``ys`` may contain unrelated names."""
    ys = ys if isinstance(ys, (set, frozenset)) else set(ys)
    return Assignment((v, b) for v, b in a.pairs() if v in ys)


class AssignmentSet:
    """A finite set of assignments, each total over ``universe``."""

    __slots__ = ("variables", "rows", "_pos")

    def __init__(self, universe, rows=()):
        self.variables = sorted_vars(set(universe))
        self._pos = {v: i for i, v in enumerate(self.variables)}
        n = len(self.variables)
        checked = set()
        for r in rows:
            r = tuple(int(b) for b in r)
            if len(r) != n:
                raise ValueError("row length does not match universe size")
            checked.add(r)
        self.rows = frozenset(checked)

    @classmethod
    def _trusted(cls, variables, rows):
        """Build from already sorted variables and validated bit tuples."""
        out = cls.__new__(cls)
        out.variables = tuple(variables)
        out._pos = {v: i for i, v in enumerate(out.variables)}
        out.rows = frozenset(rows)
        return out

    @classmethod
    def from_assignments(cls, universe, members: Iterable):
        universe = set(universe)
        order = sorted_vars(universe)
        rows = []
        for a in members:
            if set(a) != universe:
                raise ValueError(f"member {a!r} is not total over the universe")
            rows.append(tuple(a[v] for v in order))
        return cls(universe, rows)

    @classmethod
    def full(cls, universe):
        """All 2^|universe| assignments."""
        order = sorted_vars(set(universe))
        n = len(order)
        rows = [tuple((m >> (n - 1 - i)) & 1 for i in range(n)) for m in range(1 << n)]
        return cls(order, rows)

    @classmethod
    def unit(cls):
        """The set {∅}: one empty assignment over the empty universe."""
        return cls((), [()])

    @classmethod
    def empty(cls, universe=()):
        return cls(universe, [])

    @property
    def universe(self):
        return frozenset(self.variables)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        for r in sorted(self.rows):
            yield Assignment(zip(self.variables, r))

    def __contains__(self, a):
        if set(a) != set(self.variables):
            return False
        return tuple(a[v] for v in self.variables) in self.rows

    def __eq__(self, other):
        if not isinstance(other, AssignmentSet):
            return NotImplemented
        return self.variables == other.variables and self.rows == other.rows

    def __hash__(self):
        return hash((self.variables, self.rows))

    def __repr__(self):
        return f"AssignmentSet(universe={list(self.variables)!r}, size={len(self.rows)})"

    def project(self, ys):
        """Proj(H, Y): the set of projections of members onto ``ys``."""
        ys = set(ys)
        keep = [i for i, v in enumerate(self.variables) if v in ys]
        names = [self.variables[i] for i in keep]
        return AssignmentSet._trusted(names, _project_rows(self.rows, keep))


def _project_rows(rows, keep):
    if not keep:
        return {()} if rows else set()
    if len(keep) == 1:
        i = keep[0]
        return {(r[i],) for r in rows}
    get = itemgetter(*keep)
    return set(map(get, rows))


def project_set(h, ys):
    return h.project(ys)


def restrict(h, a):
    """H|_a: members compatible with ``a``, with a's variables removed."""
    fixed = [(h._pos[v], b) for v, b in a.pairs() if v in h._pos]
    fixed_idx = {i for i, _ in fixed}
    keep = [i for i in range(len(h.variables)) if i not in fixed_idx]
    out = set()
    for r in h.rows:
        if all(r[i] == b for i, b in fixed):
            out.add(tuple(r[i] for i in keep))
    return AssignmentSet._trusted([h.variables[i] for i in keep], out)


def product(h1, h2):
    """H1 × H2 over disjoint universes."""
    shared = set(h1.variables) & set(h2.variables)
    if shared:
        raise VariableCollisionError(f"universes overlap on {sorted_vars(shared)!r}")
    names = list(h1.variables) + list(h2.variables)
    order = sorted_vars(names)
    src = {v: i for i, v in enumerate(names)}
    perm = [src[v] for v in order]
    rows = set()
    for r1 in h1.rows:
        for r2 in h2.rows:
            joined = r1 + r2
            rows.add(tuple(joined[i] for i in perm))
    return AssignmentSet._trusted(order, rows)


def product_all(sets):
    out = AssignmentSet.unit()
    for s in sets:
        out = product(out, s)
    return out


def is_product_split(h, s):
    """Decide whether H = Proj(H,S) × Proj(H, Var(H)∖S).

    H always sits inside that product, so comparing sizes suffices.
    """
    s = set(s)
    if not s <= set(h.variables):
        raise ValueError("split set must be a subset of the universe")
    inside = [i for i, v in enumerate(h.variables) if v in s]
    outside = [i for i, v in enumerate(h.variables) if v not in s]
    left = len(_project_rows(h.rows, inside))
    return len(h) == left * len(_project_rows(h.rows, outside))


def finest_partition(h):
    """The unique finest partition of Var(H) into blocks whose projections multiply to H."""
    if len(h) == 0:
        raise UndefinedPartitionError("the empty set has no product partition")
    if len(h.variables) > FINEST_PARTITION_CAP:
        raise CapacityError(
            f"finest_partition supports at most {FINEST_PARTITION_CAP} variables, "
            f"got {len(h.variables)}"
        )
    blocks = []
    _split(h, list(h.variables), blocks)
    return sorted((frozenset(b) for b in blocks), key=lambda b: var_key(min(b, key=var_key)))


def _split(h, vs, out):
    # Smallest factor containing the first variable, found by increasing size,
    # is a finest block; recurse on the remainder.
    if not vs:
        return
    first, others = vs[0], vs[1:]
    sub = h.project(vs)
    for size in range(0, len(others)):
        for extra in combinations(others, size):
            block = {first, *extra}
            if is_product_split(sub, block):
                out.append(block)
                _split(h, [v for v in vs if v not in block], out)
                return
    out.append(set(vs))


def breaks(h, ys):
    """True if some rectangle H = H1 × H2 separates two variables of ``ys``."""
    inside = set(ys) & set(h.variables)
    if len(inside) < 2 or len(h) == 0:
        # The empty set is ∅ × ∅ over any split, so it breaks every Y with two
        # variables in its universe.
        return len(h) == 0 and len(inside) >= 2
    blocks = finest_partition(h)
    return sum(1 for b in blocks if b & inside) >= 2
