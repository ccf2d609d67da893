from itertools import combinations, product as iproduct

import pytest
from hypothesis import given, settings, strategies as st

from dnnflab.assignments import (
    EMPTY,
    Assignment,
    AssignmentSet,
    breaks,
    finest_partition,
    is_product_split,
    product,
    project,
    restrict,
)
from dnnflab.errors import CapacityError, UndefinedPartitionError, VariableCollisionError


def A(**kw):
    return Assignment(kw)


def H(universe, *members):
    return AssignmentSet.from_assignments(universe, [Assignment(m) for m in members])


def bitset(names, *words):
    """Assignment set over ``names`` from bit strings such as "01"."""
    return AssignmentSet.from_assignments(
        names, [Assignment(zip(names, map(int, w))) for w in words])


# project

def test_project_on_intersection():
    assert project(A(x1=1, x2=0), {"x1", "x3"}) == A(x1=1)


def test_project_to_empty_set():
    assert project(A(x1=1), set()) == EMPTY


def test_project_keeps_matching_pairs():
    assert project(A(x1=0, x2=0, x3=1), {"x2", "x3"}) == A(x2=0, x3=1)


def test_assignment_rejects_conflicting_bindings():
    with pytest.raises(ValueError):
        Assignment([("x", 0), ("x", 1)])


# restrict

WORKED = H(["x1", "x2", "x3"],
           {"x1": 0, "x2": 0, "x3": 1},
           {"x1": 1, "x2": 1, "x3": 0})


def test_restrict_worked_example():
    r = restrict(WORKED, A(x1=1))
    assert r == H(["x2", "x3"], {"x2": 1, "x3": 0})


def test_restrict_ignores_foreign_variables():
    assert restrict(WORKED, A(x1=1, x4=0)) == restrict(WORKED, A(x1=1))


def test_restrict_by_empty_assignment():
    assert restrict(WORKED, EMPTY) == WORKED


def test_empty_set_differs_from_unit():
    assert AssignmentSet.empty() != AssignmentSet.unit()
    assert len(AssignmentSet.unit()) == 1


# product

def test_product_with_unit_is_identity():
    h1 = AssignmentSet.full(["x"])
    assert product(h1, AssignmentSet.unit()) == h1


def test_product_with_empty_is_empty():
    h1 = AssignmentSet.full(["x"])
    r = product(h1, AssignmentSet.empty(["y"]))
    assert len(r) == 0


def test_product_of_singletons():
    r = product(H(["x"], {"x": 1}), H(["y"], {"y": 0}))
    assert r == H(["x", "y"], {"x": 1, "y": 0})


def test_product_collision():
    with pytest.raises(VariableCollisionError):
        product(AssignmentSet.full(["x"]), AssignmentSet.full(["x", "y"]))


# is_product_split and finest_partition

def test_split_equal_pair_fails():
    assert not is_product_split(bitset(["x", "y"], "00", "11"), {"x"})


def test_split_full_cube():
    assert is_product_split(AssignmentSet.full(["x", "y"]), {"x"})


def test_split_singleton():
    assert is_product_split(bitset(["x", "y", "z"], "010"), {"x", "z"})


def test_split_requires_subset():
    with pytest.raises(ValueError):
        is_product_split(AssignmentSet.full(["x"]), {"q"})


def _blocks(p):
    return {frozenset(b) for b in p}


def test_finest_partition_full_cube():
    p = finest_partition(AssignmentSet.full(["x", "y", "z"]))
    assert _blocks(p) == {frozenset("x"), frozenset("y"), frozenset("z")}


def test_finest_partition_correlated_pair():
    assert _blocks(finest_partition(bitset(["x", "y"], "00", "11"))) == {frozenset("xy")}


def test_finest_partition_recovers_product():
    h = product(bitset(["x", "y"], "00", "11"), AssignmentSet.full(["z"]))
    assert _blocks(finest_partition(h)) == {frozenset("xy"), frozenset("z")}


def test_finest_partition_empty_set():
    with pytest.raises(UndefinedPartitionError):
        finest_partition(AssignmentSet.empty(["x"]))


def test_finest_partition_capacity():
    with pytest.raises(CapacityError):
        finest_partition(H([f"v{i}" for i in range(21)], {f"v{i}": 0 for i in range(21)}))


# breaks

def _worked_product():
    h1 = bitset(["x1", "x2"], "00", "11")
    h2 = bitset(["x3", "x4"], "01", "10")
    return product(h1, h2)


def test_breaks_across_blocks():
    assert breaks(_worked_product(), {"x2", "x3"})


def test_does_not_break_inside_block():
    assert not breaks(_worked_product(), {"x1", "x2"})


def test_singleton_never_broken():
    assert not breaks(_worked_product(), {"x3"})


# properties

NAMES = [f"x{i}" for i in range(8)]


@st.composite
def assignment_sets(draw, max_vars=6):
    n = draw(st.integers(0, max_vars))
    names = NAMES[:n]
    rows = draw(st.sets(st.tuples(*[st.integers(0, 1)] * n), max_size=2 ** n)) if n else draw(
        st.sets(st.just(()), max_size=1))
    return AssignmentSet(names, rows)


@st.composite
def partial_assignments(draw, names=NAMES):
    chosen = draw(st.lists(st.sampled_from(names), unique=True, max_size=len(names)))
    return Assignment((v, draw(st.integers(0, 1))) for v in chosen)


def _explicit_restrict(h, a):
    out = []
    pa = project(a, h.variables)
    for b in h:
        if pa.issubset(b):
            out.append(b.minus(pa))
    return AssignmentSet.from_assignments(set(h.variables) - a.variables, out)


@given(assignment_sets(), partial_assignments())
def test_restrict_matches_definition(h, a):
    assert restrict(h, a) == _explicit_restrict(h, a)


@given(partial_assignments(), st.sets(st.sampled_from(NAMES)), st.sets(st.sampled_from(NAMES)))
def test_project_composes(a, y, z):
    assert project(project(a, y), z) == project(a, y & z)


@settings(max_examples=150)
@given(st.data())
def test_restrict_distributes_over_product(data):
    n1 = data.draw(st.integers(0, 5))
    n2 = data.draw(st.integers(0, 5))
    names1, names2 = NAMES[:n1], [f"y{i}" for i in range(n2)]
    h1 = AssignmentSet(names1, data.draw(st.sets(st.tuples(*[st.integers(0, 1)] * n1), max_size=8)))
    h2 = AssignmentSet(names2, data.draw(st.sets(st.tuples(*[st.integers(0, 1)] * n2), max_size=8)))
    a = data.draw(partial_assignments(names1 or ["x0"]))
    a = project(a, names1)
    assert restrict(product(h1, h2), a) == product(restrict(h1, a), h2)


def _explicit_product_equal(h, s):
    left = h.project(s)
    right = h.project(set(h.variables) - set(s))
    members = {a.union(b) for a in left for b in right}
    return set(h) == members


@settings(max_examples=200)
@given(assignment_sets(max_vars=6), st.data())
def test_split_cardinality_matches_explicit_product(h, data):
    s = data.draw(st.sets(st.sampled_from(h.variables))) if h.variables else set()
    assert is_product_split(h, s) == _explicit_product_equal(h, s)


@settings(max_examples=200)
@given(assignment_sets(max_vars=5))
def test_finest_partition_is_finest_product(h):
    if len(h) == 0:
        return
    blocks = finest_partition(h)
    assert set().union(*map(set, blocks)) == set(h.variables)
    # the blocks factor h
    prod = AssignmentSet.unit()
    for b in blocks:
        prod = product(prod, h.project(b))
    assert prod == h
    # no block splits further
    for b in blocks:
        hb = h.project(b)
        for r in range(1, len(b)):
            for sub in combinations(sorted(b), r):
                assert not is_product_split(hb, set(sub))


@settings(max_examples=200)
@given(assignment_sets(max_vars=5), st.data())
def test_unbroken_sets_sit_in_one_block(h, data):
    if len(h) == 0 or not h.variables:
        return
    y = data.draw(st.sets(st.sampled_from(h.variables), min_size=1))
    # brute-force Definition: some product bipartition separates y
    broken = False
    vs = list(h.variables)
    for r in range(1, len(vs)):
        for sub in combinations(vs, r):
            s = set(sub)
            if is_product_split(h, s) and (y & s) and (y - s):
                broken = True
    assert breaks(h, y) == broken
    if not broken:
        assert any(y <= set(b) for b in finest_partition(h))
