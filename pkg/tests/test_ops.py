import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from builders import cube_diagram, nf_example, two_truss, vertex_atom
from trusskit.generate import random_tower
from trusskit.normalize import degeneracy_quotients, normalize
from trusskit.ops import (
    CHAIN1,
    atom_at,
    atoms,
    cells,
    classify,
    compactify,
    compose,
    dualize,
    factorize,
    grid,
    identity_bordism,
    inert_embedding,
    is_atom,
    is_bordism,
    is_identity_bordism,
    is_subtruss_set,
    reachable_set,
    retract,
    sdepth,
    shape,
    shape_bordism,
    side,
    smallest_subtruss,
    source,
    stacked_product,
    stype,
    subtower,
    target,
)
from trusskit.truss import CLOSED, OPEN, TrussError, validate

seeds = st.integers(0, 2**31)


@settings(max_examples=50)
@given(seeds, st.integers(1, 3), st.sampled_from([OPEN, CLOSED]))
def test_dualize_is_an_involution_with_opposite_poset(seed, dim, flavor):
    T = random_tower(seed, dim=dim, max_fiber=2, flavor=flavor, labels=3, max_size=60)
    D = dualize(T)
    assert D.flavor != T.flavor
    assert validate(D) == []
    assert dualize(D) == T
    assert D.top == T.top.opposite()


@settings(max_examples=40)
@given(seeds, st.integers(1, 3))
def test_compactify_and_retract_are_inverse(seed, dim):
    T = random_tower(seed, dim=dim, max_fiber=2, labels=2, max_size=60)
    X = compactify(T)
    assert X.flavor == CLOSED and validate(X) == []
    assert retract(X) == T


def test_retract_rejects_point_fibres():
    with pytest.raises(TrussError):
        retract(grid(CLOSED, 0))


def test_grid_sizes():
    for ms in itertools.product(range(3), repeat=2):
        G = grid(OPEN, *ms)
        assert G.size() == (2 * ms[0] + 1) * (2 * ms[1] + 1)
        assert dualize(G) == grid(CLOSED, *ms)
    assert grid(OPEN, 1, 2) != grid(OPEN, 2, 1)
    assert stacked_product(grid(OPEN, 1), grid(OPEN, 2)) == grid(OPEN, 1, 2)


def test_bordism_endpoints_and_identity():
    T = random_tower(5, dim=2, max_fiber=2)
    f = identity_bordism(T)
    assert is_bordism(f) and source(f) == target(f) == T
    assert is_identity_bordism(f)
    c = classify(f)
    assert c.degeneracy and c.inert and c.active
    assert compose(f, f) == f


@settings(max_examples=30)
@given(seeds)
def test_compose_with_identities(seed):
    f = random_tower(seed, dim=2, max_fiber=2, base=CHAIN1, max_size=40)
    assert compose(identity_bordism(source(f)), f) == f
    assert compose(f, identity_bordism(target(f))) == f


def test_compose_is_associative_on_degeneracy_chain():
    T = nf_example().unlabelled()
    qs = [Q for Q in degeneracy_quotients(T, size_bound=20)]
    # a chain [3] -> [2] -> [1] -> [0] of degeneracies
    steps = []
    cur = T
    while cur.fibers[0][0] > 0:
        for Q, bord in degeneracy_quotients(cur, size_bound=20):
            if Q.fibers[0][0] == cur.fibers[0][0] - 1:
                steps.append(bord)
                cur = Q
                break
    assert len(steps) == 3 and qs
    a, b, c = steps
    assert compose(compose(a, b), c) == compose(a, compose(b, c))
    assert classify(compose(a, b)).degeneracy
    assert normalize(T).nf == grid(OPEN, 0)


def test_classify_examples():
    X, S, frame = cube_diagram()
    c = classify(frame)
    # the frame sees one of the two wires only
    assert not c.active and not c.degeneracy and not c.inert
    assert classify(factorize(frame).active).active
    A = vertex_atom()
    sub = subtower(A, A.top.upward_closure({A.element("r0/r0")}))
    emb = inert_embedding(sub)
    c = classify(emb)
    assert c.inert and not c.active


def test_closed_inert_embedding_dualizes():
    X = grid(CLOSED, 1, 1)
    sub = subtower(X, X.top.downward_closure({X.element("r0/s0")}))
    e = inert_embedding(sub)
    assert e.flavor == CLOSED and classify(e).inert
    assert source(e) == X and target(e) == sub.sub


def test_subtruss_sets():
    G = grid(OPEN, 2)
    assert is_subtruss_set(G, {G.element("r1")})
    assert not is_subtruss_set(G, {G.element("s0")})
    assert is_subtruss_set(G, {G.element(p) for p in ("r0", "s0", "r1")})
    assert not is_subtruss_set(G, {G.element(p) for p in ("r0", "r2")})
    Z = smallest_subtruss(G, {G.element("r0"), G.element("r2")})
    assert Z.sub == G


@settings(max_examples=40)
@given(seeds)
def test_factorization_recomposes(seed):
    f = random_tower(seed, dim=2, max_fiber=2, base=CHAIN1, max_size=40)
    fz = factorize(f)
    assert classify(fz.active).active
    assert classify(fz.inert).inert
    assert compose(fz.active, fz.inert) == f
    assert reachable_set(f) <= fz.middle.top_set


def test_factorize_degenerate_case():
    f = random_tower(17, dim=1, max_fiber=3, base=CHAIN1)
    fz = factorize(f)
    assert compose(fz.active, fz.inert) == f


def test_atoms_of_grid():
    G = grid(OPEN, 1, 1)
    A = atoms(G)
    assert len(A) == 9
    types = sorted(stype(a) for a in A.values())
    assert types == [(0, 0)] * 4 + [(0, 1)] * 2 + [(1, 0)] * 2 + [(1, 1)]
    assert all(is_atom(a) for a in A.values())
    assert A[G.element("s0/s0")] == G
    assert shape(A[G.element("s0/s0")]) == G
    C = cells(grid(CLOSED, 1, 1))
    assert len(C) == 9


def test_atom_coordinates():
    G = grid(OPEN, 1, 0)
    vertical = atom_at(G, G.element("r0/s0"))
    assert stype(vertical) == (1, 0)
    assert sdepth(vertical) == 1
    A = vertex_atom()
    assert stype(A) == (1, 1) and sdepth(A) == 0


@settings(max_examples=30)
@given(seeds)
def test_atoms_cover_and_shape_bordisms_are_active(seed):
    T = random_tower(seed, dim=2, max_fiber=2, max_size=40)
    seen = set()
    for p, A in atoms(T).items():
        assert A.top.minimum() is not None
        seen.add(p)
        b = shape_bordism(A)
        assert validate(b) == [] and classify(b).active
    assert seen == set(T.top.elements)


def test_shape_bordism_cross_maps_preserve_endpoints():
    A = two_truss(1, (2, 1, 1), [(0, 2), (0, 1)])
    b = shape_bordism(A)
    for (x, y), v in b.transitions[1].items():
        if side(x) == 0 and side(y) == 1:
            assert v[0] == 0 and v[-1] == A.fibers[1][(0,) + y[1:]]
