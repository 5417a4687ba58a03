"""Random trusses for tests and benchmarks."""

from __future__ import annotations

import numpy as np

from .ops import POINT, build_tower, dualize
from .order import FinitePoset, enumerate_monotone
from .truss import CLOSED, OPEN, TrussError, compose_values, identity_values


def _random_level(rng, P, max_fiber, tries=50):
    """Random fibres and functorial open transitions over P, by backtracking.

    Elements are processed from the top of P down; each one picks maps to its
    upper covers that agree on every common upper bound.
    """
    order = sorted(P.elements, key=lambda x: len(P.up(x)))
    covers = {}
    for a, b in P.covers():
        covers.setdefault(a, []).append(b)
    for _ in range(tries):
        fib, tr = {}, {}
        ok = True
        for x in order:
            ups = covers.get(x, [])
            choice = None
            for n in rng.permutation(max_fiber + 1):
                choice = _pick_maps(rng, P, x, int(n), ups, fib, tr)
                if choice is not None:
                    fib[x] = int(n)
                    break
            if choice is None:
                ok = False
                break
            tr[(x, x)] = identity_values(fib[x])
            for c, v in choice.items():
                tr[(x, c)] = v
            for y in P.up(x):
                if y != x and (x, y) not in tr:
                    c = next(c for c in ups if P.leq(c, y))
                    tr[(x, y)] = compose_values(OPEN, tr[(x, c)], tr[(c, y)])
        if ok:
            return fib, tr
    raise TrussError("could not sample a functorial level")


def _pick_maps(rng, P, x, n, ups, fib, tr, budget=400):
    options = {c: enumerate_monotone(n, fib[c]) for c in ups}
    for c in options:
        rng.shuffle(options[c])
    chosen = {}
    steps = [0]

    def consistent(c, v):
        for d, w in chosen.items():
            for y in P.up(c):
                if P.leq(d, y):
                    if compose_values(OPEN, v, tr[(c, y)]) != compose_values(OPEN, w, tr[(d, y)]):
                        return False
        return True

    def go(i):
        if i == len(ups):
            return True
        c = ups[i]
        for m in options[c]:
            steps[0] += 1
            if steps[0] > budget:
                return False
            if consistent(c, m.values):
                chosen[c] = m.values
                if go(i + 1):
                    return True
                del chosen[c]
        return False

    return dict(chosen) if go(0) else None


def random_tower(rng=None, dim=2, max_fiber=2, flavor=OPEN, labels=None, max_size=None, base=POINT):
    """A random n-truss over ``base`` (default the point).

    ``labels`` is None, an int L (labels drawn from range(L)) or a callable
    taking (rng, top poset) and returning a label dict.
    """
    rng = np.random.default_rng(rng)
    T = None
    for _ in range(100):
        try:
            cand = build_tower(OPEN, base, dim, lambda k, P: _random_level(rng, P, max_fiber))
        except TrussError:
            # the lower levels left no functorial choice; start over
            continue
        T = cand
        if max_size is None or len(T.top) <= max_size:
            break
    if T is None:
        raise TrussError("could not sample a tower")
    if labels is not None:
        if callable(labels):
            lab = labels(rng, T.top)
        else:
            lab = {x: int(rng.integers(labels)) for x in T.top.elements}
        T = T.with_labels(lab)
    return dualize(T) if flavor == CLOSED else T


def random_poset(rng=None, size=4, density=0.4) -> FinitePoset:
    """A random partial order on range(size): random forward edges, closed up."""
    rng = np.random.default_rng(rng)
    pairs = [(i, j) for i in range(size) for j in range(i + 1, size) if rng.random() < density]
    perm = rng.permutation(size)
    return FinitePoset.from_relation([int(p) for p in perm], [(int(perm[i]), int(perm[j])) for i, j in pairs])


def random_level(rng, P, max_fiber=3):
    """Random functorial open fibres and transitions over P."""
    return _random_level(np.random.default_rng(rng), P, max_fiber)
