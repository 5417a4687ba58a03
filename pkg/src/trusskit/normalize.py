"""Labelled normal forms of open trusses.

The normal form of a labelled open n-truss is its coarsest label-compatible
degeneracy quotient.  It is computed slice by slice:

1. every regular slice (over r_i at level 1) is normalized on its own;
2. every singular slice is normalized with enriched labels, which record for
   each element where it lands in the two normalized neighbouring regular
   slices, so the quotient stays compatible with both span legs;
3. a level-1 singular height is deleted when both legs out of its
   normalized slice are identity bordisms with matching labels.

Deletions in step 3 never enable each other, so they are applied at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product

from .ops import (
    CHAIN1,
    QuotientError,
    classify,
    cocartesian_bordism,
    is_identity_bordism,
    quotient,
    rebase,
)
from .truss import OPEN, TrussError, TrussTower, pullback, singular_positions, slice_tower, validate

_UNLABELLED = object()


@dataclass
class NormalizationResult:
    nf: TrussTower
    witness: TrussTower
    sigma: dict  # top element of the input -> top element of nf


def _surjection(m: int, deleted) -> tuple:
    """[m] -> [m - |deleted|] collapsing the singular heights in ``deleted``."""
    out, cur = [0], 0
    for i in range(m):
        if i not in deleted:
            cur += 1
        out.append(cur)
    return tuple(out)


def _in_slice(y):
    """Element of a level-1 slice corresponding to a tower element y = (b, p1, ...)."""
    return (0,) + y[2:] if len(y) > 2 else 0


def _normal_data(T: TrussTower) -> list:
    """Degeneracy data (per level, element -> surjection) of the normal form."""
    if T.dim == 0:
        return []
    m = T.fibers[0][0]
    slices = {p: slice_tower(T, (0, p)) for p in range(2 * m + 1)}
    sub = {}
    reg_sigma = {}
    for i in range(m + 1):
        p = 2 * i
        sub[p] = _normal_data(slices[p])
        _, sig, _ = quotient(slices[p], sub[p])
        reg_sigma[p] = sig[-1]
    top = T.top
    for i in range(m):
        p = 2 * i + 1
        S = slices[p]
        enriched = {}
        for x in S.top.elements:
            xt = (0, p) + (x[1:] if isinstance(x, tuple) else ())
            ups = top.up(xt)
            below = frozenset(reg_sigma[p - 1][_in_slice(y)] for y in ups if y[1] == p - 1)
            above = frozenset(reg_sigma[p + 1][_in_slice(y)] for y in ups if y[1] == p + 1)
            enriched[x] = (S.labels[x], below, above)
        sub[p] = _normal_data(S.with_labels(enriched))

    deleted = set()
    for i in range(m):
        p = 2 * i + 1
        if all(_leg_is_identity(T, sub, p, q) for q in (p - 1, p + 1)):
            deleted.add(i)

    data = [{0: _surjection(m, deleted)}]
    for k in range(1, T.dim):
        level = {}
        for x in T.poset(k).elements:
            level[x] = sub[x[1]][k - 1][_in_slice(x)]
        data.append(level)
    return data


def _leg_is_identity(T: TrussTower, sub: dict, p: int, q: int) -> bool:
    """Whether the leg from the singular slice at p to the regular slice at q
    becomes an identity bordism once both slices are normalized."""
    leg = pullback(T, CHAIN1, {0: (0, p), 1: (0, q)}, depth=1)
    data = []
    for k in range(1, leg.dim + 1):
        level = {}
        for x in leg.poset(k - 1).elements:
            src = p if (x[0] if isinstance(x, tuple) else x) == 0 else q
            level[x] = sub[src][k - 1][rebase(x, 0)]
        data.append(level)
    Q, _, _ = quotient(leg, data)
    return is_identity_bordism(Q)


def normalize(T: TrussTower) -> NormalizationResult:
    """Normal form of a labelled open truss over a point, with its witness."""
    if T.flavor != OPEN:
        raise TrussError("normalize expects an open truss")
    if not T.is_point_based() or T.base.elements[0] != 0:
        raise TrussError("normalize expects a truss over the point 0")
    errors = validate(T)
    if errors:
        raise TrussError(f"invalid truss: {errors[0]}", errors)
    work = T if T.labels is not None else T.with_labels({x: _UNLABELLED for x in T.top.elements})
    data = _normal_data(work)
    nf, sigma, attach = quotient(work, data)
    if T.labels is None:
        nf = nf.unlabelled()
    witness = cocartesian_bordism(T, nf, attach)
    return NormalizationResult(nf, witness, sigma[-1])


def is_normal(T: TrussTower) -> bool:
    return normalize(T).nf == T


# -- exhaustive oracle --------------------------------------------------------


class OracleBoundError(ValueError):
    pass


def _choices(T: TrussTower, k: int):
    """All degeneracy data for level k: per element, a set of deleted singular heights."""
    elems = T.poset(k - 1).elements
    per = []
    for x in elems:
        n = T.fibers[k - 1][x]
        heights = [pos // 2 for pos in singular_positions(OPEN, n)]
        subsets = [set(c) for r in range(len(heights) + 1) for c in combinations(heights, r)]
        per.append([_surjection(n, d) for d in subsets])
    for combo in product(*per):
        yield dict(zip(elems, combo))


def degeneracy_quotients(T: TrussTower, size_bound: int = 64, max_candidates: int = 200000) -> list:
    """Every label-compatible degeneracy quotient of T, as (quotient, bordism) pairs.

    Data is enumerated level by level; partial data is kept only while the
    truncated quotient exists.  Each survivor is checked on the poset level
    (the bordism must classify as a degeneracy).
    """
    if T.flavor != OPEN or not T.is_point_based():
        raise TrussError("the oracle expects an open truss over a point")
    if len(T.top) > size_bound:
        raise OracleBoundError(f"truss has {len(T.top)} elements, bound is {size_bound}")
    partial = [[]]
    seen = 0
    for k in range(1, T.dim + 1):
        trunc = TrussTower(OPEN, T.base, T.fibers[:k], T.transitions[:k])
        nxt = []
        for prefix in partial:
            for level in _choices(T, k):
                seen += 1
                if seen > max_candidates:
                    raise OracleBoundError("too many candidate degeneracies")
                data = prefix + [level]
                if k < T.dim:
                    try:
                        quotient(trunc, data)
                    except QuotientError:
                        continue
                nxt.append(data)
        partial = nxt
    out = []
    for data in partial:
        try:
            Q, _, attach = quotient(T, data)
        except QuotientError:
            continue
        bord = cocartesian_bordism(T, Q, attach)
        if validate(bord) or not classify(bord).degeneracy:
            continue
        out.append((Q, bord))
    return out


def normalize_oracle(T: TrussTower, size_bound: int = 64) -> TrussTower:
    """The smallest label-compatible degeneracy quotient, found by enumeration.

    Raises if the smallest one is not unique.
    """
    work = T if T.labels is not None else T.with_labels({x: _UNLABELLED for x in T.top.elements})
    found = degeneracy_quotients(work, size_bound)
    best = min(len(Q.top) for Q, _ in found)
    smallest = [Q for Q, _ in found if len(Q.top) == best]
    first = smallest[0]
    if any(Q != first for Q in smallest[1:]):
        raise TrussError("smallest degeneracy quotient is not unique")
    return first if T.labels is not None else first.unlabelled()
