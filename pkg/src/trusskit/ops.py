"""Operations on truss towers: duality, compactification, grids, bordisms,
subtrusses, factorization, atoms and singularity types."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .order import FinitePoset, MonotoneMap, gaps_dual, gaps_dual_inverse
from .truss import (
    CLOSED,
    OPEN,
    TrussError,
    TrussLevel,
    TrussTower,
    base_change,
    compose_values,
    extend,
    identity_values,
    other_flavor,
    total_poset,
)

CHAIN1 = FinitePoset.chain(1)
POINT = FinitePoset.point()


# -- small helpers ------------------------------------------------------------


def side(x):
    """Base id of an element of any level."""
    return x[0] if isinstance(x, tuple) else x


def rebase(x, b):
    """The same element with its base id replaced by ``b``."""
    return (b,) + x[1:] if isinstance(x, tuple) else b


def build_tower(flavor: str, base: FinitePoset, n: int, make_level: Callable, labels=None,
                label_order=None) -> TrussTower:
    """Assemble a tower level by level; ``make_level(k, P)`` returns (fibres, transitions)."""
    fibers, trans, posets = [], [], [base]
    for k in range(1, n + 1):
        fib, tr = make_level(k, posets[-1])
        fibers.append(fib)
        trans.append(tr)
        posets.append(total_poset(TrussLevel(flavor, posets[-1], fib, tr, depth=k)))
    T = TrussTower(flavor, base, fibers, trans)
    T._posets = dict(enumerate(posets))
    if labels is not None:
        lab = labels(posets[-1]) if callable(labels) else labels
        T = T.with_labels(lab, label_order)
    return T


def _is_standard_chain(P: FinitePoset) -> bool:
    k = len(P) - 1
    return P.elements == tuple(range(k + 1)) and bool(
        np.array_equal(P.leq_matrix, np.triu(np.ones((k + 1, k + 1), dtype=bool))))


# -- duality ------------------------------------------------------------------


def dualize(T: TrussTower) -> TrussTower:
    """Swap open and closed; the underlying poset becomes the opposite poset.

    Fibre positions are unchanged (r_i of an open fibre and s_i of the closed
    fibre sit at the same position).  Chain bases are renumbered i -> k - i so
    a bordism M -> N becomes a bordism N' -> M' over the standard chain.
    Ordered labels l in [L] become L - l so monotonicity survives.
    """
    if _is_standard_chain(T.base):
        k = len(T.base) - 1
        ren = {i: k - i for i in range(k + 1)}
        base = T.base
    else:
        ren = {b: b for b in T.base.elements}
        base = T.base.opposite()

    def mv(x):
        return rebase(x, ren[side(x)])

    fibers = [{mv(x): n for x, n in fib.items()} for fib in T.fibers]
    trans = [{(mv(q), mv(p)): v for (p, q), v in tr.items()} for tr in T.transitions]
    labels = None
    if T.labels is not None:
        if T.label_order is None:
            labels = {mv(x): v for x, v in T.labels.items()}
        else:
            labels = {mv(x): T.label_order - v for x, v in T.labels.items()}
    out = TrussTower(other_flavor(T.flavor), base, fibers, trans, labels, T.label_order)
    for k, P in list(T._posets.items()):
        if k > 0:
            out._posets[k] = FinitePoset([mv(x) for x in P.elements], P.leq_matrix.T.copy(), check=False)
    return out


# -- compactification ---------------------------------------------------------


def compactify(T: TrussTower) -> TrussTower:
    """Pad every open fibre with a singular element at each end.

    Open [n] becomes closed [n+1] with r_i -> r_i and s_i -> s_{i+1}; the
    transitions become their gap duals.  Over a padding element the next
    level has the one-point closed fibre [0].  Padding strata get label None.
    """
    if T.flavor != OPEN:
        raise TrussError("compactify expects an open truss")
    rho = {b: b for b in T.base.elements}  # closed element -> open element (non-padding)

    def make_level(k, P):
        nonlocal rho
        fib, tr = {}, {}
        for x in P.elements:
            fib[x] = T.fibers[k - 1][rho[x]] + 1 if x in rho else 0
        for x, y in P.relations():
            if x in rho and y in rho:
                alpha = MonotoneMap(T.transitions[k - 1][(rho[x], rho[y])], T.fibers[k - 1][rho[y]])
                tr[(x, y)] = gaps_dual(alpha).values
            elif x not in rho and y not in rho:
                tr[(x, y)] = (0,)
            elif x not in rho:
                tr[(x, y)] = (0,) * (fib[y] + 1)
            else:
                raise TrussError("padding element above a non-padding element")
        new_rho = {}
        for x, ox in rho.items():
            for p in range(1, 2 * fib[x]):
                new_rho[extend(x, p, k)] = extend(ox, p - 1, k)
        rho = new_rho
        return fib, tr

    out = build_tower(CLOSED, T.base, T.dim, make_level)
    if T.labels is not None:
        lab = {x: (T.labels[rho[x]] if x in rho else None) for x in out.top.elements}
        out = out.with_labels(lab, T.label_order)
    return out


def retract(X: TrussTower) -> TrussTower:
    """Remove the first and last singular element of every fibre (inverse of compactify)."""
    if X.flavor != CLOSED:
        raise TrussError("retract expects a closed truss")
    keep = {b: b for b in X.base.elements}  # open element -> closed element

    def make_level(k, P):
        nonlocal keep
        fib, tr = {}, {}
        for x in P.elements:
            n = X.fibers[k - 1][keep[x]]
            if n < 1:
                raise TrussError(f"fibre over {X.path(keep[x])} is [0]; nothing remains after removing its ends")
            fib[x] = n - 1
        for x, y in P.relations():
            beta = MonotoneMap(X.transitions[k - 1][(keep[x], keep[y])], fib[x] + 1)
            try:
                tr[(x, y)] = gaps_dual_inverse(beta).values
            except ValueError:
                raise TrussError(
                    f"transition {list(beta.values)} over {X.path(keep[x])} <= {X.path(keep[y])} "
                    "is not endpoint-preserving") from None
        keep = {extend(x, p - 1, k): extend(cx, p, k) for x, cx in keep.items() for p in range(1, 2 * fib[x] + 2)}
        return fib, tr

    out = build_tower(OPEN, X.base, X.dim, make_level)
    if X.labels is not None:
        out = out.with_labels({x: X.labels[keep[x]] for x in out.top.elements}, X.label_order)
    return out


# -- grids and stacked products -----------------------------------------------


def grid(flavor: str, *ms: int) -> TrussTower:
    """The grid truss; coordinate i (1-based) sits at tower level n + 1 - i."""
    if len(ms) == 1 and isinstance(ms[0], (list, tuple)):
        ms = tuple(ms[0])
    if any(m < 0 for m in ms):
        raise ValueError("grid sizes must be nonnegative")
    n = len(ms)

    def make_level(k, P):
        m = ms[n - k]
        return {x: m for x in P.elements}, {(x, y): identity_values(m) for x, y in P.relations()}

    return build_tower(flavor, POINT, n, make_level)


def stacked_product(T: TrussTower, S: TrussTower) -> TrussTower:
    """Levels of S (outer) followed by the levels of T pulled back to S's top."""
    if T.flavor != S.flavor:
        raise TrussError("stacked product needs a common flavor")
    if T.base != S.base:
        raise TrussError("stacked product needs a common base")
    s = S.dim

    def to_T(x, j):
        # element of the result at level s + j - 1 -> element of T at level j - 1
        return side(x) if j == 1 else (x[0],) + x[1 + s:]

    def make_level(k, P):
        if k <= s:
            return S.fibers[k - 1], S.transitions[k - 1]
        j = k - s
        fib = {x: T.fibers[j - 1][to_T(x, j)] for x in P.elements}
        tr = {(x, y): T.transitions[j - 1][(to_T(x, j), to_T(y, j))] for x, y in P.relations()}
        return fib, tr

    out = build_tower(T.flavor, S.base, s + T.dim, make_level)
    if T.labels is not None or S.labels is not None:
        lab = {}
        for x in out.top.elements:
            xs = x[: s + 1] if s else side(x)
            xt = to_T(x, T.dim + 1) if T.dim else side(x)
            if T.labels is not None and S.labels is not None:
                lab[x] = (S.labels[xs], T.labels[xt])
            else:
                lab[x] = S.labels[xs] if S.labels is not None else T.labels[xt]
        out = out.with_labels(lab)
    return out


# -- bordisms -----------------------------------------------------------------


def is_bordism(f: TrussTower) -> bool:
    return _is_standard_chain(f.base) and len(f.base) == 2


def _require_bordism(f: TrussTower):
    if not is_bordism(f):
        raise TrussError("expected a bordism (a tower over the chain 0 < 1)")


def source(f: TrussTower) -> TrussTower:
    _require_bordism(f)
    return base_change(f, POINT, {0: 0})


def target(f: TrussTower) -> TrussTower:
    _require_bordism(f)
    return base_change(f, POINT, {0: 1})


def identity_bordism(T: TrussTower) -> TrussTower:
    if not T.is_point_based():
        raise TrussError("identity bordisms are defined for trusses over a point")
    return base_change(T, CHAIN1, {0: T.base.elements[0], 1: T.base.elements[0]})


def is_identity_bordism(f: TrussTower) -> bool:
    return f == identity_bordism(source(f))


def _merge_labels(parts):
    """Union of label dicts; None if any part is unlabelled."""
    if any(p is None for p in parts):
        return None
    out = {}
    for p in parts:
        for x, v in p.items():
            if x in out and out[x] != v:
                raise TrussError(f"conflicting labels on a shared element: {out[x]!r} vs {v!r}")
            out[x] = v
    return out


def compose(f: TrussTower, g: TrussTower) -> TrussTower:
    """The composite bordism M -> P of f: M -> N and g: N -> P."""
    _require_bordism(f)
    _require_bordism(g)
    if f.flavor != g.flavor or f.dim != g.dim:
        raise TrussError("bordisms differ in flavor or dimension")
    if target(f) != source(g):
        raise TrussError("target of the first bordism differs from the source of the second")
    flavor = f.flavor

    def from_g(x):  # element over 1 or 2 -> element of g
        return rebase(x, side(x) - 1)

    def to_g(x):
        return rebase(x, side(x) + 1)

    def make_level(k, P):
        ff, ft = f.fibers[k - 1], f.transitions[k - 1]
        gf, gt = g.fibers[k - 1], g.transitions[k - 1]
        fib = {x: (ff[x] if side(x) < 2 else gf[from_g(x)]) for x in P.elements}
        tr = {}
        for x, y in P.relations():
            a, b = side(x), side(y)
            if b <= 1:
                tr[(x, y)] = ft[(x, y)]
            elif a >= 1:
                tr[(x, y)] = gt[(from_g(x), from_g(y))]
            else:
                vals = None
                for z in P.up(x):
                    if side(z) == 1 and P.leq(z, y):
                        v = compose_values(flavor, ft[(x, z)], gt[(from_g(z), from_g(y))])
                        if vals is None:
                            vals = v
                        elif vals != v:
                            raise TrussError("composite transition depends on the chosen middle element")
                if vals is None:
                    raise TrussError("no middle element for a composite relation")
                tr[(x, y)] = vals
        return fib, tr

    T2 = build_tower(flavor, FinitePoset.chain(2), f.dim, make_level)
    labels = None
    if f.labels is not None and g.labels is not None:
        labels = _merge_labels([f.labels, {to_g(x): v for x, v in g.labels.items()}])
        T2 = T2.with_labels(labels, f.label_order)
    return base_change(T2, CHAIN1, {0: 0, 1: 2})


@dataclass(frozen=True)
class Classification:
    degeneracy: bool
    inert: bool
    active: bool


def _split(f: TrussTower):
    P = f.top
    src = [i for i, x in enumerate(P.elements) if side(x) == 0]
    dst = [i for i, x in enumerate(P.elements) if side(x) == 1]
    return P.leq_matrix, np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64)


def _least_above(M, i, dst):
    above = dst[M[i, dst]]
    for j in above:
        if M[j, above].all():
            return int(j)
    return None


def _greatest_below(M, j, src):
    below = src[M[src, j]]
    for i in below:
        if M[below, i].all():
            return int(i)
    return None


def cocartesian_map(f: TrussTower):
    """sigma(p) = least target element above each source element, if that is a cocartesian rule."""
    M, src, dst = _split(f)
    sigma = {}
    for i in src:
        j = _least_above(M, i, dst)
        if j is None or not np.array_equal(M[i, dst], M[j, dst]):
            return None
        sigma[int(i)] = j
    return sigma


def classify(f: TrussTower) -> Classification:
    _require_bordism(f)
    M, src, dst = _split(f)
    if f.flavor == OPEN:
        active = bool(M[np.ix_(src, dst)].any(axis=0).all()) if len(dst) else True
    else:
        active = bool(M[np.ix_(src, dst)].any(axis=1).all()) if len(src) else True

    sigma = cocartesian_map(f)
    degeneracy = sigma is not None and set(sigma.values()) == set(int(j) for j in dst)

    if f.flavor == OPEN:
        inert = False
        if sigma is not None and len(set(sigma.values())) == len(sigma):
            image = np.array(sorted(sigma.values()), dtype=np.int64)
            reflects = all(M[i, k] or not M[sigma[i], sigma[k]] for i in sigma for k in sigma)
            up = M[np.ix_(image, dst)].any(axis=0)
            upward = set(int(j) for j in dst[up]) == set(sigma.values())
            inert = reflects and upward
    else:
        inert = False
        tau = {}
        for j in dst:
            i = _greatest_below(M, j, src)
            if i is None or not np.array_equal(M[src, j], M[src, i]):
                tau = None
                break
            tau[int(j)] = i
        if tau is not None and len(set(tau.values())) == len(tau):
            image = np.array(sorted(tau.values()), dtype=np.int64)
            reflects = all(M[j, k] or not M[tau[j], tau[k]] for j in tau for k in tau)
            down = M[np.ix_(src, image)].any(axis=1)
            downward = set(int(i) for i in src[down]) == set(tau.values())
            inert = reflects and downward
    return Classification(degeneracy=degeneracy, inert=inert, active=active)


def image_position(values: tuple, pos: int):
    """Least target position above an open source position under ``values`` (None if there is none)."""
    i = pos // 2
    if pos % 2 == 0:
        return 2 * values[i]
    a, b = values[i], values[i + 1]
    if a == b:
        return 2 * a
    if b == a + 1:
        return 2 * a + 1
    return None


def cocartesian_bordism(A: TrussTower, B: TrussTower, attach) -> TrussTower:
    """The open bordism A -> B in which each level-(k-1) element x of A is sent
    to ``attach[k-1][x] = (sigma(x), s_x)`` with fibre map s_x: [n_x] -> [n_sigma(x)].

    Used for degeneracy bordisms (surjective s_x) and inert bordisms (inclusions).
    A and B must be open trusses over the point 0.
    """
    if A.flavor != OPEN or B.flavor != OPEN:
        raise TrussError("cocartesian bordisms are built for open trusses")
    if A.dim != B.dim:
        raise TrussError("dimension mismatch")

    def to_b(x):
        return rebase(x, 0)

    def make_level(k, P):
        af, at = A.fibers[k - 1], A.transitions[k - 1]
        bf, bt = B.fibers[k - 1], B.transitions[k - 1]
        att = attach[k - 1]
        fib = {x: (af[x] if side(x) == 0 else bf[to_b(x)]) for x in P.elements}
        tr = {}
        for x, y in P.relations():
            if side(y) == 0:
                tr[(x, y)] = at[(x, y)]
            elif side(x) == 1:
                tr[(x, y)] = bt[(to_b(x), to_b(y))]
            else:
                sx, vals = att[x]
                key = (sx, to_b(y))
                if key not in bt:
                    raise TrussError("attachment is not compatible with the order of the target")
                tr[(x, y)] = compose_values(OPEN, tuple(vals), bt[key])
        return fib, tr

    out = build_tower(OPEN, CHAIN1, A.dim, make_level)
    if A.labels is not None and B.labels is not None:
        lab = dict(A.labels)
        lab.update({rebase(x, 1): v for x, v in B.labels.items()})
        out = out.with_labels(lab, A.label_order)
    return out


# -- degeneracy quotients -----------------------------------------------------


class QuotientError(TrussError):
    pass


def quotient(T: TrussTower, data) -> tuple:
    """Coarsen an open tower along degeneracy data.

    ``data[k-1]`` maps every element x of the level-(k-1) poset to a
    surjection s_x: [n_x] -> [m] (as a value tuple).  Returns
    ``(Q, sigma, attach)``: the coarsened tower, the per-level element maps
    ``sigma[k]`` (k = 0..n) and the attachment data for
    :func:`cocartesian_bordism`.  Raises :class:`QuotientError` when the data
    is inconsistent or labels are not constant on the fibres of sigma.
    """
    if T.flavor != OPEN:
        raise TrussError("quotients are computed for open trusses")
    sigma = [{b: b for b in T.base.elements}]
    attach = []

    def make_level(k, P):
        s_prev = sigma[-1]
        src_f, src_t = T.fibers[k - 1], T.transitions[k - 1]
        d = data[k - 1]
        fib = {}
        for x in T.poset(k - 1).elements:
            vals = tuple(d[x])
            if len(vals) != src_f[x] + 1 or vals[0] != 0 or any(b - a not in (0, 1) for a, b in zip(vals, vals[1:])):
                raise QuotientError(f"degeneracy map {vals} over {T.path(x)} is not a surjection")
            m = vals[-1]
            xp = s_prev[x]
            if fib.setdefault(xp, m) != m:
                raise QuotientError(f"inconsistent fibre length over {T.path(x)}")
        if set(fib) != set(P.elements):
            raise QuotientError("coarsened base does not match")
        tr = {}
        related = set(P.relations())
        for x, y in T.poset(k - 1).relations():
            key = (s_prev[x], s_prev[y])
            if key not in related:
                raise QuotientError(f"coarsening is not monotone on {T.path(x)} <= {T.path(y)}")
            sx, sy, a = d[x], d[y], src_t[(x, y)]
            cur = tr.setdefault(key, [None] * (fib[key[0]] + 1))
            for i, v in enumerate(a):
                j, w = sx[i], sy[v]
                if cur[j] is None:
                    cur[j] = w
                elif cur[j] != w:
                    raise QuotientError(f"degeneracy data does not descend along {T.path(x)} <= {T.path(y)}")
        out_tr = {}
        for key in P.relations():
            vals = tr.get(key)
            if vals is None or any(v is None for v in vals):
                raise QuotientError("a coarsened relation has no lift")
            out_tr[key] = tuple(vals)
        sig = {}
        for x in T.poset(k - 1).elements:
            for p in range(2 * src_f[x] + 1):
                sig[extend(x, p, k)] = extend(s_prev[x], image_position(tuple(d[x]), p), k)
        sigma.append(sig)
        attach.append({x: (s_prev[x], tuple(d[x])) for x in T.poset(k - 1).elements})
        return fib, out_tr

    Q = build_tower(OPEN, T.base, T.dim, make_level)
    if T.labels is not None:
        lab = {}
        for x, v in T.labels.items():
            y = sigma[-1][x]
            if lab.setdefault(y, v) != v:
                raise QuotientError(f"labels are not constant on the fibre over {Q.path(y)}")
        Q = Q.with_labels(lab, T.label_order)
    return Q, sigma, attach


def degeneracy_bordism(T: TrussTower, data) -> tuple:
    """(quotient, bordism T -> quotient) for degeneracy data over a point-based open tower."""
    Q, _, attach = quotient(T, data)
    return Q, cocartesian_bordism(T, Q, attach)


# -- subtrusses ---------------------------------------------------------------


def _levels_of(T: TrussTower, top_set) -> list:
    """Projections S_0 .. S_n of a top-level set."""
    sets = [None] * (T.dim + 1)
    sets[T.dim] = set(top_set)
    for k in range(T.dim, 0, -1):
        sets[k - 1] = {x[:k] if k > 1 else x[0] for x in sets[k]}
    return sets


def _fiber_positions(sets, k) -> dict:
    out = {}
    for x in sets[k]:
        out.setdefault(x[:-1] if k > 1 else x[0], []).append(x[-1])
    return out


def is_subtruss_set(T: TrussTower, S) -> bool:
    """Whether S (top elements) is the top of a subtruss.

    Open: S is upward closed; closed: downward closed.  In both cases every
    selected fibre must be a nonempty interval with even end positions
    (regular ends for open fibres, singular ends for closed ones).
    """
    S = set(S)
    if not S or not S <= set(T.top.elements):
        return False
    closed_set = T.top.upward_closure(S) if T.flavor == OPEN else T.top.downward_closure(S)
    if closed_set != S:
        return False
    sets = _levels_of(T, S)
    for k in range(1, T.dim + 1):
        for ps in _fiber_positions(sets, k).values():
            ps = sorted(ps)
            if ps[0] % 2 or ps[-1] % 2 or ps != list(range(ps[0], ps[-1] + 1)):
                return False
    return True


@dataclass
class Subtruss:
    """A subtruss together with the element correspondence to its ambient truss."""

    sub: TrussTower
    ambient: TrussTower
    emb: list  # emb[k]: element of sub at level k -> element of ambient
    offsets: list  # offsets[k-1]: element of sub at level k-1 -> first ambient position
    top_set: frozenset


def subtower(T: TrussTower, S) -> Subtruss:
    """The subtruss with top set S (which must satisfy :func:`is_subtruss_set`)."""
    if not is_subtruss_set(T, S):
        raise TrussError("element set is not the top of a subtruss")
    sets = _levels_of(T, S)
    base = T.base.subposet(sets[0])
    emb = [{b: b for b in base.elements}]
    offsets = []

    def make_level(k, P):
        amb = emb[-1]
        fpos = _fiber_positions(sets, k)
        off = {x: min(fpos[amb[x]]) for x in P.elements}
        fib = {x: (max(fpos[amb[x]]) - off[x]) // 2 for x in P.elements}
        tr = {}
        for x, y in P.relations():
            vals = T.transitions[k - 1][(amb[x], amb[y])]
            if T.flavor == OPEN:
                ox, oy = off[x] // 2, off[y] // 2
                new = tuple(vals[ox + i] - oy for i in range(fib[x] + 1))
                bound = fib[y]
            else:
                ox, oy = off[x] // 2, off[y] // 2
                new = tuple(vals[oy + j] - ox for j in range(fib[y] + 1))
                bound = fib[x]
            if any(v < 0 or v > bound for v in new):
                raise TrussError("subtruss transition leaves the selected fibre")
            tr[(x, y)] = new
        emb.append({extend(x, p, k): extend(amb[x], p + off[x], k) for x in P.elements for p in range(2 * fib[x] + 1)})
        offsets.append(off)
        return fib, tr

    sub = build_tower(T.flavor, base, T.dim, make_level)
    if T.labels is not None:
        sub = sub.with_labels({x: T.labels[y] for x, y in emb[-1].items()}, T.label_order)
    return Subtruss(sub, T, emb, offsets, frozenset(S))


def smallest_subtruss_set(T: TrussTower, Q) -> frozenset:
    """Top set of a smallest subtruss containing Q.

    Alternates the flavor's closure (open: upward, closed: downward) with a
    fibrewise convex fill.  An element added by the fill at a lower level
    needs a lift to the top; the lift through fibre position 0 at each higher
    level is taken, which makes the result canonical but, for such inputs,
    not always the unique minimum (there may be several incomparable ones).
    """
    top = T.top
    Q = set(Q)
    if not Q:
        return frozenset()
    close = top.upward_closure if T.flavor == OPEN else top.downward_closure
    S = close(Q)
    while True:
        sets = _levels_of(T, S)
        missing = None
        for k in range(1, T.dim + 1):
            for x, ps in sorted(_fiber_positions(sets, k).items(), key=lambda kv: repr(kv[0])):
                lo, hi = min(ps), max(ps)
                lo -= lo % 2
                hi += hi % 2
                gap = sorted(set(range(lo, hi + 1)) - set(ps))
                if gap:
                    missing = (k, extend(x, gap[0], k))
                    break
            if missing:
                break
        if missing is None:
            return frozenset(S)
        k, y = missing
        for j in range(k + 1, T.dim + 1):
            y = extend(y, 0, j)
        S = close(S | {y})


def smallest_subtruss(T: TrussTower, Q) -> Subtruss:
    return subtower(T, smallest_subtruss_set(T, Q))


def inert_embedding(sub: Subtruss) -> TrussTower:
    """The inert bordism of a subtruss: sub -> T (open) or T -> sub (closed)."""
    T = sub.ambient
    if not T.is_point_based():
        raise TrussError("inert embeddings are built for trusses over a point")
    if T.flavor == CLOSED:
        dual = subtower(dualize(T), sub.top_set)
        return dualize(inert_embedding(dual))
    attach = []
    for k in range(1, T.dim + 1):
        att = {}
        for x, off in sub.offsets[k - 1].items():
            n = sub.sub.fibers[k - 1][x]
            att[x] = (sub.emb[k - 1][x], tuple(off // 2 + i for i in range(n + 1)))
        attach.append(att)
    return cocartesian_bordism(sub.sub, T, attach)


# -- factorization ------------------------------------------------------------


@dataclass
class Factorization:
    active: TrussTower
    inert: TrussTower
    middle: Subtruss


def reachable_set(f: TrussTower) -> frozenset:
    """Target elements (named in the target truss) lying above some source element."""
    M, src, dst = _split(f)
    P = f.top
    hit = M[np.ix_(src, dst)].any(axis=0) if len(src) else np.zeros(len(dst), dtype=bool)
    return frozenset(rebase(P.elements[j], 0) for j, h in zip(dst, hit) if h)


def factorize(f: TrussTower) -> Factorization:
    """Active-inert factorization f = i . a of an open bordism."""
    _require_bordism(f)
    if f.flavor != OPEN:
        raise TrussError("factorize expects an open bordism")
    N = target(f)
    Z = smallest_subtruss(N, reachable_set(f))
    inert = inert_embedding(Z)
    S = {x for x in f.top.elements if side(x) == 0} | {rebase(z, 1) for z in Z.top_set}
    active = subtower(f, S).sub
    return Factorization(active, inert, Z)


# -- atoms, cells and singularity types -----------------------------------------


def atom_at(T: TrussTower, p) -> TrussTower:
    if T.flavor != OPEN:
        raise TrussError("atoms live in open trusses; use cell_at for closed ones")
    A = subtower(T, T.top.upward_closure({p})).sub
    if A.top.minimum() is None:
        raise TrussError(f"upward closure of {T.path(p)} has no minimum: malformed truss")
    return A


def atoms(T: TrussTower) -> dict:
    return {p: atom_at(T, p) for p in T.top.elements}


def cell_at(X: TrussTower, p) -> TrussTower:
    if X.flavor != CLOSED:
        raise TrussError("cells live in closed trusses; use atom_at for open ones")
    C = subtower(X, X.top.downward_closure({p})).sub
    if C.top.maximum() is None:
        raise TrussError(f"downward closure of {X.path(p)} has no maximum: malformed truss")
    return C


def cells(X: TrussTower) -> dict:
    return {p: cell_at(X, p) for p in X.top.elements}


def is_atom(T: TrussTower) -> bool:
    return T.flavor == OPEN and T.top.minimum() is not None


def is_cell(T: TrussTower) -> bool:
    return T.flavor == CLOSED and T.top.maximum() is not None


def _level_trivial(T: TrussTower, k: int) -> bool:
    return all(n == 0 for n in T.fibers[k - 1].values())


def stype(A: TrussTower) -> tuple:
    """Singularity type (m_1, ..., m_n) indexed by framing coordinate."""
    if not (is_atom(A) or is_cell(A)):
        raise TrussError("stype expects an atom or a cell")
    n = A.dim
    return tuple(0 if _level_trivial(A, n + 1 - i) else 1 for i in range(1, n + 1))


def sdepth(A: TrussTower) -> int:
    if not (is_atom(A) or is_cell(A)):
        raise TrussError("sdepth expects an atom or a cell")
    d = 0
    while d < A.dim and _level_trivial(A, d + 1):
        d += 1
    return d


def shape(A: TrussTower) -> TrussTower:
    return grid(A.flavor, *stype(A))


def shape_bordism(A: TrussTower) -> TrussTower:
    """Active bordism shape(A) -> A whose cross transitions are endpoint-preserving."""
    if not is_atom(A):
        raise TrussError("shape_bordism expects an open atom")
    G = shape(A)

    def to_0(x):
        return rebase(x, 0)

    def make_level(k, P):
        gf, gt = G.fibers[k - 1], G.transitions[k - 1]
        af, at = A.fibers[k - 1], A.transitions[k - 1]
        fib = {x: (gf[x] if side(x) == 0 else af[to_0(x)]) for x in P.elements}
        tr = {}
        for x, y in P.relations():
            if side(y) == 0:
                tr[(x, y)] = gt[(x, y)]
            elif side(x) == 1:
                tr[(x, y)] = at[(to_0(x), to_0(y))]
            else:
                if fib[x] == 0 and fib[y] != 0:
                    raise TrussError("trivial shape level over a nontrivial fibre")
                tr[(x, y)] = (0,) if fib[x] == 0 else (0, fib[y])
        return fib, tr

    return build_tower(OPEN, CHAIN1, A.dim, make_level)
