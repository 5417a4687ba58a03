"""1-truss fibres, truss levels over finite posets and n-truss towers.

Conventions used throughout the package:

* A fibre element is stored as its *position* in the geometric order of the
  fibre.  Open fibres read r0 < s0 < r1 < ... (r_i at 2i, s_i at 2i+1),
  closed fibres read s0 < r0 < s1 < ... (s_i at 2i, r_i at 2i+1).  Both
  fibres over [n] have 2n+1 positions.
* An element of the level-k poset of a tower is a tuple ``(b, p1, ..., pk)``
  with ``b`` a base id and ``pj`` the position at level j.
* Level 1 is the outermost bundle and carries the last framing coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from . import _kernels
from .order import FinitePoset, MonotoneMap, PosetError

OPEN = "open"
CLOSED = "closed"
FLAVORS = (OPEN, CLOSED)
REG = "r"
SING = "s"


class TrussError(ValueError):
    """Raised for malformed trusses; ``violations`` holds structured records."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


def other_flavor(flavor: str) -> str:
    return CLOSED if flavor == OPEN else OPEN


# -- fibre elements -----------------------------------------------------------


@dataclass(frozen=True)
class FiberElement:
    kind: str
    index: int

    def __str__(self):
        return f"{self.kind}{self.index}"

    @classmethod
    def parse(cls, text: str) -> "FiberElement":
        text = text.strip()
        if len(text) < 2 or text[0] not in (REG, SING) or not text[1:].isdigit():
            raise ValueError(f"bad fibre element {text!r}")
        return cls(text[0], int(text[1:]))


def is_singular(flavor: str, pos: int) -> bool:
    return (pos % 2 == 1) if flavor == OPEN else (pos % 2 == 0)


def is_regular(flavor: str, pos: int) -> bool:
    return not is_singular(flavor, pos)


def fiber_element(flavor: str, pos: int) -> FiberElement:
    kind = SING if is_singular(flavor, pos) else REG
    return FiberElement(kind, pos // 2)


def position(flavor: str, fe: FiberElement, n: int | None = None) -> int:
    if flavor == OPEN:
        pos = 2 * fe.index + (1 if fe.kind == SING else 0)
    else:
        pos = 2 * fe.index + (1 if fe.kind == REG else 0)
    if fe.index < 0 or (n is not None and not 0 <= pos <= 2 * n):
        raise ValueError(f"{fe} is not an element of the {flavor} fibre over [{n}]")
    return pos


def fiber_elements(flavor: str, n: int) -> list:
    """Elements of the fibre over [n] in geometric order."""
    return [fiber_element(flavor, p) for p in range(2 * n + 1)]


def singular_positions(flavor: str, n: int) -> list:
    return [p for p in range(2 * n + 1) if is_singular(flavor, p)]


def regular_positions(flavor: str, n: int) -> list:
    return [p for p in range(2 * n + 1) if is_regular(flavor, p)]


def _open_interval(values: tuple, pos: int) -> tuple:
    """Target positions of an open source position: a closed interval."""
    i = pos // 2
    if pos % 2 == 0:
        return 2 * values[i], 2 * values[i]
    return 2 * values[i], 2 * values[i + 1]


@lru_cache(maxsize=None)
def hom_intervals(flavor: str, values: tuple, n_src: int, n_dst: int) -> tuple:
    """For each source position, the (lo, hi) range of related target positions.

    Empty ranges are encoded as (0, -1).  ``values`` is the transition in the
    stored direction (open: [n_src] -> [n_dst]; closed: [n_dst] -> [n_src]).
    """
    if flavor == OPEN:
        return tuple(_open_interval(values, p) for p in range(2 * n_src + 1))
    # closed homs are open homs read backwards with the same positions
    hits = [[] for _ in range(2 * n_src + 1)]
    for q in range(2 * n_dst + 1):
        lo, hi = _open_interval(values, q)
        for p in range(lo, hi + 1):
            hits[p].append(q)
    out = []
    for h in hits:
        if not h:
            out.append((0, -1))
        else:
            assert h == list(range(h[0], h[-1] + 1))
            out.append((h[0], h[-1]))
    return tuple(out)


def hom_exists(flavor: str, src: FiberElement, dst: FiberElement, alpha: MonotoneMap) -> bool:
    """Whether the 1-truss category has a morphism src -> dst over ``alpha``."""
    if flavor == OPEN:
        n_src, n_dst = alpha.dom, alpha.cod
    elif flavor == CLOSED:
        n_src, n_dst = alpha.cod, alpha.dom
    else:
        raise ValueError(f"unknown flavor {flavor!r}")
    p = position(flavor, src, n_src)
    q = position(flavor, dst, n_dst)
    lo, hi = hom_intervals(flavor, alpha.values, n_src, n_dst)[p]
    return lo <= q <= hi


def compose_values(flavor: str, first: tuple, second: tuple) -> tuple:
    """Transition of p <= r from those of p <= q (first) and q <= r (second)."""
    if flavor == OPEN:
        return tuple(second[v] for v in first)
    return tuple(first[v] for v in second)


def identity_values(n: int) -> tuple:
    return tuple(range(n + 1))


def transition_shape(flavor: str, n_p: int, n_q: int) -> tuple:
    """(dom, cod) of the stored transition over p <= q."""
    return (n_p, n_q) if flavor == OPEN else (n_q, n_p)


# -- levels -------------------------------------------------------------------


def extend(x, pos: int, depth: int):
    """The element over ``x`` at fibre position ``pos``; ``depth`` is the level of the result."""
    return (x, pos) if depth == 1 else x + (pos,)


@dataclass(frozen=True)
class TrussLevel:
    """A 1-truss bundle over a finite poset."""

    flavor: str
    base: FinitePoset
    fibers: Mapping
    transitions: Mapping
    depth: int = 1

    def elements(self) -> list:
        out = []
        for b in self.base.elements:
            out.extend(extend(b, p, self.depth) for p in range(2 * self.fibers[b] + 1))
        return out


def total_poset(level: TrussLevel, check: bool = True) -> FinitePoset:
    """The poset of all fibre elements, ordered by the hom rules."""
    base = level.base
    nb = len(base)
    sizes = np.array([2 * level.fibers[b] + 1 for b in base.elements], dtype=np.int64)
    offsets = np.zeros(nb, dtype=np.int64)
    if nb:
        offsets[1:] = np.cumsum(sizes)[:-1]
    pairs = np.argwhere(base.leq_matrix)
    los, his, starts = [], [], []
    cur = 0
    for i, j in pairs:
        p, q = base.elements[i], base.elements[j]
        values = level.transitions[(p, q)]
        iv = hom_intervals(level.flavor, tuple(values), level.fibers[p], level.fibers[q])
        starts.append(cur)
        cur += len(iv)
        los.extend(a for a, _ in iv)
        his.extend(b for _, b in iv)
    total_n = int(sizes.sum())
    total = np.zeros((total_n, total_n), dtype=bool)
    if len(pairs):
        total = _kernels.fill_relation(
            total,
            offsets,
            sizes,
            np.ascontiguousarray(pairs[:, 0], dtype=np.int64),
            np.ascontiguousarray(pairs[:, 1], dtype=np.int64),
            np.array(los, dtype=np.int64),
            np.array(his, dtype=np.int64),
            np.array(starts, dtype=np.int64),
        )
    try:
        return FinitePoset(level.elements(), total, check=check)
    except PosetError as exc:
        raise TrussError(f"level {level.depth} does not define a poset: {exc}") from exc


# -- towers -------------------------------------------------------------------


class TrussTower:
    """An open or closed n-truss bundle over a finite base poset, with labels.

    ``fibers[k-1]`` maps each element of the level-(k-1) poset to its fibre
    length at level k; ``transitions[k-1]`` maps every related pair to the
    value tuple of its transition.  ``labels`` maps top elements to hashable
    labels (or is None); ``label_order`` is None for opaque labels or an
    integer L when labels live in the ordinal [L] and must be monotone.
    """

    def __init__(self, flavor, base: FinitePoset, fibers: Sequence[Mapping], transitions: Sequence[Mapping],
                 labels: Mapping | None = None, label_order: int | None = None):
        if flavor not in FLAVORS:
            raise TrussError(f"unknown flavor {flavor!r}")
        if len(fibers) != len(transitions):
            raise TrussError("fibres and transitions disagree on the number of levels")
        self.flavor = flavor
        self.base = base
        self.fibers = tuple(dict(f) for f in fibers)
        self.transitions = tuple({k: tuple(v) for k, v in t.items()} for t in transitions)
        self.labels = None if labels is None else dict(labels)
        self.label_order = label_order
        self._posets = {0: base}

    # structure

    @property
    def dim(self) -> int:
        return len(self.fibers)

    def level(self, k: int) -> TrussLevel:
        if not 1 <= k <= self.dim:
            raise IndexError(f"level {k} out of range 1..{self.dim}")
        return TrussLevel(self.flavor, self.poset(k - 1), self.fibers[k - 1], self.transitions[k - 1], depth=k)

    def poset(self, k: int | None = None) -> FinitePoset:
        """The level-k poset (k = 0 is the base, default the top)."""
        if k is None:
            k = self.dim
        if k not in self._posets:
            self._posets[k] = total_poset(self.level(k))
        return self._posets[k]

    @property
    def top(self) -> FinitePoset:
        return self.poset(self.dim)

    def elements(self, k: int | None = None) -> tuple:
        return self.poset(k).elements

    def fiber(self, k: int, x) -> int:
        """Fibre length at level k over ``x`` (an element of the level-(k-1) poset)."""
        return self.fibers[k - 1][x]

    def trans(self, k: int, p, q) -> tuple:
        return self.transitions[k - 1][(p, q)]

    def label(self, x):
        return None if self.labels is None else self.labels[x]

    def project(self, x, k: int):
        """Image of a top element in the level-k poset."""
        if k == 0:
            return x[0]
        return x[: k + 1]

    def is_point_based(self) -> bool:
        return len(self.base) == 1

    def size(self) -> int:
        return len(self.top)

    def with_labels(self, labels, label_order=None) -> "TrussTower":
        out = TrussTower(self.flavor, self.base, self.fibers, self.transitions, labels, label_order)
        out._posets = dict(self._posets)
        return out

    def unlabelled(self) -> "TrussTower":
        return self.with_labels(None, None)

    # equality

    def _key(self):
        return (self.flavor, self.fibers, self.transitions, self.labels, self.label_order)

    def __eq__(self, other):
        if not isinstance(other, TrussTower):
            return NotImplemented
        return self._key() == other._key() and self.base == other.base

    def __hash__(self):
        return hash((self.flavor, self.dim, len(self.base)))

    def __repr__(self):
        return f"TrussTower({self.flavor}, dim={self.dim}, base={len(self.base)}, size={self.size()})"

    # naming

    def path(self, x) -> str:
        """Canonical string name of an element of any level."""
        if not isinstance(x, tuple):
            return "*" if self.is_point_based() else str(x)
        b, rest = x[0], x[1:]
        body = "/".join(str(fiber_element(self.flavor, p)) for p in rest)
        return body if self.is_point_based() else f"{b}:{body}"

    def element(self, path: str):
        """Inverse of :meth:`path`."""
        path = path.strip()
        if self.is_point_based():
            b = self.base.elements[0]
            if path in ("*", ""):
                return b
            body = path
        else:
            if ":" not in path:
                return _lookup_base(self.base, path)
            head, body = path.split(":", 1)
            b = _lookup_base(self.base, head)
        tokens = [t for t in body.split("/") if t]
        x = b
        for depth, tok in enumerate(tokens, start=1):
            if depth > self.dim:
                raise ValueError(f"path {path!r} is deeper than the tower")
            n = self.fibers[depth - 1].get(x)
            if n is None:
                raise ValueError(f"path {path!r} leaves the tower")
            x = extend(x, position(self.flavor, FiberElement.parse(tok), n), depth)
        return x


def _lookup_base(base: FinitePoset, token: str):
    for b in base.elements:
        if str(b) == token:
            return b
    raise ValueError(f"unknown base element {token!r}")


def point_base() -> FinitePoset:
    return FinitePoset.point()


def tower_from_levels(flavor, base, fibers, transitions, labels=None, label_order=None) -> TrussTower:
    return TrussTower(flavor, base, fibers, transitions, labels, label_order)


# -- validation ---------------------------------------------------------------


def _violation(level, law, detail, pair=None):
    rec = {"level": level, "law": law, "detail": detail}
    if pair is not None:
        rec["pair"] = pair
    return rec


def validate(T: TrussTower) -> list:
    """All violated invariants of ``T``; an empty list means valid."""
    out = []
    if T.flavor not in FLAVORS:
        return [_violation(0, "flavor", f"unknown flavor {T.flavor!r}")]
    for k in range(1, T.dim + 1):
        try:
            base = T.poset(k - 1)
        except TrussError as exc:
            out.append(_violation(k - 1, "poset", str(exc)))
            return out
        fib = T.fibers[k - 1]
        tr = T.transitions[k - 1]
        if set(fib) != set(base.elements):
            out.append(_violation(k, "fibres", "fibre lengths are not defined exactly on the base elements"))
            return out
        bad = [b for b, n in fib.items() if not isinstance(n, (int, np.integer)) or n < 0]
        if bad:
            out.append(_violation(k, "fibres", f"negative or non-integer fibre length over {T.path(bad[0])}"))
            return out
        related = set(base.relations())
        if set(tr) != related:
            missing = related - set(tr)
            extra = set(tr) - related
            if missing:
                p, q = sorted(missing, key=repr)[0]
                out.append(_violation(k, "transitions", "missing transition", [T.path(p), T.path(q)]))
            if extra:
                p, q = sorted(extra, key=repr)[0]
                out.append(_violation(k, "transitions", "transition on unrelated pair", [T.path(p), T.path(q)]))
            return out
        shape_ok = True
        for (p, q), vals in tr.items():
            dom, cod = transition_shape(T.flavor, fib[p], fib[q])
            pair = [T.path(p), T.path(q)]
            if len(vals) != dom + 1 or any(v < 0 or v > cod for v in vals) or any(
                    b < a for a, b in zip(vals, vals[1:])):
                out.append(_violation(k, "monotone", f"transition {list(vals)} is not a monotone map [{dom}]->[{cod}]", pair))
                shape_ok = False
            elif p == q and tuple(vals) != identity_values(fib[p]):
                out.append(_violation(k, "identity", f"transition {list(vals)} on a reflexive pair is not the identity", pair))
                shape_ok = False
        if not shape_ok:
            return out
        for p, q in base.covers():
            for r in base.up(q):
                expect = compose_values(T.flavor, tr[(p, q)], tr[(q, r)])
                if tuple(tr[(p, r)]) != expect:
                    out.append(_violation(k, "functoriality",
                                          f"transition {list(tr[(p, r)])} differs from composite {list(expect)}",
                                          [T.path(p), T.path(q), T.path(r)]))
        if out:
            return out
    try:
        top = T.top
    except TrussError as exc:
        out.append(_violation(T.dim, "poset", str(exc)))
        return out
    if T.labels is not None:
        if set(T.labels) != set(top.elements):
            out.append(_violation(T.dim, "labels", "labels are not defined exactly on the top elements"))
            return out
        if T.label_order is not None:
            for x, v in T.labels.items():
                if not isinstance(v, (int, np.integer)) or not 0 <= v <= T.label_order:
                    out.append(_violation(T.dim, "labels", f"label {v!r} of {T.path(x)} is outside [{T.label_order}]"))
                    return out
            for a, b in top.covers():
                if T.labels[a] > T.labels[b]:
                    out.append(_violation(T.dim, "label-monotonicity",
                                          f"label {T.labels[a]} > {T.labels[b]}", [T.path(a), T.path(b)]))
    return out


def is_valid(T: TrussTower) -> bool:
    return not validate(T)


def check(T: TrussTower) -> TrussTower:
    errors = validate(T)
    if errors:
        raise TrussError(f"invalid truss: {errors[0]}", errors)
    return T


def equal(T1: TrussTower, T2: TrussTower) -> bool:
    return T1 == T2


# -- restriction --------------------------------------------------------------


def truncate(T: TrussTower, m: int) -> TrussTower:
    if not 0 <= m <= T.dim:
        raise ValueError(f"cannot truncate a {T.dim}-truss to dimension {m}")
    return TrussTower(T.flavor, T.base, T.fibers[:m], T.transitions[:m])


def pullback(T: TrussTower, Q: FinitePoset, f: Mapping, depth: int = 0) -> TrussTower:
    """Pull the levels above ``depth`` back along ``f``: Q -> level-``depth`` poset of T.

    ``depth = 0`` is base change; ``depth = 1`` restricts the inner levels to
    a diagram of level-1 elements (slices and their bordisms).
    """
    target = T.poset(depth)
    for a, b in Q.relations():
        if not target.leq(f[a], f[b]):
            raise TrussError(f"map is not monotone on {a!r} <= {b!r}")
    fibers, transitions = [], []
    phi = dict(f)
    posets = [Q]
    for k in range(depth + 1, T.dim + 1):
        P = posets[-1]
        src_f = T.fibers[k - 1]
        src_t = T.transitions[k - 1]
        fib = {x: src_f[phi[x]] for x in P.elements}
        tr = {(a, b): src_t[(phi[a], phi[b])] for a, b in P.relations()}
        fibers.append(fib)
        transitions.append(tr)
        d = k - depth
        level = TrussLevel(T.flavor, P, fib, tr, depth=d)
        nxt = total_poset(level, check=False)
        new_phi = {}
        for x in P.elements:
            for p in range(2 * fib[x] + 1):
                new_phi[extend(x, p, d)] = extend(phi[x], p, k)
        phi = new_phi
        posets.append(nxt)
    labels = None if T.labels is None else {x: T.labels[y] for x, y in phi.items()}
    out = TrussTower(T.flavor, Q, fibers, transitions, labels, T.label_order)
    for i, P in enumerate(posets[1:], start=1):
        out._posets[i] = P
    return out


def base_change(T: TrussTower, Q: FinitePoset, f: Mapping) -> TrussTower:
    return pullback(T, Q, f, depth=0)


def slice_tower(T: TrussTower, x) -> TrussTower:
    """The (n-1)-truss over a level-1 element ``x``, as a tower over a point."""
    return pullback(T, FinitePoset.point(), {0: x}, depth=1)


def point_tower(flavor: str = OPEN, label=None) -> TrussTower:
    """The 0-truss: a single point."""
    labels = None if label is None else {0: label}
    return TrussTower(flavor, FinitePoset.point(), [], [], labels)
