"""Finite ordinals, monotone maps between them, and finite posets."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Hashable, Iterable, Sequence

import numpy as np

from . import _kernels


@dataclass(frozen=True)
class Ordinal:
    """The linear order [n] = {0, ..., n}."""

    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"ordinal must be nonnegative, got {self.n}")

    def __len__(self):
        return self.n + 1

    def __iter__(self):
        return iter(range(self.n + 1))


@dataclass(frozen=True)
class MonotoneMap:
    """A weakly increasing map [dom] -> [cod], stored as its value list."""

    values: tuple
    cod: int

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if not vals:
            raise ValueError("a monotone map needs a nonempty domain")
        if self.cod < 0:
            raise ValueError("codomain must be nonnegative")
        for a, b in zip(vals, vals[1:]):
            if b < a:
                raise ValueError(f"values {vals} are not weakly increasing")
        if vals[0] < 0 or vals[-1] > self.cod:
            raise ValueError(f"values {vals} leave the codomain [{self.cod}]")

    @property
    def dom(self) -> int:
        return len(self.values) - 1

    def __call__(self, i: int) -> int:
        return self.values[i]

    def __repr__(self):
        return f"<{','.join(map(str, self.values))}>:[{self.dom}]->[{self.cod}]"


def identity(n: int) -> MonotoneMap:
    return MonotoneMap(tuple(range(n + 1)), n)


def compose(f: MonotoneMap, g: MonotoneMap) -> MonotoneMap:
    """The composite ``g . f`` (first ``f``, then ``g``)."""
    if f.cod != g.dom:
        raise ValueError(f"cannot compose {f!r} with {g!r}: codomain [{f.cod}] != domain [{g.dom}]")
    return MonotoneMap(tuple(g.values[v] for v in f.values), g.cod)


def is_inert(f: MonotoneMap) -> bool:
    """Inclusion of a subinterval: f(i) = f(0) + i."""
    return all(v == f.values[0] + i for i, v in enumerate(f.values))


def is_strict_interval(f: MonotoneMap) -> bool:
    """Endpoint preserving: f(0) = 0 and f(dom) = cod."""
    return f.values[0] == 0 and f.values[-1] == f.cod


def is_surjective(f: MonotoneMap) -> bool:
    return set(f.values) == set(range(f.cod + 1))


def is_injective(f: MonotoneMap) -> bool:
    return len(set(f.values)) == len(f.values)


def gaps_dual(f: MonotoneMap) -> MonotoneMap:
    """Send f: [n] -> [m] to the endpoint-preserving map [m+1] -> [n+1] on gaps.

    beta(j) counts the i with f(i) < j.
    """
    n, m = f.dom, f.cod
    beta = tuple(sum(1 for v in f.values if v < j) for j in range(m + 2))
    return MonotoneMap(beta, n + 1)


def gaps_dual_inverse(b: MonotoneMap) -> MonotoneMap:
    """Inverse of :func:`gaps_dual` on endpoint-preserving maps [m+1] -> [n+1]."""
    if not is_strict_interval(b) or b.dom < 1 or b.cod < 1:
        raise ValueError(f"{b!r} is not an endpoint-preserving map between nonzero ordinals")
    m, n = b.dom - 1, b.cod - 1
    alpha = tuple(sum(1 for j in range(1, m + 2) if b.values[j] <= i) for i in range(n + 1))
    return MonotoneMap(alpha, m)


def enumerate_monotone(n: int, m: int) -> list:
    """All monotone maps [n] -> [m] in lexicographic order."""
    if n < 0 or m < 0:
        raise ValueError("ordinals must be nonnegative")
    return [MonotoneMap(v, m) for v in combinations_with_replacement(range(m + 1), n + 1)]


# -- finite posets ------------------------------------------------------------


class PosetError(ValueError):
    pass


_ORDER_MESSAGES = {
    _kernels.NOT_REFLEXIVE: "relation is not reflexive",
    _kernels.NOT_ANTISYMMETRIC: "relation is not antisymmetric",
    _kernels.NOT_TRANSITIVE: "relation is not transitive",
}


class FinitePoset:
    """A finite partial order on hashable ids.

    ``leq_matrix[i, j]`` is true iff ``elements[i] <= elements[j]``.  The
    element sequence is a fixed total order; equality ignores it.
    """

    __slots__ = ("elements", "index", "leq_matrix", "_hash")

    def __init__(self, elements: Sequence[Hashable], leq_matrix, check: bool = True):
        self.elements = tuple(elements)
        self.index = {e: i for i, e in enumerate(self.elements)}
        if len(self.index) != len(self.elements):
            raise PosetError("duplicate element ids")
        m = np.asarray(leq_matrix, dtype=bool)
        n = len(self.elements)
        if m.shape != (n, n):
            raise PosetError(f"relation has shape {m.shape}, expected {(n, n)}")
        self.leq_matrix = m
        self.leq_matrix.setflags(write=False)
        self._hash = None
        if check:
            code = _kernels.check_partial_order(np.ascontiguousarray(m)) if n else _kernels.ORDER_OK
            if code != _kernels.ORDER_OK:
                raise PosetError(_ORDER_MESSAGES[code])

    @classmethod
    def from_relation(cls, elements: Iterable[Hashable], pairs: Iterable[tuple]) -> "FinitePoset":
        """The partial order generated by ``pairs`` (a <= b); rejects cycles."""
        elements = tuple(elements)
        idx = {e: i for i, e in enumerate(elements)}
        rel = np.zeros((len(elements), len(elements)), dtype=bool)
        for a, b in pairs:
            if a not in idx or b not in idx:
                raise PosetError(f"unknown element in pair {(a, b)!r}")
            rel[idx[a], idx[b]] = True
        closed = _kernels.closure(rel) if elements else rel
        return cls(elements, closed, check=True)

    @classmethod
    def chain(cls, k: int) -> "FinitePoset":
        """The chain 0 < 1 < ... < k."""
        return cls(range(k + 1), np.triu(np.ones((k + 1, k + 1), dtype=bool)), check=False)

    @classmethod
    def point(cls) -> "FinitePoset":
        return cls.chain(0)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, x):
        return x in self.index

    def __repr__(self):
        return f"FinitePoset({len(self)} elements)"

    def __eq__(self, other):
        if not isinstance(other, FinitePoset):
            return NotImplemented
        if len(self) != len(other) or set(self.index) != set(other.index):
            return False
        perm = [other.index[e] for e in self.elements]
        return bool(np.array_equal(self.leq_matrix, other.leq_matrix[np.ix_(perm, perm)]))

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((frozenset(self.index), int(self.leq_matrix.sum())))
        return self._hash

    def leq(self, a, b) -> bool:
        return bool(self.leq_matrix[self.index[a], self.index[b]])

    def lt(self, a, b) -> bool:
        return a != b and self.leq(a, b)

    def _mask(self, subset) -> np.ndarray:
        mask = np.zeros(len(self), dtype=bool)
        for x in subset:
            if x not in self.index:
                raise KeyError(f"unknown element {x!r}")
            mask[self.index[x]] = True
        return mask

    def _ids(self, mask) -> set:
        return {self.elements[i] for i in np.flatnonzero(mask)}

    def up(self, a) -> list:
        return [self.elements[j] for j in np.flatnonzero(self.leq_matrix[self.index[a]])]

    def down(self, a) -> list:
        return [self.elements[i] for i in np.flatnonzero(self.leq_matrix[:, self.index[a]])]

    def upward_closure(self, subset) -> set:
        mask = self._mask(subset)
        if not mask.any():
            return set()
        return self._ids(_kernels.up_closure(self.leq_matrix, mask))

    def downward_closure(self, subset) -> set:
        mask = self._mask(subset)
        if not mask.any():
            return set()
        return self._ids(_kernels.down_closure(self.leq_matrix, mask))

    def is_upward_closed(self, subset) -> bool:
        return self.upward_closure(subset) == set(subset)

    def is_downward_closed(self, subset) -> bool:
        return self.downward_closure(subset) == set(subset)

    def minimum(self):
        """The least element, or None."""
        for i, e in enumerate(self.elements):
            if self.leq_matrix[i].all():
                return e
        return None

    def maximum(self):
        for i, e in enumerate(self.elements):
            if self.leq_matrix[:, i].all():
                return e
        return None

    def minimal_elements(self) -> list:
        below = self.leq_matrix.sum(axis=0)
        return [e for i, e in enumerate(self.elements) if below[i] == 1]

    def maximal_elements(self) -> list:
        above = self.leq_matrix.sum(axis=1)
        return [e for i, e in enumerate(self.elements) if above[i] == 1]

    def covers(self) -> list:
        """Pairs (a, b) with a < b and nothing strictly between."""
        m = self.leq_matrix
        strict = m & ~np.eye(len(self), dtype=bool)
        two_step = (strict.astype(np.int32) @ strict.astype(np.int32)) > 0
        cov = strict & ~two_step
        return [(self.elements[i], self.elements[j]) for i, j in zip(*np.nonzero(cov))]

    def relations(self) -> list:
        """All pairs (a, b) with a <= b, in element order."""
        return [(self.elements[i], self.elements[j]) for i, j in zip(*np.nonzero(self.leq_matrix))]

    def opposite(self) -> "FinitePoset":
        return FinitePoset(self.elements, self.leq_matrix.T.copy(), check=False)

    def subposet(self, subset) -> "FinitePoset":
        keep = [e for e in self.elements if e in set(subset)]
        idx = [self.index[e] for e in keep]
        return FinitePoset(keep, self.leq_matrix[np.ix_(idx, idx)], check=False)

    def relabel(self, mapping) -> "FinitePoset":
        return FinitePoset([mapping[e] for e in self.elements], self.leq_matrix.copy(), check=False)


def upward_closure(P: FinitePoset, S) -> set:
    return P.upward_closure(S)


def downward_closure(P: FinitePoset, S) -> set:
    return P.downward_closure(S)


def is_monotone_map(P: FinitePoset, Q: FinitePoset, f) -> bool:
    """Whether the dict ``f`` is an order-preserving map P -> Q."""
    return all(Q.leq(f[a], f[b]) for a, b in P.relations())
