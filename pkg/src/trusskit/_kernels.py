"""Boolean-matrix kernels behind the poset and total-poset code.

Each kernel exists twice: a numba ``@njit`` version and a plain numpy
version.  The numba path is used when numba imports cleanly and the
environment variable ``TRUSSKIT_NO_NUMBA`` is unset (or ``0``).
Both paths return identical results; the benchmark in
``benchmarks/bench_kernels.py`` times them against each other.
"""

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

_flag = os.environ.get("TRUSSKIT_NO_NUMBA", "").strip().lower()
USE_NUMBA = HAVE_NUMBA and _flag in ("", "0", "false", "no")
BACKEND = "numba" if USE_NUMBA else "numpy"

# result codes of check_partial_order
ORDER_OK = 0
NOT_REFLEXIVE = 1
NOT_ANTISYMMETRIC = 2
NOT_TRANSITIVE = 3


# -- numpy implementations ---------------------------------------------------

def closure_np(rel):
    """Reflexive-transitive closure by repeated squaring."""
    m = np.array(rel, dtype=bool, copy=True)
    np.fill_diagonal(m, True)
    while True:
        nxt = (m.astype(np.int32) @ m.astype(np.int32)) > 0
        if np.array_equal(nxt, m):
            return m
        m = nxt


def check_partial_order_np(m):
    if not np.all(np.diagonal(m)):
        return NOT_REFLEXIVE
    if np.any(m & m.T & ~np.eye(m.shape[0], dtype=bool)):
        return NOT_ANTISYMMETRIC
    sq = (m.astype(np.int32) @ m.astype(np.int32)) > 0
    if np.any(sq & ~m):
        return NOT_TRANSITIVE
    return ORDER_OK


def up_closure_np(m, mask):
    return m[mask].any(axis=0) if mask.any() else np.zeros(m.shape[0], dtype=bool)


def down_closure_np(m, mask):
    return m[:, mask].any(axis=1) if mask.any() else np.zeros(m.shape[0], dtype=bool)


def fill_relation_np(total, offsets, sizes, src, dst, lo, hi, starts):
    """Write hom blocks into the total relation matrix.

    For the k-th related base pair ``(src[k], dst[k])`` the source element at
    fibre position ``P`` lies below every target position in
    ``[lo[starts[k] + P], hi[starts[k] + P]]``.
    """
    for k in range(src.shape[0]):
        a, b = src[k], dst[k]
        na, nb = sizes[a], sizes[b]
        s = starts[k]
        q = np.arange(nb)
        block = (q[None, :] >= lo[s:s + na, None]) & (q[None, :] <= hi[s:s + na, None])
        total[offsets[a]:offsets[a] + na, offsets[b]:offsets[b] + nb] |= block
    return total


# -- numba implementations ---------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def closure_nb(rel):
        n = rel.shape[0]
        m = rel.copy()
        for i in range(n):
            m[i, i] = True
        for k in range(n):
            for i in range(n):
                if m[i, k]:
                    for j in range(n):
                        if m[k, j]:
                            m[i, j] = True
        return m

    @njit(cache=True)
    def check_partial_order_nb(m):
        n = m.shape[0]
        for i in range(n):
            if not m[i, i]:
                return NOT_REFLEXIVE
        for i in range(n):
            for j in range(i + 1, n):
                if m[i, j] and m[j, i]:
                    return NOT_ANTISYMMETRIC
        for i in range(n):
            for k in range(n):
                if m[i, k]:
                    for j in range(n):
                        if m[k, j] and not m[i, j]:
                            return NOT_TRANSITIVE
        return ORDER_OK

    @njit(cache=True)
    def up_closure_nb(m, mask):
        n = m.shape[0]
        out = np.zeros(n, dtype=np.bool_)
        for i in range(n):
            if mask[i]:
                for j in range(n):
                    if m[i, j]:
                        out[j] = True
        return out

    @njit(cache=True)
    def down_closure_nb(m, mask):
        n = m.shape[0]
        out = np.zeros(n, dtype=np.bool_)
        for j in range(n):
            if mask[j]:
                for i in range(n):
                    if m[i, j]:
                        out[i] = True
        return out

    @njit(cache=True)
    def fill_relation_nb(total, offsets, sizes, src, dst, lo, hi, starts):
        for k in range(src.shape[0]):
            a = src[k]
            b = dst[k]
            oa = offsets[a]
            ob = offsets[b]
            s = starts[k]
            for p in range(sizes[a]):
                for q in range(lo[s + p], hi[s + p] + 1):
                    total[oa + p, ob + q] = True
        return total

else:  # pragma: no cover
    closure_nb = closure_np
    check_partial_order_nb = check_partial_order_np
    up_closure_nb = up_closure_np
    down_closure_nb = down_closure_np
    fill_relation_nb = fill_relation_np


IMPLEMENTATIONS = {
    "numpy": {
        "closure": closure_np,
        "check_partial_order": check_partial_order_np,
        "up_closure": up_closure_np,
        "down_closure": down_closure_np,
        "fill_relation": fill_relation_np,
    },
    "numba": {
        "closure": closure_nb,
        "check_partial_order": check_partial_order_nb,
        "up_closure": up_closure_nb,
        "down_closure": down_closure_nb,
        "fill_relation": fill_relation_nb,
    },
}

_active = IMPLEMENTATIONS[BACKEND]
closure = _active["closure"]
check_partial_order = _active["check_partial_order"]
up_closure = _active["up_closure"]
down_closure = _active["down_closure"]
fill_relation = _active["fill_relation"]
