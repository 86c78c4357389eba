"""Hot loops: AC closure saturation and ordered-partition enumeration.

Each kernel has a numba version and a pure numpy / Python fallback.  Set
``CQAC_KERNEL=numpy`` in the environment to force the fallback; the default
uses numba when it can be imported.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba as nb
except ImportError:  # pragma: no cover - numba is a declared dependency
    nb = None


def _want_jit() -> bool:
    return nb is not None and os.environ.get("CQAC_KERNEL", "numba").lower() != "numpy"


USE_JIT = _want_jit()


# ---------------------------------------------------------------------------
# closure saturation
#
# le, lt, ne are n x n boolean matrices over the index set (variables then
# constants).  ``nb_base`` holds the != facts that were not produced by the
# disequality propagation rule; with ``depth_one`` that rule only consumes base
# facts.  Returns False as soon as x < x or x != x appears.


def _saturate_py(le, lt, ne, nbase, depth_one):
    n = le.shape[0]
    while True:
        before = (le.sum(), lt.sum(), ne.sum())
        le |= lt
        sym = lt | lt.T
        ne |= sym
        nbase |= sym
        ne |= ne.T
        nbase |= nbase.T
        lt |= le & ne
        le[:] = _transitive(le)
        lt[:] = _transitive(lt)
        src = nbase if depth_one else ne
        a = (le[:, :, None] & le[:, None, :] & src[None, :, :]).reshape(n, n * n)
        b = (le[:, None, :] & le[None, :, :]).reshape(n * n, n)
        hit = (a.astype(np.int64) @ b.astype(np.int64)) > 0
        ne |= hit | hit.T
        if lt.diagonal().any() or ne.diagonal().any():
            return False
        if (le.sum(), lt.sum(), ne.sum()) == before:
            return True


def _transitive(m):
    m = m.copy()
    while True:
        nxt = m | ((m.astype(np.int64) @ m.astype(np.int64)) > 0)
        if (nxt == m).all():
            return m
        m = nxt


def _saturate_jit_impl(le, lt, ne, nbase, depth_one):
    n = le.shape[0]
    changed = True
    while changed:
        changed = False
        for i in range(n):
            for j in range(n):
                if lt[i, j]:
                    if not le[i, j]:
                        le[i, j] = True
                        changed = True
                    if not ne[i, j] or not ne[j, i]:
                        ne[i, j] = True
                        ne[j, i] = True
                        changed = True
                    nbase[i, j] = True
                    nbase[j, i] = True
                if ne[i, j] and not ne[j, i]:
                    ne[j, i] = True
                    changed = True
                if nbase[i, j]:
                    nbase[j, i] = True
                if le[i, j] and ne[i, j] and not lt[i, j]:
                    lt[i, j] = True
                    changed = True
        for k in range(n):
            for i in range(n):
                if le[i, k]:
                    for j in range(n):
                        if le[k, j] and not le[i, j]:
                            le[i, j] = True
                            changed = True
                if lt[i, k]:
                    for j in range(n):
                        if lt[k, j] and not lt[i, j]:
                            lt[i, j] = True
                            changed = True
        for w in range(n):
            for z in range(w + 1, n):
                if depth_one:
                    if not nbase[w, z]:
                        continue
                elif not ne[w, z]:
                    continue
                for x in range(n):
                    if not (le[x, w] and le[x, z]):
                        continue
                    for y in range(n):
                        if le[w, y] and le[z, y] and not ne[x, y]:
                            ne[x, y] = True
                            ne[y, x] = True
                            changed = True
        for i in range(n):
            if lt[i, i] or ne[i, i]:
                return False
    return True


if nb is not None:
    _saturate_jit = nb.njit(cache=True)(_saturate_jit_impl)
else:  # pragma: no cover
    _saturate_jit = None


def saturate(le, lt, ne, nbase, depth_one=True) -> bool:
    """Close the matrices in place under the elemental implications."""
    if USE_JIT:
        return bool(_saturate_jit(le, lt, ne, nbase, depth_one))
    return _saturate_py(le, lt, ne, nbase, depth_one)


# ---------------------------------------------------------------------------
# ordered partitions
#
# Elements 0..n-1 are variables, n..m-1 constants in increasing order.  A
# result row gives each element's block position; constants start in their own
# blocks in order.  req_lt[a, b] demands a < b, req_le[a, b] demands a <= b and
# req_ne[a, b] demands a != b; any pair is checked as soon as both are placed.


def _orders_impl(n, m, req_lt, req_le, req_ne, out, fill):
    pos = np.full(m, -1, dtype=np.int64)
    for c in range(n, m):
        pos[c] = c - n
    nblocks = np.zeros(n + 1, dtype=np.int64)
    nblocks[0] = m - n
    opt = np.zeros(n + 1, dtype=np.int64)
    chose_new = np.zeros(n + 1, dtype=np.bool_)
    gap = np.zeros(n + 1, dtype=np.int64)
    count = 0
    level = 0
    undo = False
    while level >= 0:
        if undo:
            # take back the placement made at this level
            if chose_new[level]:
                g = gap[level]
                for e in range(m):
                    if (e >= n or e < level) and pos[e] > g:
                        pos[e] -= 1
            pos[level] = -1
            undo = False
        if level == n:
            if fill:
                for e in range(m):
                    out[count, e] = pos[e]
                out[count, m] = nblocks[n]
            count += 1
            level -= 1
            undo = level >= 0
            continue
        b = nblocks[level]
        placed = False
        while opt[level] < 2 * b + 1:
            o = opt[level]
            opt[level] += 1
            join = o < b
            g = o - b
            ok = True
            for e in range(m):
                if not (e >= n or e < level):
                    continue
                pe = pos[e]
                if join:
                    cmp = 0 if pe == o else (1 if pe > o else -1)
                else:
                    cmp = -1 if pe < g else 1
                # cmp is the sign of pos(e) - pos(level)
                if req_lt[level, e] and cmp != 1:
                    ok = False
                elif req_lt[e, level] and cmp != -1:
                    ok = False
                elif req_le[level, e] and cmp == -1:
                    ok = False
                elif req_le[e, level] and cmp == 1:
                    ok = False
                elif req_ne[level, e] and cmp == 0:
                    ok = False
                if not ok:
                    break
            if not ok:
                continue
            if join:
                pos[level] = o
                chose_new[level] = False
            else:
                for e in range(m):
                    if (e >= n or e < level) and pos[e] >= g:
                        pos[e] += 1
                pos[level] = g
                chose_new[level] = True
                gap[level] = g
            placed = True
            break
        if placed:
            nblocks[level + 1] = b + (1 if chose_new[level] else 0)
            level += 1
            opt[level] = 0
        else:
            opt[level] = 0
            level -= 1
            undo = level >= 0
    return count


if nb is not None:
    _orders_jit = nb.njit(cache=True)(_orders_impl)
else:  # pragma: no cover
    _orders_jit = None


def ordered_partitions(n_vars, n_consts, req_lt, req_le, req_ne) -> np.ndarray:
    """All block-position vectors satisfying the pairwise requirements.

    Returns an int array of shape (count, n_vars + n_consts + 1); the last column
    is the number of blocks.
    """
    m = n_vars + n_consts
    req_lt = np.ascontiguousarray(req_lt, dtype=np.bool_)
    req_le = np.ascontiguousarray(req_le, dtype=np.bool_)
    req_ne = np.ascontiguousarray(req_ne, dtype=np.bool_)
    runner = _orders_jit if USE_JIT else _orders_impl
    dummy = np.zeros((1, m + 1), dtype=np.int64)
    count = runner(n_vars, m, req_lt, req_le, req_ne, dummy, False)
    out = np.zeros((count, m + 1), dtype=np.int64)
    if count:
        runner(n_vars, m, req_lt, req_le, req_ne, out, True)
    return out
