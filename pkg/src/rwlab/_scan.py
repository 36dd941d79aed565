"""Compiled interval scans over prefix sums.

The maximal-function kernel treats ``P_k = sum(a[:k])`` as points ``(k, P_k)``.
The average over cells ``[a, b)`` is the slope between points ``a`` and ``b``,
so ``Mf(i)`` is the largest slope between a point of ``{0..i}`` and a point of
``{i+1..n}``.  That maximum is a bridge between the lower hull of the prefix
points and the upper hull of the suffix points; both hulls are kept as
parent-pointer trees so every ``i`` walks only the vertices it needs.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def _cross(P, o, a, b):
    return (a - o) * (P[b] - P[o]) - (P[a] - P[o]) * (b - o)


@njit(cache=True)
def _slope(P, a, b):
    return (P[b] - P[a]) / (b - a)


@njit(cache=True)
def maximal_hull(values):
    """Exact uncentered maximal function of ``|values|`` (cell units)."""
    n = values.size
    out = np.zeros(n)
    if n == 0:
        return out
    P = np.zeros(n + 1)
    for k in range(n):
        P[k + 1] = P[k] + abs(values[k])

    stack = np.empty(n + 1, np.int64)
    prev_lo = np.full(n + 1, -1, np.int64)
    top = 0
    for k in range(n + 1):
        while top >= 2 and _cross(P, stack[top - 2], stack[top - 1], k) <= 0:
            top -= 1
        if top >= 1:
            prev_lo[k] = stack[top - 1]
        stack[top] = k
        top += 1

    next_up = np.full(n + 1, -1, np.int64)
    top = 0
    for k in range(n, -1, -1):
        while top >= 2 and _cross(P, stack[top - 2], stack[top - 1], k) <= 0:
            top -= 1
        if top >= 1:
            next_up[k] = stack[top - 1]
        stack[top] = k
        top += 1

    for i in range(n):
        b = i + 1
        best = _slope(P, i, b)
        while True:
            # best left endpoint for b: unimodal along the prefix lower hull
            a = i
            sa = _slope(P, a, b)
            while prev_lo[a] >= 0:
                c = prev_lo[a]
                sc = _slope(P, c, b)
                if sc > sa:
                    a = c
                    sa = sc
                else:
                    break
            # best right endpoint for a: unimodal along the suffix upper hull
            b = i + 1
            sb = _slope(P, a, b)
            while next_up[b] >= 0:
                c = next_up[b]
                sc = _slope(P, a, c)
                if sc > sb:
                    b = c
                    sb = sc
                else:
                    break
            if sb > best:
                best = sb
            else:
                break
        out[i] = best
    return out


def maximal_reference(values, block=256):
    """O(N^2) exhaustive scan; used as the oracle for :func:`maximal_hull`."""
    a = np.abs(np.asarray(values, dtype=float))
    n = a.size
    P = np.concatenate([[0.0], np.cumsum(a)])
    b = np.arange(n + 1)
    out = np.zeros(n)
    for lo in range(0, n, block):
        rows = np.arange(lo, min(lo + block, n))
        with np.errstate(divide="ignore", invalid="ignore"):
            avg = (P[None, :] - P[rows, None]) / (b[None, :] - rows[:, None])
        avg[b[None, :] <= rows[:, None]] = -np.inf
        # suffix max over right endpoints >= i + 1
        suf = np.maximum.accumulate(avg[:, ::-1], axis=1)[:, ::-1]
        cand = suf[:, 1:]
        cand = np.where(b[None, :n] >= rows[:, None], cand, -np.inf)
        np.maximum(out, cand.max(axis=0), out=out)
    return out


@njit(cache=True)
def ap_scan(w, wd, q, ends):
    """``sup avg(w) * avg(wd)^(q-1)`` over intervals with endpoints in ``ends``."""
    n = w.size
    P = np.zeros(n + 1)
    D = np.zeros(n + 1)
    for k in range(n):
        P[k + 1] = P[k] + w[k]
        D[k + 1] = D[k] + wd[k]
    best = 0.0
    m = ends.size
    for i in range(m):
        a = ends[i]
        for j in range(i + 1, m):
            b = ends[j]
            L = b - a
            v = (P[b] - P[a]) / L * ((D[b] - D[a]) / L) ** (q - 1.0)
            if v > best:
                best = v
    return best


@njit(cache=True)
def rh_scan(v, ends):
    """``sup max_Q(v) * |Q| / v(Q)`` over intervals with endpoints in ``ends``."""
    n = v.size
    P = np.zeros(n + 1)
    for k in range(n):
        P[k + 1] = P[k] + v[k]
    best = 0.0
    m = ends.size
    for i in range(m - 1):
        a = ends[i]
        mx = 0.0
        pos = a
        for j in range(i + 1, m):
            b = ends[j]
            while pos < b:
                if v[pos] > mx:
                    mx = v[pos]
                pos += 1
            r = mx * (b - a) / (P[b] - P[a])
            if r > best:
                best = r
    return best


@njit(cache=True)
def apr_scan(w, q, ends):
    """``sup_{E in Q} (|E|/|Q|) (w(Q)/w(E))^(1/q)`` over interval endpoints ``ends``.

    For a fixed size ``|E| = k`` cells, ``w(E)`` is smallest on the ``k``
    smallest-weight cells of ``Q``, so each ``Q`` needs its cells sorted.
    Extending ``Q`` to the right merges the new (sorted) block into the
    already sorted cells.  The scan maximizes ``k^q / w(E_k)`` and takes the
    root once per interval.
    """
    n = w.size
    m = ends.size
    best = 0.0
    buf = np.empty(n)
    tmp = np.empty(n)
    kq = np.empty(n)
    for k in range(n):
        kq[k] = (k + 1.0) ** q
    for i in range(m - 1):
        cnt = 0
        total = 0.0
        for j in range(i + 1, m):
            b = ends[j]
            blk = np.sort(w[ends[j - 1]:b])
            p = cnt - 1
            r = blk.size - 1
            t = cnt + blk.size - 1
            while r >= 0:
                if p >= 0 and buf[p] > blk[r]:
                    tmp[t] = buf[p]
                    p -= 1
                else:
                    tmp[t] = blk[r]
                    total += blk[r]
                    r -= 1
                t -= 1
            while p >= 0:
                tmp[t] = buf[p]
                p -= 1
                t -= 1
            cnt += blk.size
            buf, tmp = tmp, buf
            s = 0.0
            top = 0.0
            for k in range(cnt):
                s += buf[k]
                val = kq[k] / s
                if val > top:
                    top = val
            val = (top * total / kq[cnt - 1]) ** (1.0 / q)
            if val > best:
                best = val
    return best


@njit(cache=True)
def fujii_wilson_scan(w, ends):
    """``sup_Q (1/w(Q)) sum_{Q} M(w chi_Q)`` over intervals with endpoints in ``ends``."""
    m = ends.size
    best = 0.0
    for i in range(m - 1):
        a = ends[i]
        for j in range(i + 1, m):
            b = ends[j]
            sub = w[a:b]
            mw = maximal_hull(sub)
            r = mw.sum() / sub.sum()
            if r > best:
                best = r
    return best
