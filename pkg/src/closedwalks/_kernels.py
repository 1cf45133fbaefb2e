"""Compiled inner loops.

Walk-trace conventions shared by every kernel: ``nodes[0..L]`` is the walk,
step ``i`` (1 <= i <= L) moves from ``nodes[i-1]`` to ``nodes[i]`` and is the
step that fetched N(nodes[i-1]). ``rows[j]`` locates N(nodes[j]) in the CSR
pair ``(offsets, nbrs)``, ``degs[j] = d(nodes[j])``; both are known for
j < L only. Steps t+1..L are counted.

Counters return ``(s1, s2, ns)`` indexed by closed-walk length k: the sum of
increments, the sum of squared increments, and how many steps had a full
window for that k. In log mode s1/s2 hold log-sums.
"""
import numpy as np
from numba import njit

NEG_INF = -np.inf


@njit(cache=True, nogil=True)
def walk_csr(offsets, nbrs, start, uniforms):
    m = uniforms.shape[0]
    nodes = np.empty(m + 1, dtype=np.int64)
    nodes[0] = start
    cur = start
    for i in range(m):
        lo = offsets[cur]
        d = offsets[cur + 1] - lo
        j = np.int64(uniforms[i] * d)
        if j >= d:
            j = d - 1
        cur = nbrs[lo + j]
        nodes[i + 1] = cur
    return nodes


@njit(cache=True, inline="always")
def _contains(nbrs, lo, hi, x):
    while lo < hi:
        mid = (lo + hi) >> 1
        v = nbrs[mid]
        if v < x:
            lo = mid + 1
        elif v > x:
            hi = mid
        else:
            return True
    return False


@njit(cache=True, nogil=True)
def intersect_count(nbrs, alo, ahi, blo, bhi):
    if ahi - alo > bhi - blo:
        alo, ahi, blo, bhi = blo, bhi, alo, ahi
    count = 0
    for p in range(alo, ahi):
        if _contains(nbrs, blo, bhi, nbrs[p]):
            count += 1
    return count


@njit(cache=True, inline="always")
def _logadd(a, b):
    if a == NEG_INF:
        return b
    if a > b:
        return a + np.log1p(np.exp(b - a))
    return b + np.log1p(np.exp(a - b))


@njit(cache=True, inline="always")
def _add(s1, s2, k, w, log_mode):
    if log_mode:
        s1[k] = _logadd(s1[k], w)
        s2[k] = _logadd(s2[k], 2.0 * w)
    else:
        s1[k] += w
        s2[k] += w * w


def _alloc(K, log_mode):
    fill = -np.inf if log_mode else 0.0
    return (np.full(K + 1, fill), np.full(K + 1, fill), np.zeros(K + 1, dtype=np.int64))


@njit(cache=True, nogil=True)
def _direct(nodes, degs, t, L, K, log_mode, trace_k, inc, s1, s2, ns):
    for i in range(t + 1, L + 1):
        w = 0.0 if log_mode else 1.0
        for k in range(1, K + 1):
            if i - k < 0:
                break
            if k >= 2:
                d = degs[i - k + 1]
                w = w + np.log(d) if log_mode else w * d
            ns[k] += 1
            if nodes[i - k] == nodes[i]:
                _add(s1, s2, k, w, log_mode)
                if k == trace_k:
                    inc[i - t - 1] = w


@njit(cache=True, nogil=True)
def _phi(nodes, rows, degs, offsets, nbrs, t, L, K, log_mode, trace_k, inc, s1, s2, ns):
    for i in range(t + 1, L + 1):
        r = rows[i - 1]
        lo = offsets[r]
        hi = offsets[r + 1]
        w = 0.0 if log_mode else 1.0
        for k in range(2, K + 1):
            if i - k < 0:
                break
            if k >= 3:
                d = degs[i - k + 1]
                w = w + np.log(d) if log_mode else w * d
            ns[k] += 1
            if _contains(nbrs, lo, hi, nodes[i - k]):
                _add(s1, s2, k, w, log_mode)
                if k == trace_k:
                    inc[i - t - 1] = w


@njit(cache=True, nogil=True)
def _common(nodes, rows, degs, offsets, nbrs, t, L, K, log_mode, trace_k, inc, s1, s2, ns):
    for i in range(t + 1, L + 1):
        r = rows[i - 1]
        lo = offsets[r]
        hi = offsets[r + 1]
        w = 0.0 if log_mode else 1.0
        for k in range(3, K + 1):
            if i - k + 1 < 0:
                break
            if k >= 4:
                d = degs[i - k + 2]
                w = w + np.log(d) if log_mode else w * d
            ns[k] += 1
            q = rows[i - k + 1]
            c = intersect_count(nbrs, offsets[q], offsets[q + 1], lo, hi)
            if c > 0:
                x = w + np.log(c) if log_mode else w * c
                _add(s1, s2, k, x, log_mode)
                if k == trace_k:
                    inc[i - t - 1] = x


def count_closed_walks(kind, nodes, rows, degs, offsets, nbrs, t, L, K,
                       log_mode=False, trace_k=0):
    """Run one counter kernel; returns (s1, s2, ns, increments).

    ``increments`` holds the per-step increment for ``trace_k`` (zeros when
    ``trace_k`` is 0); in log mode it holds log-increments with -inf for 0.
    """
    s1, s2, ns = _alloc(K, log_mode)
    n_inc = max(L - t, 0) if trace_k else 0
    inc = np.full(n_inc, -np.inf if log_mode else 0.0)
    if kind == "naive":
        _direct(nodes, degs, t, L, K, log_mode, trace_k, inc, s1, s2, ns)
    elif kind == "phi":
        _phi(nodes, rows, degs, offsets, nbrs, t, L, K, log_mode, trace_k, inc, s1, s2, ns)
    elif kind == "common":
        _common(nodes, rows, degs, offsets, nbrs, t, L, K, log_mode, trace_k, inc, s1, s2, ns)
    else:
        raise ValueError(f"unknown counter kind {kind!r}")
    return s1, s2, ns, inc


@njit(cache=True, nogil=True)
def jacobi_eigenvalues(a, tol, max_sweeps):
    """Cyclic Jacobi on a symmetric matrix (overwritten). Returns the
    diagonal, the final off-diagonal Frobenius norm and the sweep count."""
    n = a.shape[0]
    total = 0.0
    for i in range(n):
        for j in range(n):
            total += a[i, j] * a[i, j]
    scale = np.sqrt(total)
    off = 0.0
    sweeps = 0
    for sweep in range(max_sweeps):
        off = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off += 2.0 * a[i, j] * a[i, j]
        off = np.sqrt(off)
        if off <= tol * scale:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    tt = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
                else:
                    tt = -1.0 / (-theta + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(tt * tt + 1.0)
                s = tt * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
    diag = np.empty(n)
    for i in range(n):
        diag[i] = a[i, i]
    return diag, off, sweeps


@njit(cache=True, nogil=True)
def count_closed_walks_dfs(offsets, nbrs, k):
    """Enumerate every length-k walk depth first and count those that
    return to their start."""
    n = offsets.shape[0] - 1
    stack = np.empty(k + 1, dtype=np.int64)  # node at each depth
    pos = np.empty(k + 1, dtype=np.int64)    # next neighbor slot at each depth
    total = 0
    for s in range(n):
        stack[0] = s
        pos[0] = offsets[s]
        depth = 0
        while depth >= 0:
            if depth == k:
                if stack[k] == s:
                    total += 1
                depth -= 1
                continue
            v = stack[depth]
            p = pos[depth]
            if p == offsets[v + 1]:
                depth -= 1
                continue
            pos[depth] = p + 1
            u = nbrs[p]
            depth += 1
            stack[depth] = u
            pos[depth] = offsets[u]
    return total
