# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled float64 kernels: stepwise sweep and budget DP.

Transliteration of ``ujssp._kernels_py`` with C buffers; the two files
mirror each other operation for operation so that both backends produce
bit-identical results.  Keep them in sync when changing either.
"""

from libc.stdlib cimport free, malloc, realloc
from libc.string cimport memmove

from time import perf_counter

import numpy as np

cimport numpy as cnp

from .core import SolveTimeout

cdef double COINCIDE_TOL = 1e-12
cdef double PARALLEL_TOL = 1e-15


cdef struct Env:
    double* slope
    double* icept
    long long* owner
    Py_ssize_t size
    Py_ssize_t cap


cdef int env_reserve(Env* e, Py_ssize_t need) except -1:
    cdef Py_ssize_t cap = e.cap
    if need <= cap:
        return 0
    while cap < need:
        cap *= 2
    e.slope = <double*> realloc(e.slope, cap * sizeof(double))
    e.icept = <double*> realloc(e.icept, cap * sizeof(double))
    e.owner = <long long*> realloc(e.owner, cap * sizeof(long long))
    if e.slope == NULL or e.icept == NULL or e.owner == NULL:
        raise MemoryError()
    e.cap = cap
    return 0


cdef int env_insert(Env* e, double lb, double ub,
                    double a, double b, long long o) except -1:
    """Insert line y = a*x + b; returns 1 when added, 0 when dominated."""
    cdef Py_ssize_t k = e.size
    cdef Py_ssize_t lo, hi, mid, j, eq, i_l, i_r, t, left_end, right_start
    cdef double x_l, x_r, x2

    if k == 0:
        env_reserve(e, 1)
        e.slope[0] = a
        e.icept[0] = b
        e.owner[0] = o
        e.size = 1
        return 1

    lo = 0
    hi = k
    while lo < hi:
        mid = (lo + hi) // 2
        if e.slope[mid] < a:
            lo = mid + 1
        else:
            hi = mid
    j = lo

    eq = -1
    if j < k and abs(e.slope[j] - a) <= PARALLEL_TOL:
        eq = j
    elif j > 0 and abs(e.slope[j - 1] - a) <= PARALLEL_TOL:
        eq = j - 1
    for t in range(j - 1, j + 1):
        if 0 <= t < k and abs(e.slope[t] - a) <= COINCIDE_TOL \
                and abs(e.icept[t] - b) <= COINCIDE_TOL:
            return 0
    if eq >= 0 and e.icept[eq] >= b:
        return 0

    if eq >= 0:
        i_l = eq - 1
        i_r = eq + 1
    else:
        i_l = j - 1
        i_r = j
    x_l = (e.icept[i_l] - b) / (a - e.slope[i_l]) if i_l >= 0 else 0.0
    x_r = (b - e.icept[i_r]) / (e.slope[i_r] - a) if i_r < k else 0.0

    if eq < 0:
        if i_l >= 0 and i_r < k and x_r <= x_l:
            return 0
        if i_r < k and x_r <= lb:
            return 0
        if i_l >= 0 and x_l >= ub:
            return 0

    while i_l > 0:
        x2 = (e.icept[i_l - 1] - b) / (a - e.slope[i_l - 1])
        if x2 >= x_l:
            x_l = x2
            i_l -= 1
        else:
            break
    while i_r < k - 1:
        x2 = (b - e.icept[i_r + 1]) / (e.slope[i_r + 1] - a)
        if x2 <= x_r:
            x_r = x2
            i_r += 1
        else:
            break

    left_end = i_l + 1
    if i_l == 0 and x_l <= lb:
        left_end = 0
    right_start = i_r if i_r < k else k
    if i_r == k - 1 and x_r >= ub:
        right_start = k

    env_reserve(e, left_end + 1 + (k - right_start))
    memmove(e.slope + left_end + 1, e.slope + right_start,
            (k - right_start) * sizeof(double))
    memmove(e.icept + left_end + 1, e.icept + right_start,
            (k - right_start) * sizeof(double))
    memmove(e.owner + left_end + 1, e.owner + right_start,
            (k - right_start) * sizeof(long long))
    e.slope[left_end] = a
    e.icept[left_end] = b
    e.owner[left_end] = o
    e.size = left_end + 1 + (k - right_start)
    return 1


def stepwise_f64(pi, r, c, backward, speedups, deadline):
    """One stepwise sweep; returns (positions, evaluated, peak).

    Positions are 0-based indices into the given job order.
    """
    cdef cnp.ndarray[double, ndim=1] pi_a = np.ascontiguousarray(pi, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] r_a = np.ascontiguousarray(r, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] c_a = np.ascontiguousarray(c, dtype=np.float64)
    cdef Py_ssize_t n = pi_a.shape[0]
    cdef bint bwd = bool(backward)
    cdef bint fast = bool(speedups)
    cdef double dl = -1.0
    if deadline is not None:
        dl = deadline

    cdef cnp.ndarray[double, ndim=1] bound = np.zeros(n + 1)
    cdef Py_ssize_t j, idx, k, step
    cdef double lb, ub
    if bwd:
        bound[0] = 1.0
        for j in range(n):
            bound[j + 1] = bound[j] * pi_a[j]
        lb = bound[n]
        ub = 1.0
    else:
        bound[n] = 0.0
        for j in range(n - 1, -1, -1):
            bound[j] = pi_a[j] * (r_a[j] + bound[j + 1])
        lb = 0.0
        ub = bound[0]

    cdef Env env
    env.cap = 64
    env.size = 0
    env.slope = <double*> malloc(env.cap * sizeof(double))
    env.icept = <double*> malloc(env.cap * sizeof(double))
    env.owner = <long long*> malloc(env.cap * sizeof(long long))

    cdef Py_ssize_t node_cap = 256
    cdef long long* parent = <long long*> malloc(node_cap * sizeof(long long))
    cdef long long* jobidx = <long long*> malloc(node_cap * sizeof(long long))

    cdef Py_ssize_t new_cap = 64
    cdef double* new_a = <double*> malloc(new_cap * sizeof(double))
    cdef double* new_b = <double*> malloc(new_cap * sizeof(double))
    cdef long long* new_o = <long long*> malloc(new_cap * sizeof(long long))

    if env.slope == NULL or env.icept == NULL or env.owner == NULL or \
            parent == NULL or jobidx == NULL or \
            new_a == NULL or new_b == NULL or new_o == NULL:
        raise MemoryError()

    cdef Py_ssize_t n_nodes = 1
    parent[0] = -1
    jobidx[0] = -1

    cdef long long evaluated = 1
    cdef Py_ssize_t peak = 1
    cdef Py_ssize_t n_new, cnt
    cdef double pj, rj, cj, a2, b2, win_lo, win_hi, x, x_eval, v, best_val
    cdef long long best_node, node

    try:
        env.slope[0] = 0.0 if bwd else 1.0
        env.icept[0] = 0.0
        env.owner[0] = 0
        env.size = 1

        for step in range(n):
            j = n - 1 - step if bwd else step
            if dl > 0 and perf_counter() > dl:
                raise SolveTimeout("stepwise solve hit its deadline")
            pj = pi_a[j]
            rj = r_a[j]
            cj = c_a[j]
            k = env.size
            if k > new_cap:
                while new_cap < k:
                    new_cap *= 2
                new_a = <double*> realloc(new_a, new_cap * sizeof(double))
                new_b = <double*> realloc(new_b, new_cap * sizeof(double))
                new_o = <long long*> realloc(new_o, new_cap * sizeof(long long))
                if new_a == NULL or new_b == NULL or new_o == NULL:
                    raise MemoryError()
            n_new = 0
            for idx in range(k):
                if fast:
                    if bwd:
                        win_lo = lb if idx == 0 else \
                            (env.icept[idx - 1] - env.icept[idx]) / \
                            (env.slope[idx] - env.slope[idx - 1])
                        if win_lo > pj:
                            continue
                    else:
                        win_hi = ub if idx == k - 1 else \
                            (env.icept[idx] - env.icept[idx + 1]) / \
                            (env.slope[idx + 1] - env.slope[idx])
                        if win_hi < pj * rj:
                            continue
                if bwd:
                    a2 = pj * (rj + env.slope[idx])
                    b2 = env.icept[idx] - cj
                else:
                    a2 = env.slope[idx] * pj
                    b2 = env.icept[idx] + env.slope[idx] * pj * rj - cj
                if n_nodes == node_cap:
                    node_cap *= 2
                    parent = <long long*> realloc(parent, node_cap * sizeof(long long))
                    jobidx = <long long*> realloc(jobidx, node_cap * sizeof(long long))
                    if parent == NULL or jobidx == NULL:
                        raise MemoryError()
                parent[n_nodes] = env.owner[idx]
                jobidx[n_nodes] = j
                new_a[n_new] = a2
                new_b[n_new] = b2
                new_o[n_new] = n_nodes
                n_nodes += 1
                n_new += 1
                evaluated += 1

            if bwd:
                lb = bound[j]
                cnt = 0
                while env.size - cnt >= 2:
                    x = (env.icept[cnt] - env.icept[cnt + 1]) / \
                        (env.slope[cnt + 1] - env.slope[cnt])
                    if x <= lb:
                        cnt += 1
                    else:
                        break
                if cnt:
                    memmove(env.slope, env.slope + cnt,
                            (env.size - cnt) * sizeof(double))
                    memmove(env.icept, env.icept + cnt,
                            (env.size - cnt) * sizeof(double))
                    memmove(env.owner, env.owner + cnt,
                            (env.size - cnt) * sizeof(long long))
                    env.size -= cnt
            else:
                ub = bound[j + 1]
                while env.size >= 2:
                    x = (env.icept[env.size - 2] - env.icept[env.size - 1]) / \
                        (env.slope[env.size - 1] - env.slope[env.size - 2])
                    if x >= ub:
                        env.size -= 1
                    else:
                        break

            for idx in range(n_new):
                env_insert(&env, lb, ub, new_a[idx], new_b[idx], new_o[idx])
            if env.size > peak:
                peak = env.size

        x_eval = ub if bwd else lb
        best_val = env.slope[0] * x_eval + env.icept[0]
        best_node = env.owner[0]
        for idx in range(1, env.size):
            v = env.slope[idx] * x_eval + env.icept[idx]
            if v > best_val:
                best_val = v
                best_node = env.owner[idx]

        positions = []
        node = best_node
        while node > 0:
            positions.append(jobidx[node])
            node = parent[node]
        positions.sort()
        return positions, evaluated, peak
    finally:
        free(env.slope)
        free(env.icept)
        free(env.owner)
        free(parent)
        free(jobidx)
        free(new_a)
        free(new_b)
        free(new_o)


def dp_f64(pi, r, cost, deadline):
    """Budget DP over integer costs.

    Returns (best_budget, selected_positions, cells).  The take/skip
    decisions are kept as a packed bit plane of n * (C+1) bits.
    """
    cdef cnp.ndarray[double, ndim=1] pi_a = np.ascontiguousarray(pi, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] r_a = np.ascontiguousarray(r, dtype=np.float64)
    cdef cnp.ndarray[long long, ndim=1] c_a = np.ascontiguousarray(cost, dtype=np.int64)
    cdef Py_ssize_t n = pi_a.shape[0]
    cdef double dl = -1.0
    if deadline is not None:
        dl = deadline

    cdef long long total = 0
    cdef Py_ssize_t i
    for i in range(n):
        total += c_a[i]

    cdef cnp.ndarray[double, ndim=1] g = np.zeros(total + 1)
    cdef Py_ssize_t nbytes = (total + 8) // 8
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] take = \
        np.zeros((max(n, 1), nbytes), dtype=np.uint8)
    cdef long long b, ci
    cdef double pii, ri, cand

    for i in range(n - 1, -1, -1):
        if dl > 0 and perf_counter() > dl:
            raise SolveTimeout("budget DP hit its deadline")
        ci = c_a[i]
        pii = pi_a[i]
        ri = r_a[i]
        for b in range(total, ci - 1, -1):
            cand = pii * (ri + g[b - ci])
            if cand > g[b]:
                g[b] = cand
                take[i, b >> 3] |= <cnp.uint8_t> (1 << (b & 7))

    cdef long long best_b = 0
    cdef double best_v = g[0]
    for b in range(1, total + 1):
        if g[b] - b > best_v:
            best_v = g[b] - b
            best_b = b

    positions = []
    b = best_b
    for i in range(n):
        if take[i, b >> 3] >> (b & 7) & 1:
            positions.append(i)
            b -= c_a[i]
    return best_b, positions, n * (total + 1)
