"""Pure-Python float64 kernels: stepwise sweep and budget DP.

Fallback twin of the compiled extension ``ujssp._kernels``.  The two
files mirror each other operation for operation so that both backends
produce bit-identical results; keep them in sync when changing either.
"""

from __future__ import annotations

from time import perf_counter

import numpy as np

from .core import SolveTimeout

_COINCIDE_TOL = 1e-12
_PARALLEL_TOL = 1e-15


def _env_insert(slope, icept, owner, lb, ub, a, b, o):
    """Insert line y = a*x + b into the envelope; True when added."""
    k = len(slope)
    if k == 0:
        slope.append(a)
        icept.append(b)
        owner.append(o)
        return True

    lo, hi = 0, k
    while lo < hi:
        mid = (lo + hi) // 2
        if slope[mid] < a:
            lo = mid + 1
        else:
            hi = mid
    j = lo

    eq = -1
    if j < k and abs(slope[j] - a) <= _PARALLEL_TOL:
        eq = j
    elif j > 0 and abs(slope[j - 1] - a) <= _PARALLEL_TOL:
        eq = j - 1
    for t in (j - 1, j):
        if 0 <= t < k and abs(slope[t] - a) <= _COINCIDE_TOL \
                and abs(icept[t] - b) <= _COINCIDE_TOL:
            return False
    if eq >= 0 and icept[eq] >= b:
        return False

    if eq >= 0:
        i_l, i_r = eq - 1, eq + 1
    else:
        i_l, i_r = j - 1, j
    x_l = (icept[i_l] - b) / (a - slope[i_l]) if i_l >= 0 else 0.0
    x_r = (b - icept[i_r]) / (slope[i_r] - a) if i_r < k else 0.0

    if eq < 0:
        if i_l >= 0 and i_r < k and x_r <= x_l:
            return False
        if i_r < k and x_r <= lb:
            return False
        if i_l >= 0 and x_l >= ub:
            return False

    while i_l > 0:
        x2 = (icept[i_l - 1] - b) / (a - slope[i_l - 1])
        if x2 >= x_l:
            x_l = x2
            i_l -= 1
        else:
            break
    while i_r < k - 1:
        x2 = (b - icept[i_r + 1]) / (slope[i_r + 1] - a)
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

    del slope[left_end:right_start]
    del icept[left_end:right_start]
    del owner[left_end:right_start]
    slope.insert(left_end, a)
    icept.insert(left_end, b)
    owner.insert(left_end, o)
    return True


def stepwise_f64(pi, r, c, backward, speedups, deadline):
    """One stepwise sweep; returns (positions, evaluated, peak).

    Positions are 0-based indices into the given job order.
    """
    n = len(pi)
    if backward:
        bound = [1.0] * (n + 1)
        for j in range(n):
            bound[j + 1] = bound[j] * pi[j]
        lb, ub = bound[n], 1.0
    else:
        bound = [0.0] * (n + 1)
        for j in range(n - 1, -1, -1):
            bound[j] = pi[j] * (r[j] + bound[j + 1])
        lb, ub = 0.0, bound[0]

    slope = [0.0 if backward else 1.0]
    icept = [0.0]
    owner = [0]
    parent = [-1]
    jobidx = [-1]
    evaluated = 1
    peak = 1

    steps = range(n - 1, -1, -1) if backward else range(n)
    for j in steps:
        if deadline is not None and perf_counter() > deadline:
            raise SolveTimeout("stepwise solve hit its deadline")
        pj = pi[j]
        rj = r[j]
        cj = c[j]
        k = len(slope)
        new_a = []
        new_b = []
        new_o = []
        for idx in range(k):
            if speedups:
                if backward:
                    win_lo = lb if idx == 0 else \
                        (icept[idx - 1] - icept[idx]) / (slope[idx] - slope[idx - 1])
                    if win_lo > pj:
                        continue
                else:
                    win_hi = ub if idx == k - 1 else \
                        (icept[idx] - icept[idx + 1]) / (slope[idx + 1] - slope[idx])
                    if win_hi < pj * rj:
                        continue
            if backward:
                a2 = pj * (rj + slope[idx])
                b2 = icept[idx] - cj
            else:
                a2 = slope[idx] * pj
                b2 = icept[idx] + slope[idx] * pj * rj - cj
            parent.append(owner[idx])
            jobidx.append(j)
            new_a.append(a2)
            new_b.append(b2)
            new_o.append(len(parent) - 1)
            evaluated += 1

        if backward:
            new_lb = bound[j]
            cnt = 0
            while len(slope) - cnt >= 2:
                x = (icept[cnt] - icept[cnt + 1]) / (slope[cnt + 1] - slope[cnt])
                if x <= new_lb:
                    cnt += 1
                else:
                    break
            if cnt:
                del slope[:cnt], icept[:cnt], owner[:cnt]
            lb = new_lb
        else:
            new_ub = bound[j + 1]
            while len(slope) >= 2:
                x = (icept[-2] - icept[-1]) / (slope[-1] - slope[-2])
                if x >= new_ub:
                    del slope[-1], icept[-1], owner[-1]
                else:
                    break
            ub = new_ub

        for a2, b2, o2 in zip(new_a, new_b, new_o):
            _env_insert(slope, icept, owner, lb, ub, a2, b2, o2)
        if len(slope) > peak:
            peak = len(slope)

    x_eval = ub if backward else lb
    best_val = slope[0] * x_eval + icept[0]
    best_node = owner[0]
    for idx in range(1, len(slope)):
        v = slope[idx] * x_eval + icept[idx]
        if v > best_val:
            best_val = v
            best_node = owner[idx]

    positions = []
    node = best_node
    while node > 0:
        positions.append(jobidx[node])
        node = parent[node]
    positions.sort()
    return positions, evaluated, peak


def dp_f64(pi, r, cost, deadline):
    """Budget DP over integer costs.

    Returns (best_budget, selected_positions, cells).  The take/skip
    decisions are kept as a packed bit plane of n * (C+1) bits.
    """
    n = len(pi)
    total = int(sum(cost))
    g = np.zeros(total + 1)
    nbytes = (total + 8) // 8
    take = np.zeros((max(n, 1), nbytes), dtype=np.uint8)
    row = np.zeros(total + 1, dtype=bool)
    for i in range(n - 1, -1, -1):
        if deadline is not None and perf_counter() > deadline:
            raise SolveTimeout("budget DP hit its deadline")
        ci = int(cost[i])
        cand = pi[i] * (r[i] + g[:total + 1 - ci])
        seg = g[ci:]
        row[:] = False
        row[ci:] = cand > seg
        take[i] = np.packbits(row, bitorder="little")[:nbytes]
        np.maximum(seg, cand, out=seg)

    best_b = int(np.argmax(g - np.arange(total + 1)))
    positions = []
    b = best_b
    for i in range(n):
        if take[i, b >> 3] >> (b & 7) & 1:
            positions.append(i)
            b -= int(cost[i])
    return best_b, positions, n * (total + 1)
