"""Backward dynamic program over integer budgets.

State (b, i): the best expected revenue attainable when jobs i..n may
still be selected and at most b cost units may be spent.  Filling rows
backward from i = n and scanning max_b {g(b, 1) - b} yields the exact
optimum in O(n * sum(costs)) time, which is why this solver requires
integer costs (it rejects anything fractional).

The solver keeps two rolling rows plus a packed take/skip bit plane of
n * (C+1) bits for reconstruction; ``dp_table`` materializes the full
value table for inspection and property checks on small instances.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from time import perf_counter
from typing import Optional

import numpy as np

from . import _backend
from .core import (
    CapacityError,
    InputError,
    Instance,
    Solution,
    SolveStats,
    evaluate_selection,
)

_TABLE_CELL_CAP = 50_000_000


def _integer_costs(instance: Instance):
    costs = []
    for job in instance.jobs:
        c = job.cost
        if isinstance(c, float) and not c.is_integer():
            raise InputError(
                f"job {job.id}: fractional cost {c}; the budget DP needs "
                f"integer costs")
        try:
            ci = int(c)
        except (TypeError, ValueError):
            raise InputError(f"job {job.id}: non-integer cost {c!r}") from None
        if ci != c:
            raise InputError(
                f"job {job.id}: fractional cost {c}; the budget DP needs "
                f"integer costs")
        costs.append(ci)
    return costs


def solve_dp(instance: Instance, *, parallel: bool = False,
             deadline: Optional[float] = None) -> Solution:
    """Exact optimum via the budget DP; integer costs required.

    ``parallel`` splits each row's budget axis into thread strips (the
    budgets are independent given the next row); results are identical
    to the sequential sweep.  Float64 instances only.
    """
    if instance.precision_bits is not None:
        raise InputError("budget DP supports float64 instances only")
    start = perf_counter()
    _integer_costs(instance)
    pos_of = instance.canonical_positions()
    ids_by_pos = sorted(pos_of, key=pos_of.get)
    jobs = [instance.job(jid) for jid in ids_by_pos]
    pi = np.array([j.pi for j in jobs], dtype=float)
    r = np.array([j.reward for j in jobs], dtype=float)
    c = np.array([int(j.cost) for j in jobs], dtype=np.int64)

    if parallel:
        best_b, positions, cells = _dp_strips(pi, r, c, deadline)
    else:
        best_b, positions, cells = _backend.impl().dp_f64(pi, r, c, deadline)

    selected = tuple(ids_by_pos[p] for p in sorted(positions))
    reward, cost, objective = evaluate_selection(instance, selected)
    stats = SolveStats(subsets_evaluated=cells, runtime=perf_counter() - start)
    assert int(cost) == best_b, "backtracked subset does not spend its budget"
    return Solution(selected=selected, objective=objective,
                    expected_reward=reward, total_cost=cost, stats=stats)


def _dp_strips(pi, r, c, deadline, workers: int = 4):
    """Row update split into independent budget strips (deterministic)."""
    n = len(pi)
    total = int(c.sum())
    g = np.zeros(total + 1)
    nbytes = (total + 8) // 8
    take = np.zeros((max(n, 1), nbytes), dtype=np.uint8)
    row = np.zeros(total + 1, dtype=bool)
    edges = np.linspace(0, total + 1, workers + 1).astype(int)

    def strip(new_g, i, s0, s1):
        ci = int(c[i])
        lo = max(s0, ci)
        if lo >= s1:
            return
        cand = pi[i] * (r[i] + g[lo - ci:s1 - ci])
        row[lo:s1] = cand > g[lo:s1]
        new_g[lo:s1] = np.maximum(g[lo:s1], cand)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        for i in range(n - 1, -1, -1):
            if deadline is not None and perf_counter() > deadline:
                from .core import SolveTimeout
                raise SolveTimeout("budget DP hit its deadline")
            new_g = g.copy()
            row[:] = False
            futures = [pool.submit(strip, new_g, i, int(edges[k]), int(edges[k + 1]))
                       for k in range(workers)]
            for f in futures:
                f.result()
            take[i] = np.packbits(row, bitorder="little")[:nbytes]
            g = new_g

    best_b = int(np.argmax(g - np.arange(total + 1)))
    positions = []
    b = best_b
    for i in range(n):
        if take[i, b >> 3] >> (b & 7) & 1:
            positions.append(i)
            b -= int(c[i])
    return best_b, positions, n * (total + 1)


class DpTable:
    """Full value table g(b, i) for i in 1..n, b in 0..C (small n only)."""

    def __init__(self, instance: Instance):
        if instance.precision_bits is not None:
            raise InputError("budget DP supports float64 instances only")
        _integer_costs(instance)
        pos_of = instance.canonical_positions()
        ids_by_pos = sorted(pos_of, key=pos_of.get)
        jobs = [instance.job(jid) for jid in ids_by_pos]
        n = len(jobs)
        total = int(sum(int(j.cost) for j in jobs))
        if n * (total + 1) > _TABLE_CELL_CAP:
            raise CapacityError("full DP table too large; use solve_dp")
        self.n = n
        self.total_cost = total
        rows = np.zeros((n + 1, total + 1))
        for i in range(n - 1, -1, -1):
            ci = int(jobs[i].cost)
            rows[i] = rows[i + 1]
            cand = jobs[i].pi * (jobs[i].reward + rows[i + 1][:total + 1 - ci])
            rows[i][ci:] = np.maximum(rows[i + 1][ci:], cand)
        self._rows = rows

    def g(self, b: int, i: int) -> float:
        if not (0 <= b <= self.total_cost and 1 <= i <= max(self.n, 1)):
            raise InputError(f"state ({b}, {i}) out of range")
        return float(self._rows[i - 1, b])

    def optimum(self) -> float:
        return float(np.max(self._rows[0] - np.arange(self.total_cost + 1)))
