"""Brute-force reference solver and structural checks for small instances.

The enumerator is the ground truth the real solvers are validated
against, so it deliberately shares no pruning or envelope machinery with
them: every one of the 2^n subsets is scored.  Scoring uses an
incremental subset table (append the highest-index job to a smaller
mask) which is an O(2^n) transcription of the expected-reward sum.
"""

from __future__ import annotations

from dataclasses import dataclass
from time import perf_counter
from typing import List, Tuple

import mpmath
import numpy as np

from .core import (
    ABS_TOL,
    REL_TOL,
    CapacityError,
    InputError,
    Instance,
    Solution,
    SolveStats,
    values_close,
)

# 2^n enumeration guard.
MAX_ORACLE_N = 25

# Largest mask block kept fully materialized; higher bits are looped.
_LOW_BITS = 18


@dataclass(frozen=True)
class OracleResult:
    """Optimal solution plus every subset attaining it within tolerance."""

    optimum: Solution
    all_optima: List[Tuple[int, ...]]


def _subset_tables(pi, r, c):
    """Reward/probability/cost tables indexed by bitmask.

    Bit h corresponds to canonical position h, so the highest set bit is
    always the last job of the subset in processing order.
    """
    n = len(pi)
    size = 1 << n
    rew = np.zeros(size)
    prob = np.ones(size)
    cost = np.zeros(size)
    for h in range(n):
        lo = 1 << h
        rew[lo:2 * lo] = rew[:lo] + prob[:lo] * (pi[h] * r[h])
        prob[lo:2 * lo] = prob[:lo] * pi[h]
        cost[lo:2 * lo] = cost[:lo] + c[h]
    return rew, prob, cost


def _mask_to_ids(mask: int, ids_by_pos) -> Tuple[int, ...]:
    out = []
    pos = 0
    while mask:
        if mask & 1:
            out.append(ids_by_pos[pos])
        mask >>= 1
        pos += 1
    return tuple(out)


def brute_force(instance: Instance) -> OracleResult:
    """Enumerate all subsets and return the maximum of z(S).

    Ids in the result refer to the caller's instance; subsets are listed
    in canonical order.  Raises CapacityError above n = 25.
    """
    n = instance.n
    if n > MAX_ORACLE_N:
        raise CapacityError(f"brute force capped at n={MAX_ORACLE_N}, got {n}")
    start = perf_counter()
    pos_of = instance.canonical_positions()
    ids_by_pos = sorted(pos_of, key=pos_of.get)
    jobs = [instance.job(jid) for jid in ids_by_pos]

    if instance.precision_bits is not None:
        return _brute_force_mp(instance, ids_by_pos, jobs, start)

    pi = np.array([j.pi for j in jobs], dtype=float)
    r = np.array([j.reward for j in jobs], dtype=float)
    c = np.array([j.cost for j in jobs], dtype=float)

    lo_bits = min(n, _LOW_BITS)
    hi_bits = n - lo_bits
    rew_lo, prob_lo, cost_lo = _subset_tables(pi[:lo_bits], r[:lo_bits], c[:lo_bits])
    rew_hi, _, cost_hi = _subset_tables(pi[lo_bits:], r[lo_bits:], c[lo_bits:])

    best_val = -np.inf
    best_mask = 0
    for hi in range(1 << hi_bits):
        z = rew_lo + prob_lo * rew_hi[hi] - cost_lo - cost_hi[hi]
        k = int(np.argmax(z))
        if z[k] > best_val:
            best_val = float(z[k])
            best_mask = (hi << lo_bits) | k

    cut = best_val - max(ABS_TOL, REL_TOL * abs(best_val))
    optima = []
    for hi in range(1 << hi_bits):
        z = rew_lo + prob_lo * rew_hi[hi] - cost_lo - cost_hi[hi]
        for k in np.nonzero(z >= cut)[0]:
            optima.append((hi << lo_bits) | int(k))
    optima.sort()

    sel = _mask_to_ids(best_mask, ids_by_pos)
    sel_rew = float(
        rew_lo[best_mask & ((1 << lo_bits) - 1)]
        + prob_lo[best_mask & ((1 << lo_bits) - 1)] * rew_hi[best_mask >> lo_bits]
    )
    sel_cost = float(
        cost_lo[best_mask & ((1 << lo_bits) - 1)] + cost_hi[best_mask >> lo_bits]
    )
    stats = SolveStats(subsets_evaluated=1 << n, runtime=perf_counter() - start)
    solution = Solution(selected=sel, objective=best_val,
                        expected_reward=sel_rew, total_cost=sel_cost, stats=stats)
    return OracleResult(optimum=solution,
                        all_optima=[_mask_to_ids(m, ids_by_pos) for m in optima])


def _brute_force_mp(instance, ids_by_pos, jobs, start) -> OracleResult:
    """mpmath variant of the enumerator (small n only)."""
    n = len(jobs)
    with mpmath.workprec(instance.precision_bits):
        rew = [mpmath.mpf(0)] * (1 << n)
        prob = [mpmath.mpf(1)] * (1 << n)
        cost = [mpmath.mpf(0)] * (1 << n)
        for h in range(n):
            lo = 1 << h
            for m in range(lo):
                rew[lo + m] = rew[m] + prob[m] * jobs[h].pi * jobs[h].reward
                prob[lo + m] = prob[m] * jobs[h].pi
                cost[lo + m] = cost[m] + jobs[h].cost
        z = [rew[m] - cost[m] for m in range(1 << n)]
        best_mask = max(range(1 << n), key=lambda m: (z[m], -m))
        optima = [m for m in range(1 << n) if z[m] == z[best_mask]]
    stats = SolveStats(subsets_evaluated=1 << n, runtime=perf_counter() - start)
    solution = Solution(
        selected=_mask_to_ids(best_mask, ids_by_pos),
        objective=z[best_mask], expected_reward=rew[best_mask],
        total_cost=cost[best_mask], stats=stats)
    return OracleResult(optimum=solution,
                        all_optima=[_mask_to_ids(m, ids_by_pos) for m in optima])


def check_equal_expected_reward_structure(instance: Instance, subset) -> bool:
    """Necessary optimality structure when all pi*reward are equal.

    With a common expected reward per job, a subset can only be optimal
    if it contains (1) a globally cheapest job and (2), for every
    non-final member, a cheapest job among those later in the canonical
    order.  The empty subset passes vacuously.
    """
    jobs = list(instance.jobs)
    if jobs:
        k0 = jobs[0].pi * jobs[0].reward
        for j in jobs[1:]:
            if not values_close(j.pi * j.reward, k0):
                raise InputError("jobs do not share a common expected reward")

    subset = set(subset)
    if not subset:
        return True
    pos_of = instance.canonical_positions()
    for jid in subset:
        if jid not in pos_of:
            raise InputError(f"unknown job id {jid}")
    ids_by_pos = sorted(pos_of, key=pos_of.get)
    costs = [instance.job(jid).cost for jid in ids_by_pos]
    sel_pos = sorted(pos_of[jid] for jid in subset)

    def contains_min_cost_after(start_pos: int) -> bool:
        tail = costs[start_pos:]
        if not tail:
            return False
        cmin = min(tail)
        return any(
            p >= start_pos and values_close(costs[p], cmin, rel=0.0, abs_floor=ABS_TOL)
            for p in sel_pos
        )

    if not contains_min_cost_after(0):
        return False
    for p in sel_pos[:-1]:
        if not contains_min_cost_after(p + 1):
            return False
    return True
