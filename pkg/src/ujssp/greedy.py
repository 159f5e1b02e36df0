"""Greedy selection and detection of its provably-optimal regimes.

Each round adds the job with the largest strict improvement of the net
profit, stopping when no candidate improves.  When all costs coincide,
or all success probabilities coincide, this greedy sweep is exact;
``classify_special_case`` reports which regime applies so callers know
when the result is certified optimal.
"""

from __future__ import annotations

from enum import Enum
from time import perf_counter
from typing import Optional

import numpy as np

from .core import (
    CLASSIFY_TOL,
    GAIN_TOL,
    Instance,
    Solution,
    SolveStats,
    evaluate_selection,
)


class SpecialCase(Enum):
    IDENTICAL_COSTS = "identical-costs"
    IDENTICAL_PROBABILITIES = "identical-probabilities"
    GENERAL = "general"


def classify_special_case(instance: Instance) -> SpecialCase:
    """First matching regime, within 1e-12 absolute on costs/probabilities.

    A non-GENERAL answer certifies that greedy_select returns an
    optimal solution.
    """
    jobs = instance.jobs
    if len(jobs) <= 1:
        return SpecialCase.IDENTICAL_COSTS
    if all(abs(j.cost - jobs[0].cost) <= CLASSIFY_TOL for j in jobs[1:]):
        return SpecialCase.IDENTICAL_COSTS
    if all(abs(j.pi - jobs[0].pi) <= CLASSIFY_TOL for j in jobs[1:]):
        return SpecialCase.IDENTICAL_PROBABILITIES
    return SpecialCase.GENERAL


def greedy_select(instance: Instance,
                  deadline: Optional[float] = None) -> Solution:
    """Iterative best-marginal-gain selection.

    Ties on the gain go to the lowest job id; a job is accepted only if
    its gain exceeds 1e-12, which rules out cycling on zero-gain ties.
    Work is O(n) per round: every candidate's gain follows from prefix
    aggregates of the current selection.
    """
    start = perf_counter()
    pos_of = instance.canonical_positions()
    ids_by_pos = sorted(pos_of, key=pos_of.get)
    jobs = [instance.job(jid) for jid in ids_by_pos]
    n = len(jobs)
    pi = np.array([float(j.pi) for j in jobs])
    r = np.array([float(j.reward) for j in jobs])
    c = np.array([float(j.cost) for j in jobs])
    ids = np.array(ids_by_pos)

    sel = np.zeros(n, dtype=bool)
    evaluated = 0
    while True:
        if deadline is not None and perf_counter() > deadline:
            from .core import SolveTimeout
            raise SolveTimeout("greedy hit its deadline")
        if sel.all():
            break
        # Prefix aggregates of the current selection, exclusive per slot:
        # P_pref = success probability of earlier selected jobs,
        # R_pref = expected reward collected before this slot.
        pi_sel = np.where(sel, pi, 1.0)
        incl = np.cumprod(pi_sel)
        p_pref = np.concatenate(([1.0], incl[:-1]))
        contrib = np.where(sel, p_pref * pi * r, 0.0)
        r_total = contrib.sum()
        r_pref = np.concatenate(([0.0], np.cumsum(contrib)[:-1]))
        # Inserting candidate j at its canonical slot adds its own
        # discounted reward and damps everything scheduled after it.
        gains = p_pref * pi * r - c + (pi - 1.0) * (r_total - r_pref)
        gains[sel] = -np.inf
        evaluated += int((~sel).sum())
        best = gains.max()
        if best <= GAIN_TOL:
            break
        tied = np.nonzero(gains == best)[0]
        sel[tied[np.argmin(ids[tied])]] = True

    selected = tuple(ids_by_pos[p] for p in np.nonzero(sel)[0])
    reward, cost, objective = evaluate_selection(instance, selected)
    stats = SolveStats(subsets_evaluated=evaluated,
                       runtime=perf_counter() - start)
    return Solution(selected=selected, objective=objective,
                    expected_reward=reward, total_cost=cost, stats=stats)
