"""Upper bounds and LP/MILP export.

Three exports share the LP text format:

- the compact mixed-integer model whose optimum is the true optimum
  (selection binaries x_j plus reach-probability variables P_j);
- the position-assignment relaxation, whose profit matrix caps the
  contribution of job j in slot k by pairing it with the k-1 largest
  predecessor probabilities;
- the same relaxation refined with order-preserving constraints, either
  one pairwise row per conflicting pair or aggregated big-M rows with
  indicator binaries.

The relaxation itself is solved natively (scipy's exact rectangular
assignment solver), so no external MILP solver is ever required; the
adapter at the bottom can drive one when configured.
"""

from __future__ import annotations

import math
import os
import shlex
import subprocess
import tempfile
from dataclasses import dataclass
from enum import Enum
from time import perf_counter
from typing import List, Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import (
    CLASSIFY_TOL,
    InputError,
    Instance,
    Solution,
    SolveStats,
    SolverAdapterError,
    evaluate_selection,
    net_profit,
)

SOLVER_ENV_VAR = "UJSSP_SOLVER_CMD"


class Refinement(Enum):
    NONE = "none"
    PAIRWISE = "pairwise"
    BIG_M = "bigm"


def _canonical_jobs(instance: Instance):
    pos_of = instance.canonical_positions()
    ids_by_pos = sorted(pos_of, key=pos_of.get)
    return ids_by_pos, [instance.job(jid) for jid in ids_by_pos]


def assignment_matrix(instance: Instance) -> np.ndarray:
    """Profit cap q[j, k] of placing job j+1 in position k+1 (0-based).

    Position k+1 multiplies the job's expected reward by the k largest
    probabilities among its predecessors in canonical order; positions
    beyond the job's own index are unreachable and stay zero.
    """
    _, jobs = _canonical_jobs(instance)
    n = len(jobs)
    pi = [float(j.pi) for j in jobs]
    q = np.zeros((n, n))
    for j in range(n):
        best_first = sorted(pi[:j], reverse=True)
        prod = 1.0
        pij = float(jobs[j].pi)
        rj = float(jobs[j].reward)
        cj = float(jobs[j].cost)
        for k in range(j + 1):
            if k > 0:
                prod *= best_first[k - 1]
            q[j, k] = max(0.0, prod * pij * rj - cj)
    return q


def assignment_upper_bound(instance: Instance) -> float:
    """Valid upper bound on the optimal net profit."""
    q = assignment_matrix(instance)
    if q.size == 0:
        return 0.0
    rows, cols = linear_sum_assignment(q, maximize=True)
    return float(q[rows, cols].sum())


def solve_identical_prob(instance: Instance) -> Solution:
    """Exact optimum when all success probabilities coincide.

    For each selection size H, a max-weight assignment places jobs into
    slots 1..H with profit max{0, r * pi^k - c}; the best size wins.
    The recovered subset is re-evaluated exactly, so microscopic
    probability differences (within the classifier tolerance) only
    affect the search, never the reported objective.
    """
    ids_by_pos, jobs = _canonical_jobs(instance)
    n = len(jobs)
    if n == 0:
        return Solution(selected=(), objective=0.0, expected_reward=0.0,
                        total_cost=0.0, stats=SolveStats())
    pi0 = float(jobs[0].pi)
    for j in jobs[1:]:
        if abs(float(j.pi) - pi0) > CLASSIFY_TOL:
            raise InputError("probabilities are not identical")
    start = perf_counter()
    r = np.array([float(j.reward) for j in jobs])
    c = np.array([float(j.cost) for j in jobs])
    powers = pi0 ** np.arange(1, n + 1)
    full = np.maximum(0.0, np.outer(r, powers) - c[:, None])

    best_ids: tuple = ()
    best_val = 0.0
    for h in range(n + 1):
        q = full.copy()
        q[:, h:] = 0.0
        rows, cols = linear_sum_assignment(q, maximize=True)
        chosen = [ids_by_pos[j] for j, k in zip(rows, cols)
                  if k < h and q[j, k] > 0.0]
        val = net_profit(instance, chosen)
        if val > best_val:
            best_val = val
            best_ids = tuple(sorted(chosen,
                                    key=lambda jid: ids_by_pos.index(jid)))
    reward, cost, objective = evaluate_selection(instance, best_ids)
    stats = SolveStats(subsets_evaluated=n + 1, runtime=perf_counter() - start)
    return Solution(selected=best_ids, objective=objective,
                    expected_reward=reward, total_cost=cost, stats=stats)


# ---------------------------------------------------------------------------
# LP-format export
# ---------------------------------------------------------------------------

def _num(v: float) -> str:
    return format(float(v), ".17g")


def export_milp(instance: Instance, refinement: Refinement = Refinement.NONE) -> str:
    """Deterministic LP-format text for the chosen model.

    NONE exports the compact exact model; PAIRWISE and BIG_M export the
    position-assignment relaxation with the respective order-preserving
    refinement rows.  Output is byte-stable for a fixed instance and
    flag.
    """
    _, jobs = _canonical_jobs(instance)
    if refinement is Refinement.NONE:
        return _export_compact(jobs)
    return _export_assignment(instance, jobs, refinement)


def _export_compact(jobs) -> str:
    n = len(jobs)
    obj_terms = []
    for j, job in enumerate(jobs, start=1):
        obj_terms.append(f"+ {_num(job.reward)} P_{j}")
        obj_terms.append(f"- {_num(job.cost)} x_{j}")
    lines = ["Maximize", " obj: " + " ".join(obj_terms), "Subject To"]
    for j, job in enumerate(jobs, start=1):
        lines.append(f" init_{j}: P_{j} - {_num(job.pi)} x_{j} <= 0")
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            pij = _num(jobs[j - 1].pi)
            lines.append(
                f" ord_{i}_{j}: P_{j} - {pij} P_{i} + {pij} x_{i} <= {pij}")
    lines.append("Bounds")
    for j in range(1, n + 1):
        lines.append(f" 0 <= P_{j}")
    lines.append("Binaries")
    lines.append(" " + " ".join(f"x_{j}" for j in range(1, n + 1)))
    lines.append("End")
    return "\n".join(lines) + "\n"


def _export_assignment(instance: Instance, jobs, refinement: Refinement) -> str:
    n = len(jobs)
    q = assignment_matrix(instance)
    obj_terms = []
    for j in range(1, n + 1):
        for k in range(1, j + 1):
            if q[j - 1, k - 1] != 0.0:
                obj_terms.append(f"+ {_num(q[j - 1, k - 1])} x_{j}_{k}")
    if not obj_terms:
        obj_terms.append("+ 0 x_1_1")
    lines = ["Maximize", " obj: " + " ".join(obj_terms), "Subject To"]
    for j in range(1, n + 1):
        terms = " + ".join(f"x_{j}_{k}" for k in range(1, n + 1))
        lines.append(f" row_{j}: {terms} = 1")
    for k in range(1, n + 1):
        terms = " + ".join(f"x_{j}_{k}" for j in range(1, n + 1))
        lines.append(f" col_{k}: {terms} = 1")

    if refinement is Refinement.PAIRWISE:
        for j in range(1, n + 1):
            for jp in range(j + 1, n + 1):
                for k in range(2, n + 1):
                    for kp in range(1, k):
                        lines.append(
                            f" uncr1_{j}_{jp}_{k}_{kp}: "
                            f"x_{j}_{k} + x_{jp}_{kp} <= 1")
    else:
        for j in range(2, n + 1):
            for k in range(1, n):
                m1 = min(n - k, j)
                m2 = min(k, n - j)
                t1 = [f"x_{jp}_{kp}" for jp in range(1, j)
                      for kp in range(k + 1, n + 1)]
                t2 = [f"x_{jp}_{kp}" for jp in range(j, n + 1)
                      for kp in range(1, k + 1)]
                lines.append(
                    f" uncr21_{j}_{k}: " + " + ".join(t1)
                    + f" - {m1} d1_{j}_{k} <= 0")
                lines.append(
                    f" uncr22_{j}_{k}: " + " + ".join(t2)
                    + f" - {m2} d2_{j}_{k} <= 0")
                lines.append(
                    f" uncr23_{j}_{k}: d1_{j}_{k} + d2_{j}_{k} <= 1")

    lines.append("Bounds")
    for j in range(1, n + 1):
        for k in range(1, n + 1):
            lines.append(f" 0 <= x_{j}_{k} <= 1")
    if refinement is Refinement.BIG_M and n >= 2:
        lines.append("Binaries")
        names = []
        for j in range(2, n + 1):
            for k in range(1, n):
                names.append(f"d1_{j}_{k}")
                names.append(f"d2_{j}_{k}")
        lines.append(" " + " ".join(names))
    lines.append("End")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# External solver adapter
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SolverResult:
    objective: float
    bound: float
    gap: float


def lp_gap(lp_bound: float, best_found: float) -> float:
    """(root relaxation bound - best found) / best found."""
    return _gap(lp_bound, best_found)


def final_mip_gap(best_upper_bound: float, best_found: float) -> float:
    """(best proven bound - best found) / best found."""
    return _gap(best_upper_bound, best_found)


def _gap(bound: float, best: float) -> float:
    if best == 0.0:
        return 0.0 if bound == 0.0 else math.inf
    return (bound - best) / best


def external_solve(lp_text: str,
                   solver_command: Optional[str] = None) -> Optional[SolverResult]:
    """Run a configured solver wrapper on the LP text.

    The wrapper receives the LP file path as its last argument and must
    print ``OBJ <float>`` and ``BOUND <float>`` lines.  Returns None
    when no command is configured or the executable is missing
    (non-fatal); raises SolverAdapterError on unparseable output.
    """
    command = solver_command or os.environ.get(SOLVER_ENV_VAR)
    if not command:
        return None
    with tempfile.NamedTemporaryFile("w", suffix=".lp", delete=False) as fp:
        fp.write(lp_text)
        path = fp.name
    try:
        proc = subprocess.run(shlex.split(command) + [path],
                              capture_output=True, text=True)
    except FileNotFoundError:
        return None
    finally:
        os.unlink(path)
    if proc.returncode != 0:
        raise SolverAdapterError(
            f"solver exited with {proc.returncode}: {proc.stderr.strip()}")
    obj = bound = None
    for line in proc.stdout.splitlines():
        parts = line.split()
        if len(parts) == 2 and parts[0] == "OBJ":
            obj = float(parts[1])
        elif len(parts) == 2 and parts[0] == "BOUND":
            bound = float(parts[1])
    if obj is None or bound is None:
        raise SolverAdapterError("solver output lacks OBJ/BOUND lines")
    return SolverResult(objective=obj, bound=bound,
                        gap=final_mip_gap(bound, obj))
