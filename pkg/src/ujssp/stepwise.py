"""Forward and backward stepwise exact solvers.

Both directions sweep the jobs once in canonical order and maintain the
set of candidate partial selections as an upper envelope of affine
profit functions of one unknown:

- forward: F(S, r) = R(S) - c(S) + prod(S) * r, where r is the expected
  reward still collectable from later jobs, bounded by [0, R(later)];
- backward: B(S, p) = -c(S) + R(S) * p, where p is the joint success
  probability of earlier selected jobs, bounded by [prod(earlier), 1].

Each step extends every surviving candidate with the current job,
tightens the moving bound, and re-filters through the envelope.  The
parameter interval collapses to a point after the last step, where the
single surviving candidate is the optimum.

Float64 instances run on the compiled kernel when it is available (see
``ujssp._backend``); high-precision instances, trace runs and the
product-partition mode below always use the pure-Python driver.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from enum import Enum
from time import perf_counter
from typing import Callable, List, Optional, Sequence, Tuple

import mpmath

from . import _backend
from .core import (
    InputError,
    Instance,
    Job,
    PrecisionError,
    Solution,
    SolveStats,
    SolveTimeout,
    evaluate_selection,
    values_close,
    z_index,
)
from .envelope import AffineFn, Envelope


class Direction(Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


class Ordering(Enum):
    Z_ORDER = "z"
    ASCENDING = "ascending"
    DESCENDING = "descending"
    RANDOM = "random"


@dataclass(frozen=True)
class StepwiseConfig:
    """Solver knobs.

    Speed-ups default to off so that work counters match the plain
    sweep; enabling them never changes the optimal value.  Orderings
    other than Z_ORDER are only legal when all jobs share the same Z
    index (the product-partition regime), where the sweep order is
    irrelevant to correctness.
    """

    direction: Direction = Direction.FORWARD
    speedups_enabled: bool = False
    ordering: Ordering = Ordering.Z_ORDER
    ordering_seed: int = 0


@dataclass(frozen=True)
class Candidate:
    """A surviving partial selection with its winning sub-interval."""

    subset: tuple
    prob_product: object
    reward: object
    cost: object
    win_lo: object = None
    win_hi: object = None


def extend_filter_speedup(candidate: Candidate, job: Job,
                          direction: Direction) -> bool:
    """Whether extending ``candidate`` with ``job`` can still be optimal.

    Forward: appending the job forces the downstream-reward parameter to
    at least pi*reward, so a candidate winning only below that value
    cannot gain it.  Backward: prepending the job caps the upstream
    probability at pi, so a candidate winning only above pi is out.
    """
    if direction is Direction.FORWARD:
        return not candidate.win_hi < job.pi * job.reward
    return not candidate.win_lo > job.pi


def _canonical_arrays(instance: Instance):
    pos_of = instance.canonical_positions()
    ids_by_pos = sorted(pos_of, key=pos_of.get)
    jobs = [instance.job(jid) for jid in ids_by_pos]
    pi = [j.pi for j in jobs]
    r = [j.reward for j in jobs]
    c = [j.cost for j in jobs]
    return ids_by_pos, pi, r, c


def _drive(pi, r, c, *, backward: bool, speedups: bool, zero, one,
           coincide_tol, parallel_tol,
           trace: Optional[Callable[[dict], None]] = None,
           deadline: Optional[float] = None):
    """Scalar-generic sweep; returns (positions, evaluated, peak).

    ``zero``/``one`` fix the scalar type (float or mpf).  Positions are
    0-based indices into the canonical order.
    """
    n = len(pi)
    if backward:
        prefix = [one] * (n + 1)
        for j in range(n):
            prefix[j + 1] = prefix[j] * pi[j]
        lb, ub = prefix[n], one
    else:
        suffix = [zero] * (n + 1)
        for j in range(n - 1, -1, -1):
            suffix[j] = pi[j] * (r[j] + suffix[j + 1])
        lb, ub = zero, suffix[0]

    env = Envelope(lb, ub, coincide_tol=coincide_tol, parallel_tol=parallel_tol)
    parent = [-1]
    jobidx = [-1]
    env.insert(AffineFn(zero if backward else one, zero, 0))
    evaluated = 1
    peak = 1

    steps = range(n - 1, -1, -1) if backward else range(n)
    for step_no, j in enumerate(steps, start=1):
        if deadline is not None and perf_counter() > deadline:
            raise SolveTimeout(f"deadline hit at step {step_no}/{n}")
        pj, rj, cj = pi[j], r[j], c[j]
        xs = [env.lb] + env.breakpoints() + [env.ub]
        carried = len(env)
        new_lines: List[AffineFn] = []
        for idx, f in enumerate(env.lines):
            if speedups:
                if not backward and xs[idx + 1] < pj * rj:
                    continue
                if backward and xs[idx] > pj:
                    continue
            if backward:
                a2 = pj * (rj + f.slope)
                b2 = f.intercept - cj
            else:
                a2 = f.slope * pj
                b2 = f.intercept + f.slope * pj * rj - cj
            parent.append(f.owner)
            jobidx.append(j)
            new_lines.append(AffineFn(a2, b2, len(parent) - 1))
            evaluated += 1

        if backward:
            env.shrink_lower(prefix[j])
        else:
            env.shrink_upper(suffix[j + 1])
        for line in new_lines:
            env.insert(line)
        peak = max(peak, len(env))
        if trace is not None:
            trace({
                "step": step_no,
                "job_position": j + 1,
                "candidates_before": carried + len(new_lines),
                "candidates_after": len(env),
                "bound": float(prefix[j] if backward else suffix[j + 1]),
                "breakpoints": [float(x) for x in env.breakpoints()],
            })

    x_eval = env.ub if backward else env.lb
    best_node = None
    best_val = None
    for f in env.lines:
        v = f.slope * x_eval + f.intercept
        if best_val is None or v > best_val:
            best_val = v
            best_node = f.owner

    positions = []
    node = best_node
    while node > 0:
        positions.append(jobidx[node])
        node = parent[node]
    positions.sort()
    return positions, evaluated, peak


def _ordered_positions(instance: Instance, ids_by_pos, config: StepwiseConfig):
    """Sweep order as a permutation of canonical positions."""
    if config.ordering is Ordering.Z_ORDER:
        return list(range(instance.n))
    zs = [z_index(instance.job(jid)) for jid in ids_by_pos]
    if zs and not all(values_close(z, zs[0]) for z in zs):
        raise InputError("non-canonical orderings require all Z indices equal")
    keys = [instance.job(jid).pi * instance.job(jid).reward
            for jid in ids_by_pos]
    order = list(range(instance.n))
    if config.ordering is Ordering.ASCENDING:
        order.sort(key=lambda p: keys[p])
    elif config.ordering is Ordering.DESCENDING:
        order.sort(key=lambda p: keys[p], reverse=True)
    else:
        import numpy as np
        rng = np.random.Generator(np.random.Philox(config.ordering_seed))
        order = list(rng.permutation(instance.n))
    return order


def solve(instance: Instance, config: StepwiseConfig = StepwiseConfig(), *,
          trace_sink: Optional[Callable[[dict], None]] = None,
          deadline: Optional[float] = None) -> Solution:
    """Run the configured stepwise sweep and return the exact optimum."""
    start = perf_counter()
    ids_by_pos, pi, r, c = _canonical_arrays(instance)
    order = _ordered_positions(instance, ids_by_pos, config)
    pi_o = [pi[p] for p in order]
    r_o = [r[p] for p in order]
    c_o = [c[p] for p in order]
    backward = config.direction is Direction.BACKWARD

    if instance.precision_bits is None and trace_sink is None:
        positions_o, evaluated, peak = _backend.impl().stepwise_f64(
            pi_o, r_o, c_o, backward, config.speedups_enabled, deadline)
    elif instance.precision_bits is None:
        positions_o, evaluated, peak = _drive(
            pi_o, r_o, c_o, backward=backward,
            speedups=config.speedups_enabled, zero=0.0, one=1.0,
            coincide_tol=1e-12, parallel_tol=1e-15,
            trace=trace_sink, deadline=deadline)
    else:
        with mpmath.workprec(instance.precision_bits):
            zero, one = mpmath.mpf(0), mpmath.mpf(1)
            try:
                positions_o, evaluated, peak = _drive(
                    [mpmath.mpf(x) for x in pi_o],
                    [mpmath.mpf(x) for x in r_o],
                    [mpmath.mpf(x) for x in c_o],
                    backward=backward, speedups=config.speedups_enabled,
                    zero=zero, one=one, coincide_tol=zero, parallel_tol=zero,
                    trace=trace_sink, deadline=deadline)
            except OverflowError as exc:
                raise PrecisionError(
                    f"high-precision arithmetic failed at "
                    f"{instance.precision_bits} bits; raise the bit width"
                ) from exc

    selected_ids = [ids_by_pos[p] for p in sorted(order[p] for p in positions_o)]
    reward, cost, objective = evaluate_selection(instance, selected_ids)
    stats = SolveStats(subsets_evaluated=evaluated, envelope_peak_size=peak,
                       runtime=perf_counter() - start)
    return Solution(selected=tuple(selected_ids), objective=objective,
                    expected_reward=reward, total_cost=cost, stats=stats)


def solve_forward(instance: Instance,
                  config: StepwiseConfig = StepwiseConfig(), **kw) -> Solution:
    return solve(instance, replace(config, direction=Direction.FORWARD), **kw)


def solve_backward(instance: Instance,
                   config: StepwiseConfig = StepwiseConfig(), **kw) -> Solution:
    return solve(instance, replace(config, direction=Direction.BACKWARD), **kw)


def make_trace_writer(fp) -> Callable[[dict], None]:
    """Trace sink writing one JSON object per line to ``fp``."""
    def write(record: dict) -> None:
        fp.write(json.dumps(record) + "\n")
    return write


# ---------------------------------------------------------------------------
# Product-partition mode: equal-Z instances driven in log form.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PppSolveResult:
    """Optimal subset of a reduced product-partition instance.

    ``left`` holds 1-based positions of the selected integers in the
    original input order; ``right`` is the complement.  The products are
    exact big integers, so ``left_product == right_product`` certifies a
    perfect partition (objective equal to the threshold).
    """

    solution: Solution
    left: Tuple[int, ...]
    right: Tuple[int, ...]
    left_product: int
    right_product: int
    threshold: object
    attained: bool


def min_ppp_bits(integers: Sequence[int]) -> int:
    """Mantissa width needed to separate distinct subset products."""
    w = 1
    for a in integers:
        w *= a
    return 2 * max(1, w.bit_length())


def solve_ppp_mode(ppp, ordering: Ordering = Ordering.Z_ORDER, *,
                   ordering_seed: int = 0,
                   precision_bits: Optional[int] = None,
                   deadline: Optional[float] = None) -> PppSolveResult:
    """Solve a product-partition reduction exactly in log form.

    Accepts a ``PppInstance`` (see :mod:`ujssp.instances`) or a reduced
    high-precision Instance carrying one in its origin.  Candidate lines
    are -log(P) - (sqrt(W)/P) * x with P the exact integer product of
    the selected values, so coincidence tests and the final partition
    check are exact; only logs and sqrt(W) are evaluated, at the
    configured precision.
    """
    integers = _ppp_integers(ppp)
    if any(a < 2 for a in integers):
        raise InputError("product-partition values must be >= 2")
    n = len(integers)
    w_total = 1
    for a in integers:
        w_total *= a
    need = min_ppp_bits(integers)
    bits = precision_bits
    if bits is None:
        bits = max(128, need + 64)
    if bits < need:
        raise PrecisionError(
            f"{bits} bits cannot separate subset products; need >= {need}")

    order = list(range(n))
    if ordering is Ordering.ASCENDING:
        order.sort(key=lambda i: integers[i])
    elif ordering is Ordering.DESCENDING:
        order.sort(key=lambda i: integers[i], reverse=True)
    elif ordering is Ordering.RANDOM:
        import numpy as np
        rng = np.random.Generator(np.random.Philox(ordering_seed))
        order = list(rng.permutation(n))
    seq = [integers[i] for i in order]

    start = perf_counter()
    with mpmath.workprec(bits):
        sqrt_w = mpmath.sqrt(w_total)
        threshold = sqrt_w - 1 - mpmath.log(sqrt_w)
        suffix_prod = [1] * (n + 1)
        for t in range(n - 1, -1, -1):
            suffix_prod[t] = suffix_prod[t + 1] * seq[t]

        zero = mpmath.mpf(0)
        env = Envelope(1 / mpmath.mpf(suffix_prod[0]), mpmath.mpf(1),
                       coincide_tol=zero, parallel_tol=zero)
        parent = [-1]
        chosen = [-1]
        prods = [1]
        env.insert(AffineFn(-sqrt_w, zero, 0))
        evaluated = 1
        peak = 1
        for t, a_t in enumerate(seq):
            if deadline is not None and perf_counter() > deadline:
                raise SolveTimeout(f"deadline hit at step {t + 1}/{n}")
            new_lines = []
            for f in env.lines:
                p2 = prods[f.owner] * a_t
                parent.append(f.owner)
                chosen.append(t)
                prods.append(p2)
                new_lines.append(
                    AffineFn(-sqrt_w / p2, -mpmath.log(p2), len(parent) - 1))
                evaluated += 1
            env.shrink_lower(1 / mpmath.mpf(suffix_prod[t + 1]))
            for line in new_lines:
                env.insert(line)
            peak = max(peak, len(env))

        best_val = None
        best_node = 0
        for f in env.lines:
            v = f.slope + f.intercept  # value at x = 1
            if best_val is None or v > best_val:
                best_val = v
                best_node = f.owner
        objective = sqrt_w + best_val

        sel_steps = []
        node = best_node
        while node > 0:
            sel_steps.append(chosen[node])
            node = parent[node]
        left = tuple(sorted(order[t] + 1 for t in sel_steps))
        right = tuple(i for i in range(1, n + 1) if i not in set(left))
        left_product = prods[best_node]
        right_product = w_total // left_product
        reward = sqrt_w * (1 - mpmath.mpf(1) / left_product)
        cost = mpmath.log(mpmath.mpf(left_product))

    stats = SolveStats(subsets_evaluated=evaluated, envelope_peak_size=peak,
                       runtime=perf_counter() - start)
    solution = Solution(selected=left, objective=objective,
                        expected_reward=reward, total_cost=cost, stats=stats)
    return PppSolveResult(
        solution=solution, left=left, right=right,
        left_product=left_product, right_product=right_product,
        threshold=threshold, attained=left_product == right_product)


def _ppp_integers(ppp) -> List[int]:
    if hasattr(ppp, "integers"):
        return list(ppp.integers)
    origin = getattr(ppp, "origin", None)
    if origin is not None and hasattr(origin, "ppp"):
        return list(origin.ppp.integers)
    raise InputError("not a product-partition instance")
