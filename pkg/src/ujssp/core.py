"""Domain types and exact evaluation for unreliable-job selection.

Conventions used throughout the package:

- A job has a success probability ``pi`` in [0, 1], a selection cost
  ``cost`` >= 0 that is paid whether or not the machine survives, and a
  reward ``reward`` >= 0 collected only if the machine reaches and
  finishes the job.
- Processing stops permanently at the first failure, so the job in
  position k of a sequence pays off with probability equal to the
  product of the success probabilities of positions 1..k.
- For a selected set S, the profit-maximizing sequence orders jobs by
  non-increasing priority index Z = pi * reward / (1 - pi).  All
  evaluation routines assume (or restore) that order, called the
  canonical order below.
- Numeric mode is either float64 (``precision_bits is None``) or
  arbitrary-precision binary floats via mpmath at a fixed mantissa
  width.  Float64 comparisons use a relative tolerance of 1e-9 with an
  absolute floor of 1e-12; high-precision values compare exactly at
  their mantissa width.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import mpmath

# Comparison policy for float64 mode.
REL_TOL = 1e-9
ABS_TOL = 1e-12

# Tolerances shared by the selection algorithms (see envelope / greedy).
COINCIDE_TOL = 1e-12
PARALLEL_TOL = 1e-15
GAIN_TOL = 1e-12
CLASSIFY_TOL = 1e-12


class UjsspError(Exception):
    """Base class for all package-specific errors."""


class InputError(UjsspError, ValueError):
    """Malformed or inconsistent caller input (unknown ids, bad ranges)."""


class CapacityError(UjsspError):
    """Requested computation exceeds a hard size guard."""


class PrecisionError(UjsspError):
    """Configured mantissa width cannot separate the values involved."""


class GenerationError(UjsspError):
    """Instance generator exhausted its retry budget."""


class ParseError(UjsspError, ValueError):
    """Malformed instance or manifest file."""


class SolverAdapterError(UjsspError):
    """External solver produced unparseable output."""


class SolveTimeout(UjsspError):
    """Cooperative deadline reached; raised between solver steps."""


def values_close(a, b, rel: float = REL_TOL, abs_floor: float = ABS_TOL) -> bool:
    """Equality under the float64 comparison policy (works for mpf too)."""
    diff = abs(a - b)
    return diff <= abs_floor or diff <= rel * max(abs(a), abs(b))


@dataclass(frozen=True)
class Job:
    """One unreliable task: success probability, selection cost, reward."""

    id: int
    pi: object
    cost: object
    reward: object

    def __post_init__(self):
        if not (0 <= self.pi <= 1):
            raise InputError(f"job {self.id}: pi={self.pi} outside [0, 1]")
        if self.cost < 0:
            raise InputError(f"job {self.id}: negative cost {self.cost}")
        if self.reward < 0:
            raise InputError(f"job {self.id}: negative reward {self.reward}")


def z_index(job: Job):
    """Priority index pi*reward/(1-pi); +inf sentinel when pi == 1.

    The sentinel makes sure-success jobs sort first, which preserves the
    optimality of the canonical order.  pi == 0 yields Z == 0.
    """
    if job.pi == 1:
        return mpmath.inf if isinstance(job.pi, mpmath.mpf) else math.inf
    return job.pi * job.reward / (1 - job.pi)


@dataclass(frozen=True)
class SolveStats:
    """Work counters attached to a Solution.

    subsets_evaluated counts candidate subsets whose profit value or
    profit function was actually constructed (the empty set included);
    for the budget DP it counts table cells.  envelope_peak_size is the
    largest number of candidate lines simultaneously retained.
    """

    subsets_evaluated: int = 0
    envelope_peak_size: int = 0
    runtime: float = 0.0


@dataclass(frozen=True)
class Instance:
    """Ordered job collection plus numeric-precision mode.

    ``precision_bits is None`` selects float64 arithmetic; an integer
    selects mpmath arithmetic at that mantissa width.  ``origin``
    optionally records how the instance was produced (see
    :mod:`ujssp.instances`).
    """

    jobs: tuple
    precision_bits: Optional[int] = None
    origin: object = None

    def __post_init__(self):
        object.__setattr__(self, "jobs", tuple(self.jobs))
        ids = [j.id for j in self.jobs]
        if len(set(ids)) != len(ids):
            raise InputError("duplicate job ids")

    @property
    def n(self) -> int:
        return len(self.jobs)

    def job(self, job_id: int) -> Job:
        try:
            return self._by_id[job_id]
        except AttributeError:
            object.__setattr__(self, "_by_id", {j.id: j for j in self.jobs})
            return self.job(job_id)
        except KeyError:
            raise InputError(f"unknown job id {job_id}") from None

    def canonical_positions(self) -> dict:
        """Map job id -> position in the canonical (Z-sorted) order."""
        order = _canonical_order(self.jobs)
        return {self.jobs[idx].id: pos for pos, idx in enumerate(order)}

    def is_canonical(self) -> bool:
        order = _canonical_order(self.jobs)
        return order == list(range(self.n)) and all(
            j.id == k + 1 for k, j in enumerate(self.jobs)
        )


@dataclass(frozen=True)
class Solution:
    """Selected subset in canonical order with its exact objective."""

    selected: tuple
    objective: object
    expected_reward: object
    total_cost: object
    stats: SolveStats = field(default_factory=SolveStats)


def _canonical_order(jobs: Sequence[Job]) -> list:
    """Indices of ``jobs`` sorted by non-increasing Z, ties by position."""
    zs = [z_index(j) for j in jobs]
    # Stable sort on descending Z keeps the original order among ties.
    return sorted(range(len(jobs)), key=lambda i: zs[i], reverse=True)


def z_order_canonicalize(instance: Instance) -> Instance:
    """Renumber jobs 1..n by non-increasing Z (ties: original order).

    Idempotent; the returned instance shares precision and origin.
    """
    order = _canonical_order(instance.jobs)
    jobs = tuple(
        Job(id=k + 1, pi=instance.jobs[i].pi, cost=instance.jobs[i].cost,
            reward=instance.jobs[i].reward)
        for k, i in enumerate(order)
    )
    return Instance(jobs=jobs, precision_bits=instance.precision_bits,
                    origin=instance.origin)


def _zero(instance: Instance):
    if instance.precision_bits is not None:
        with mpmath.workprec(instance.precision_bits):
            return mpmath.mpf(0)
    return 0.0


def sequence_reward(instance: Instance, sequence: Sequence[int]):
    """Expected reward of processing ``sequence`` in the given order.

    No ordering requirement; used to compare arbitrary sequences against
    the canonical one.
    """
    if len(set(sequence)) != len(sequence):
        raise InputError("duplicate ids in sequence")
    if instance.precision_bits is not None:
        with mpmath.workprec(instance.precision_bits):
            total = mpmath.mpf(0)
            prob = mpmath.mpf(1)
            for jid in sequence:
                job = instance.job(jid)
                prob = prob * job.pi
                total = total + prob * job.reward
            return total
    total = 0.0
    prob = 1.0
    for jid in sequence:
        job = instance.job(jid)
        prob *= job.pi
        total += prob * job.reward
    return total


def expected_reward(instance: Instance, subset: Sequence[int]):
    """Expected reward of a subset given in canonical (Z) order.

    Empty subsets evaluate to 0.  Raises InputError for unknown ids or a
    sequence that is not in the instance's canonical order.
    """
    subset = list(subset)
    pos = instance.canonical_positions()
    for jid in subset:
        if jid not in pos:
            raise InputError(f"unknown job id {jid}")
    ranks = [pos[jid] for jid in subset]
    if any(b <= a for a, b in zip(ranks, ranks[1:])):
        raise InputError("subset not given in canonical Z-order")
    if not subset:
        return _zero(instance)
    return sequence_reward(instance, subset)


def total_cost(instance: Instance, subset: Iterable[int]):
    if instance.precision_bits is not None:
        with mpmath.workprec(instance.precision_bits):
            acc = mpmath.mpf(0)
            for jid in subset:
                acc = acc + instance.job(jid).cost
            return acc
    acc = 0.0
    for jid in subset:
        acc = acc + instance.job(jid).cost
    return acc


def net_profit(instance: Instance, subset: Iterable[int]):
    """Expected net profit z(S): reward under canonical order minus cost.

    The subset may be given in any order; the canonical order is applied
    internally.
    """
    subset = list(subset)
    if len(set(subset)) != len(subset):
        raise InputError("duplicate ids in subset")
    pos = instance.canonical_positions()
    for jid in subset:
        if jid not in pos:
            raise InputError(f"unknown job id {jid}")
    ordered = sorted(subset, key=lambda jid: pos[jid])
    if instance.precision_bits is not None:
        with mpmath.workprec(instance.precision_bits):
            return sequence_reward(instance, ordered) - \
                total_cost(instance, subset)
    return sequence_reward(instance, ordered) - total_cost(instance, subset)


def evaluate_selection(instance: Instance, ordered_ids: Sequence[int]):
    """(expected reward, total cost, net profit) at instance precision."""
    if instance.precision_bits is not None:
        with mpmath.workprec(instance.precision_bits):
            reward = sequence_reward(instance, ordered_ids)
            cost = total_cost(instance, ordered_ids)
            return reward, cost, reward - cost
    reward = sequence_reward(instance, ordered_ids)
    cost = total_cost(instance, ordered_ids)
    return reward, cost, reward - cost


def marginal_gain(instance: Instance, subset: Iterable[int], job_id: int):
    """z(S + {j}) - z(S); the job must not already be selected."""
    subset = list(subset)
    if job_id in subset:
        raise InputError(f"job {job_id} already in subset")
    if instance.precision_bits is not None:
        with mpmath.workprec(instance.precision_bits):
            return net_profit(instance, subset + [job_id]) - \
                net_profit(instance, subset)
    return net_profit(instance, subset + [job_id]) - net_profit(instance, subset)
