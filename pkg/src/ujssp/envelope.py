"""Upper envelope of affine profit functions over a shrinking interval.

Candidate subsets enter as lines y = slope*x + intercept; a line
survives only while it attains the pointwise maximum somewhere inside
the current parameter interval [lb, ub].  The interval only ever
tightens, so removals are permanent:

- inserting a line deletes the lines it dominates (and is itself
  rejected when it never wins strictly inside the interval);
- moving a bound drops the extreme line while its winning sub-interval
  falls outside the new bounds.

Lines are kept in a plain vector ordered by strictly increasing slope;
insert position is found by bisection.  Boundary ties follow one rule
everywhere: a line whose winning region touches the interval only at an
endpoint loses to its interior neighbour.

Comparison tolerances: two lines whose slope and intercept both agree
within ``coincide_tol`` are treated as the same line (the incumbent
owner survives); slope gaps at most ``parallel_tol`` are treated as
parallel.  Pass zero for both to get exact comparisons in
high-precision mode.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import mpmath

from .core import COINCIDE_TOL, PARALLEL_TOL, InputError


class IntervalError(InputError):
    """New bound does not tighten the interval."""


class InsertOutcome(Enum):
    ADDED = "added"
    DOMINATED = "dominated"


@dataclass(frozen=True)
class AffineFn:
    """A candidate's profit line; ``owner`` is an opaque handle."""

    slope: object
    intercept: object
    owner: object = None


def _isfinite(v) -> bool:
    if isinstance(v, (int, float)):
        return math.isfinite(v)
    return bool(mpmath.isfinite(v))


class Envelope:
    """Non-dominated affine functions over [lb, ub].

    Single-writer structure: not safe for concurrent mutation.
    """

    def __init__(self, lb, ub, *, coincide_tol=COINCIDE_TOL,
                 parallel_tol=PARALLEL_TOL):
        if not (_isfinite(lb) and _isfinite(ub)):
            raise InputError("interval bounds must be finite")
        if lb > ub:
            raise IntervalError(f"lb={lb} exceeds ub={ub}")
        self.lb = lb
        self.ub = ub
        self.coincide_tol = coincide_tol
        self.parallel_tol = parallel_tol
        self.lines: List[AffineFn] = []
        self.total_inserted = 0
        self.total_removed = 0

    def __len__(self) -> int:
        return len(self.lines)

    def _isect(self, i: int, j: int):
        """x-coordinate where stored lines i and j cross (slopes differ)."""
        li, lj = self.lines[i], self.lines[j]
        return (li.intercept - lj.intercept) / (lj.slope - li.slope)

    def insert(self, line: AffineFn) -> InsertOutcome:
        if not (_isfinite(line.slope) and _isfinite(line.intercept)):
            raise InputError("non-finite line coefficients")
        a, b = line.slope, line.intercept
        L = self.lines
        if not L:
            L.append(line)
            self.total_inserted += 1
            return InsertOutcome.ADDED

        slopes = [f.slope for f in L]
        j = bisect_left(slopes, a)
        # At most one stored line can sit within parallel_tol of a: the
        # vector keeps slope gaps strictly above that threshold.
        eq: Optional[int] = None
        if j < len(L) and abs(L[j].slope - a) <= self.parallel_tol:
            eq = j
        elif j > 0 and abs(L[j - 1].slope - a) <= self.parallel_tol:
            eq = j - 1

        for k in (j - 1, j):
            if 0 <= k < len(L) and abs(L[k].slope - a) <= self.coincide_tol \
                    and abs(L[k].intercept - b) <= self.coincide_tol:
                return InsertOutcome.DOMINATED  # coincides; incumbent owner stays

        if eq is not None and L[eq].intercept >= b:
            return InsertOutcome.DOMINATED

        if eq is not None:
            i_l, i_r = eq - 1, eq + 1
        else:
            i_l, i_r = j - 1, j
        x_l = (L[i_l].intercept - b) / (a - L[i_l].slope) if i_l >= 0 else None
        x_r = (b - L[i_r].intercept) / (L[i_r].slope - a) if i_r < len(L) else None

        if eq is None:
            # A strictly-better parallel replacement always enters; any
            # other line must win strictly inside (lb, ub).
            if x_r is not None and x_l is not None and x_r <= x_l:
                return InsertOutcome.DOMINATED
            if x_r is not None and x_r <= self.lb:
                return InsertOutcome.DOMINATED
            if x_l is not None and x_l >= self.ub:
                return InsertOutcome.DOMINATED

        # Walk outward over neighbours the new line dominates outright.
        while i_l > 0:
            x2 = (L[i_l - 1].intercept - b) / (a - L[i_l - 1].slope)
            if x2 >= x_l:
                x_l = x2
                i_l -= 1
            else:
                break
        while i_r < len(L) - 1:
            x2 = (b - L[i_r + 1].intercept) / (L[i_r + 1].slope - a)
            if x2 <= x_r:
                x_r = x2
                i_r += 1
            else:
                break

        left_end = i_l + 1
        if i_l == 0 and x_l <= self.lb:
            left_end = 0
        right_start = i_r if i_r < len(L) else len(L)
        if i_r == len(L) - 1 and x_r >= self.ub:
            right_start = len(L)

        kept = left_end + (len(L) - right_start)
        self.total_removed += len(L) - kept
        self.lines = L[:left_end] + [line] + L[right_start:]
        self.total_inserted += 1
        return InsertOutcome.ADDED

    def shrink_upper(self, new_ub) -> int:
        """Lower ub; drop trailing lines that now win only beyond it."""
        if new_ub > self.ub:
            raise IntervalError(f"new ub {new_ub} loosens interval")
        if new_ub < self.lb:
            raise IntervalError(f"new ub {new_ub} below lb {self.lb}")
        removed = 0
        while len(self.lines) >= 2:
            if self._isect(-2, -1) >= new_ub:
                self.lines.pop()
                removed += 1
            else:
                break
        self.ub = new_ub
        self.total_removed += removed
        return removed

    def shrink_lower(self, new_lb) -> int:
        """Raise lb; drop leading lines that now win only before it."""
        if new_lb < self.lb:
            raise IntervalError(f"new lb {new_lb} loosens interval")
        if new_lb > self.ub:
            raise IntervalError(f"new lb {new_lb} above ub {self.ub}")
        removed = 0
        while len(self.lines) >= 2:
            if self._isect(0, 1) <= new_lb:
                self.lines.pop(0)
                removed += 1
            else:
                break
        self.lb = new_lb
        self.total_removed += removed
        return removed

    def breakpoints(self) -> list:
        return [self._isect(i, i + 1) for i in range(len(self.lines) - 1)]

    def winners(self) -> List[Tuple[object, tuple]]:
        """Partition of [lb, ub] into (owner, sub-interval) pieces."""
        if not self.lines:
            return []
        xs = [self.lb] + self.breakpoints() + [self.ub]
        return [(f.owner, (xs[i], xs[i + 1])) for i, f in enumerate(self.lines)]

    def value_at(self, x):
        if not self.lines:
            raise InputError("empty envelope")
        return max(f.slope * x + f.intercept for f in self.lines)

    def dump(self) -> str:
        """Debug CSV, one ``slope,intercept,owner`` row per line."""
        return "\n".join(
            f"{f.slope!r},{f.intercept!r},{f.owner!r}" for f in self.lines
        )

    def check_invariants(self) -> None:
        L = self.lines
        for i in range(len(L) - 1):
            if not L[i].slope < L[i + 1].slope:
                raise AssertionError("slopes not strictly increasing")
            if abs(L[i + 1].slope - L[i].slope) <= self.parallel_tol:
                raise AssertionError("slope gap within parallel tolerance")
        xs = self.breakpoints()
        for x0, x1 in zip(xs, xs[1:]):
            if not x0 < x1:
                raise AssertionError("intersections not strictly increasing")
        if self.lb < self.ub:
            for x in xs:
                if not (self.lb < x < self.ub):
                    raise AssertionError("breakpoint outside open interval")
