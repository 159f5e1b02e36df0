"""Instance generation, problem transforms, and file I/O.

Random draws go through a Philox counter-based generator (64-bit keyed,
platform independent), with uniform floats produced by 53-bit mantissa
scaling, so a (seed, parameters) pair always yields byte-identical
instance files.

Draw order is part of the format: probabilities (and weights) first,
then one (reward, cost) pair per job in job order, retrying inside the
job before moving on.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from .core import (
    GenerationError,
    InputError,
    Instance,
    Job,
    ParseError,
    PrecisionError,
)

COST_REDRAW_LIMIT = 100
PPP_RETRY_LIMIT = 1000
_GROUPING_TRIES = 200

REWARD_RANGE = (50, 500)
VALUE_RANGE = (2, 100)


class Scheme(Enum):
    I = "i"
    II = "ii"
    III = "iii"
    IV = "iv"


# Joint-probability ranges for the weight-split schemes.
SCHEME_JOINT_RANGE = {
    Scheme.II: (0.01, 0.10),
    Scheme.III: (0.10, 0.40),
    Scheme.IV: (0.40, 0.90),
}


class PppType(Enum):
    I = "I"
    II = "II"


@dataclass(frozen=True)
class UniformOrigin:
    scheme: Scheme
    seed: int


@dataclass(frozen=True)
class PppOrigin:
    ppp: "PppInstance"


@dataclass(frozen=True)
class FileOrigin:
    path: str


@dataclass(frozen=True)
class PppInstance:
    """Positive integers to split into two equal-product halves.

    ``planted_split`` (type II only) lists 1-based positions of one half
    of a known perfect partition.
    """

    integers: Tuple[int, ...]
    type: PppType
    planted_split: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "integers", tuple(int(a) for a in self.integers))
        if any(a < 2 for a in self.integers):
            raise InputError("product-partition values must be >= 2")
        if self.planted_split is not None:
            split = tuple(sorted(int(i) for i in self.planted_split))
            object.__setattr__(self, "planted_split", split)
            left = right = 1
            for idx, a in enumerate(self.integers, start=1):
                if idx in split:
                    left *= a
                else:
                    right *= a
            if left != right:
                raise InputError("planted split products differ")

    @property
    def product(self) -> int:
        w = 1
        for a in self.integers:
            w *= a
        return w


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _u01(rng: np.random.Generator) -> float:
    return float(rng.integers(0, 1 << 53)) / float(1 << 53)


def _uniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    return lo + (hi - lo) * _u01(rng)


def generate_uniform(n: int, scheme: Scheme, seed: int) -> Instance:
    """One random instance under the given probability scheme.

    Rewards are integers in [50, 500].  Scheme I draws each probability
    from [0.01, 0.99); the others draw a joint probability p from the
    scheme's range and split it over the jobs through random weights, so
    the product of the probabilities reproduces p.  Costs are integers
    from [ceil(p*r), floor(pi*r)]: anything cheaper is worth selecting
    no matter what, anything dearer never is.  When that interval is
    empty the reward is redrawn (then the cost clamps to floor(pi*r)).
    """
    if n < 1:
        raise InputError("n must be >= 1")
    scheme = Scheme(scheme)
    rng = _rng(seed)

    if scheme is Scheme.I:
        pis = [_uniform(rng, 0.01, 0.99) for _ in range(n)]
        p = float(np.prod(pis))
    else:
        lo, hi = SCHEME_JOINT_RANGE[scheme]
        p = _uniform(rng, lo, hi)
        weights = [_uniform(rng, 1.0, 1000.0) for _ in range(n)]
        wsum = sum(weights)
        pis = [math.exp(math.log(p) * w / wsum) for w in weights]

    jobs = []
    for j in range(n):
        pij = pis[j]
        reward = cost = None
        for _ in range(COST_REDRAW_LIMIT):
            reward = int(rng.integers(REWARD_RANGE[0], REWARD_RANGE[1] + 1))
            c_lo = math.ceil(p * reward)
            c_hi = math.floor(pij * reward)
            if c_lo <= c_hi:
                cost = int(rng.integers(c_lo, c_hi + 1))
                break
        if cost is None:
            cost = math.floor(pij * reward)
        jobs.append(Job(id=j + 1, pi=pij, cost=cost, reward=reward))
    return Instance(jobs=tuple(jobs), origin=UniformOrigin(scheme, seed))


# ---------------------------------------------------------------------------
# Product-partition generation and reduction
# ---------------------------------------------------------------------------

_PRIMES_TO_100 = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43,
                  47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97)


def _factorize(a: int) -> List[int]:
    out = []
    for prime in _PRIMES_TO_100:
        while a % prime == 0:
            out.append(prime)
            a //= prime
    if a != 1:
        raise InputError(f"value {a} has a prime factor above 100")
    return out


def generate_ppp(n: int, ppp_type: PppType, seed: int) -> PppInstance:
    """Random product-partition instance with n values in [2, 100].

    Type I draws independently (a perfect partition is not guaranteed).
    Type II plants one: draw j values, factorize their product P, and
    regroup the prime factors into n-j values in [2, 100] whose product
    is again P.  Instances failing the factor-count or magnitude checks
    are discarded and redrawn, up to the retry budget.
    """
    if n < 2:
        raise InputError("n must be >= 2")
    ppp_type = PppType(ppp_type)
    rng = _rng(seed)

    if ppp_type is PppType.I:
        values = [int(rng.integers(VALUE_RANGE[0], VALUE_RANGE[1] + 1))
                  for _ in range(n)]
        return PppInstance(integers=tuple(values), type=ppp_type)

    for _ in range(PPP_RETRY_LIMIT):
        j = int(rng.integers(1, n))
        first = [int(rng.integers(VALUE_RANGE[0], VALUE_RANGE[1] + 1))
                 for _ in range(j)]
        product = 1
        for a in first:
            product *= a
        m = n - j
        primes: List[int] = []
        for a in first:
            primes.extend(_factorize(a))
        if len(primes) < m:
            continue
        if 100 ** m < product:
            continue
        grouped = _group_primes(rng, primes, m)
        if grouped is None:
            continue
        values = first + grouped
        return PppInstance(integers=tuple(values), type=ppp_type,
                           planted_split=tuple(range(1, j + 1)))
    raise GenerationError(
        f"no feasible type-II instance after {PPP_RETRY_LIMIT} tries "
        f"(n={n}, seed={seed})")


def _group_primes(rng, primes: List[int], m: int) -> Optional[List[int]]:
    """Randomly pack the prime multiset into m values in [2, 100]."""
    for _ in range(_GROUPING_TRIES):
        order = [primes[int(i)] for i in rng.permutation(len(primes))]
        groups = order[:m]
        ok = True
        for prime in order[m:]:
            slots = [g for g in range(m) if groups[g] * prime <= 100]
            if not slots:
                ok = False
                break
            groups[int(slots[int(rng.integers(0, len(slots)))])] *= prime
        if ok:
            return groups
    return None


def min_separation_bits(w_total: int) -> int:
    """Mantissa width needed to tell apart log-costs of distinct products."""
    return 2 * max(1, w_total.bit_length())


def reduce_ppp(ppp: PppInstance, precision_bits: Optional[int] = None) -> Instance:
    """Equivalent high-precision selection instance for a PPP input.

    Job j gets pi = 1/a_j, reward = sqrt(W)*(a_j - 1) and cost = ln a_j
    (W the product of all values), which makes every Z index equal to
    sqrt(W) and ties the optimum to the partition threshold
    sqrt(W) - 1 - ln(sqrt(W)).
    """
    w_total = ppp.product
    need = min_separation_bits(w_total)
    bits = precision_bits if precision_bits is not None else max(128, need + 64)
    if bits < need:
        raise PrecisionError(
            f"{bits} bits cannot separate subset products; need >= {need}")
    with mpmath.workprec(bits):
        sqrt_w = mpmath.sqrt(w_total)
        jobs = tuple(
            Job(id=i + 1,
                pi=1 / mpmath.mpf(a),
                cost=mpmath.log(a),
                reward=sqrt_w * (a - 1))
            for i, a in enumerate(ppp.integers)
        )
    return Instance(jobs=jobs, precision_bits=bits, origin=PppOrigin(ppp))


def ppp_threshold(ppp: PppInstance, precision_bits: Optional[int] = None):
    """Perfect-partition objective value sqrt(W) - 1 - ln(sqrt(W))."""
    w_total = ppp.product
    bits = precision_bits
    if bits is None:
        bits = max(128, min_separation_bits(w_total) + 64)
    with mpmath.workprec(bits):
        sqrt_w = mpmath.sqrt(w_total)
        return sqrt_w - 1 - mpmath.log(sqrt_w)


# ---------------------------------------------------------------------------
# College-application transform
# ---------------------------------------------------------------------------

def from_csp(colleges: Sequence[Tuple[float, float, float]]) -> Instance:
    """Map (utility, acceptance probability, fee) triples to jobs.

    The image has pi = 1 - alpha, reward = w*alpha/(1-alpha), cost = fee,
    so each job's Z index equals the college's utility.
    """
    jobs = []
    for i, (w, alpha, fee) in enumerate(colleges, start=1):
        if not 0 < alpha < 1:
            raise InputError(f"college {i}: acceptance probability {alpha} "
                             f"must lie strictly inside (0, 1)")
        jobs.append(Job(id=i, pi=1 - alpha, cost=fee,
                        reward=w * alpha / (1 - alpha)))
    return Instance(jobs=tuple(jobs))


def to_csp(instance: Instance) -> List[Tuple[float, float, float]]:
    """Inverse of from_csp; requires every pi strictly inside (0, 1)."""
    out = []
    for job in instance.jobs:
        if not 0 < job.pi < 1:
            raise InputError(f"job {job.id}: pi={job.pi} has no "
                             f"college-selection image")
        out.append((job.pi * job.reward / (1 - job.pi), 1 - job.pi, job.cost))
    return out


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def _mpf_str(x, bits: int) -> str:
    digits = int(math.ceil(bits * 0.30103)) + 8
    with mpmath.workprec(bits):
        return mpmath.nstr(mpmath.mpf(x), digits)


def write_instance(instance: Instance, path) -> None:
    """Serialize to the canonical JSON schema (stable bytes)."""
    hp = instance.precision_bits
    jobs_doc = []
    for job in instance.jobs:
        if hp is None:
            jobs_doc.append({"id": job.id, "pi": job.pi, "c": job.cost,
                             "r": job.reward})
        else:
            jobs_doc.append({"id": job.id,
                             "pi": _mpf_str(job.pi, hp),
                             "c": _mpf_str(job.cost, hp),
                             "r": _mpf_str(job.reward, hp)})
    doc = {"n": instance.n, "jobs": jobs_doc,
           "precision": "f64" if hp is None else {"bits": hp}}
    Path(path).write_text(json.dumps(doc, separators=(",", ":")) + "\n")


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise ParseError(f"missing field '{key}' in {where}")
    return doc[key]


def read_instance(path) -> Instance:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from None
    n = _require(doc, "n", "instance")
    jobs_doc = _require(doc, "jobs", "instance")
    precision = _require(doc, "precision", "instance")
    if precision == "f64":
        bits = None
    else:
        bits = int(_require(precision, "bits", "precision"))
    if len(jobs_doc) != n:
        raise ParseError(f"{path}: n={n} but {len(jobs_doc)} jobs listed")

    jobs = []
    for k, jd in enumerate(jobs_doc):
        jid = _require(jd, "id", f"job #{k}")
        pi = _require(jd, "pi", f"job #{k}")
        cost = _require(jd, "c", f"job #{k}")
        reward = _require(jd, "r", f"job #{k}")
        if bits is None:
            jobs.append(Job(id=int(jid), pi=float(pi), cost=_num_or_int(cost),
                            reward=_num_or_int(reward)))
        else:
            if not all(isinstance(v, str) for v in (pi, cost, reward)):
                raise ParseError(
                    f"{path}: job #{k}: high-precision values must be "
                    f"decimal strings")
            with mpmath.workprec(bits):
                jobs.append(Job(id=int(jid), pi=mpmath.mpf(pi),
                                cost=mpmath.mpf(cost),
                                reward=mpmath.mpf(reward)))
    return Instance(jobs=tuple(jobs), precision_bits=bits,
                    origin=FileOrigin(str(path)))


def _num_or_int(v):
    if isinstance(v, bool):
        raise ParseError(f"numeric field holds a boolean: {v!r}")
    if isinstance(v, (int, float)):
        return v
    return float(v)


def write_ppp(ppp: PppInstance, path) -> None:
    doc = {"type": ppp.type.value, "integers": list(ppp.integers),
           "planted_split": list(ppp.planted_split)
           if ppp.planted_split is not None else None}
    Path(path).write_text(json.dumps(doc, separators=(",", ":")) + "\n")


def read_ppp(path) -> PppInstance:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from None
    split = _require(doc, "planted_split", "ppp instance")
    return PppInstance(
        integers=tuple(_require(doc, "integers", "ppp instance")),
        type=PppType(_require(doc, "type", "ppp instance")),
        planted_split=tuple(split) if split is not None else None)


MANIFEST_HEADER = "seed,n,scheme,path"


def write_manifest(rows: Sequence[dict], path) -> None:
    lines = [MANIFEST_HEADER]
    for row in rows:
        lines.append(f"{row['seed']},{row['n']},{row['scheme']},{row['path']}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_manifest(path) -> List[dict]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != MANIFEST_HEADER:
        raise ParseError(f"{path}: manifest must start with "
                         f"'{MANIFEST_HEADER}'")
    rows = []
    for k, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise ParseError(f"{path}:{k}: expected 4 comma-separated fields")
        rows.append({"seed": int(parts[0]), "n": int(parts[1]),
                     "scheme": parts[2], "path": parts[3]})
    return rows
