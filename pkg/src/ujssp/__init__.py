"""Exact and heuristic solvers for selecting and sequencing unreliable jobs.

Public surface:

- :mod:`ujssp.core` -- domain types, canonical ordering, evaluation;
- :mod:`ujssp.oracle` -- brute-force reference solver;
- :mod:`ujssp.greedy` -- greedy selection and special-case classifier;
- :mod:`ujssp.envelope` -- upper envelope of affine profit functions;
- :mod:`ujssp.stepwise` -- forward/backward exact sweeps, PPP mode;
- :mod:`ujssp.dp` -- pseudopolynomial budget DP;
- :mod:`ujssp.bounds` -- assignment bound, LP export, solver adapter;
- :mod:`ujssp.instances` -- generators, transforms, file formats;
- :mod:`ujssp.cli` -- the ``ujssp`` command.

Float64 hot loops run on a compiled extension when built; set
``UJSSP_BACKEND=python`` to force the pure-Python twin.
"""

from ._backend import BACKEND
from .core import (
    Instance,
    Job,
    Solution,
    SolveStats,
    UjsspError,
    expected_reward,
    marginal_gain,
    net_profit,
    z_index,
    z_order_canonicalize,
)
from .dp import solve_dp
from .greedy import SpecialCase, classify_special_case, greedy_select
from .instances import (
    PppInstance,
    PppType,
    Scheme,
    from_csp,
    generate_ppp,
    generate_uniform,
    read_instance,
    reduce_ppp,
    to_csp,
    write_instance,
)
from .oracle import brute_force
from .stepwise import (
    Direction,
    Ordering,
    StepwiseConfig,
    solve_backward,
    solve_forward,
    solve_ppp_mode,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Direction",
    "Instance",
    "Job",
    "Ordering",
    "PppInstance",
    "PppType",
    "Scheme",
    "Solution",
    "SolveStats",
    "SpecialCase",
    "StepwiseConfig",
    "UjsspError",
    "brute_force",
    "classify_special_case",
    "expected_reward",
    "from_csp",
    "generate_ppp",
    "generate_uniform",
    "greedy_select",
    "marginal_gain",
    "net_profit",
    "read_instance",
    "reduce_ppp",
    "solve_backward",
    "solve_dp",
    "solve_forward",
    "solve_ppp_mode",
    "to_csp",
    "write_instance",
    "z_index",
    "z_order_canonicalize",
]
