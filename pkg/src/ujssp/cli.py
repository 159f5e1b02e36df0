"""Command-line front end: generate, solve, bench, verify.

Exit codes: 0 success, 1 verification failure, 2 usage error (argparse
default), 3 method inapplicable to the given instance (fractional costs
for the DP, size guard for the oracle).

Solve/bench output is CSV; timings are the only non-deterministic
columns for a fixed seed.  Selected job ids are ';'-joined so rows stay
single CSV fields.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from time import perf_counter

import mpmath

from . import bounds, dp, fixtures, greedy, instances, oracle, stepwise
from ._backend import BACKEND
from .core import (
    CapacityError,
    InputError,
    ParseError,
    SolveTimeout,
    UjsspError,
    net_profit,
    values_close,
)

SOLVE_HEADER = "instance,method,objective,subsets_evaluated,runtime_ms,selected_ids"
BENCH_HEADER = ("row_type,instance,method,n,scheme,seed,status,objective,"
                "subsets_evaluated,runtime_ms,selected_ids,"
                "mean_runtime_ms,pct_solved,mean_subsets_evaluated")

METHODS = ("forward", "backward", "dp", "greedy", "oracle",
           "assignment-ub", "milp-export")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ujssp",
        description="Solvers and experiment tooling for unreliable-job "
                    "selection and sequencing.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write instance files plus a manifest")
    g.add_argument("--dataset", choices=("uniform", "ppp"), required=True)
    g.add_argument("--scheme", choices=[s.value for s in instances.Scheme],
                   default="i", help="probability scheme (uniform dataset)")
    g.add_argument("--type", choices=[t.value for t in instances.PppType],
                   default="I", help="ppp dataset flavour")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output directory")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="solve one instance file")
    s.add_argument("instance")
    s.add_argument("--method", choices=METHODS, required=True)
    s.add_argument("--time-limit-s", type=float, default=None)
    s.add_argument("--precision-bits", type=int, default=None,
                   help="reduction precision for ppp instance files")
    s.add_argument("--ordering",
                   choices=[o.value for o in stepwise.Ordering], default="z")
    s.add_argument("--seed", type=int, default=0, help="random-ordering seed")
    s.add_argument("--speedups", action="store_true",
                   help="enable the extension-skipping speed-ups")
    s.add_argument("--no-speedups", action="store_true",
                   help="force the plain sweep (default)")
    s.add_argument("--trace", default=None, metavar="PATH",
                   help="write a per-step JSON-lines trace (stepwise only)")
    s.add_argument("--solver-cmd", default=None,
                   help="external solver wrapper (milp-export)")
    s.add_argument("--refinement",
                   choices=[r.value for r in bounds.Refinement],
                   default="none", help="milp-export variant")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="run methods over a manifest")
    b.add_argument("--manifest", required=True)
    b.add_argument("--methods", default="forward",
                   help="comma-separated method list")
    b.add_argument("--time-limit-s", type=float, default=None)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--precision-bits", type=int, default=None)
    b.add_argument("--speedups", action="store_true")
    b.add_argument("--out", default=None, help="results CSV (default stdout)")
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("verify", help="run the built-in regression fixtures")
    v.add_argument("--seed-battery", type=int, default=0,
                   help="additionally cross-check N random instances")
    v.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------

def cmd_generate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for k in range(args.count):
        seed = args.seed + k
        if args.dataset == "uniform":
            scheme = instances.Scheme(args.scheme)
            inst = instances.generate_uniform(args.n, scheme, seed)
            name = f"uniform-{scheme.value}-n{args.n}-s{seed}.json"
            instances.write_instance(inst, out / name)
            rows.append({"seed": seed, "n": args.n, "scheme": scheme.value,
                         "path": name})
        else:
            ppp_type = instances.PppType(args.type)
            ppp = instances.generate_ppp(args.n, ppp_type, seed)
            name = f"ppp-{ppp_type.value}-n{args.n}-s{seed}.json"
            instances.write_ppp(ppp, out / name)
            rows.append({"seed": seed, "n": args.n,
                         "scheme": f"ppp-{ppp_type.value}", "path": name})
    instances.write_manifest(rows, out / "manifest.csv")
    print(f"wrote {len(rows)} instances + manifest.csv to {out}")
    return 0


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------

def _load_any(path, precision_bits):
    """Instance files load as-is; ppp files reduce at the given width."""
    try:
        return instances.read_instance(path), None
    except ParseError:
        ppp = instances.read_ppp(path)
        return instances.reduce_ppp(ppp, precision_bits), ppp


def _objective_str(value) -> str:
    if isinstance(value, mpmath.mpf):
        return mpmath.nstr(value, 20)
    return repr(float(value))


def _run_method(method, inst, ppp, args, deadline):
    config = stepwise.StepwiseConfig(
        speedups_enabled=bool(getattr(args, "speedups", False)
                              and not getattr(args, "no_speedups", False)),
        ordering=stepwise.Ordering(getattr(args, "ordering", "z")),
        ordering_seed=getattr(args, "seed", 0),
    )
    if method in ("forward", "backward"):
        if ppp is not None:
            res = stepwise.solve_ppp_mode(
                ppp, config.ordering, ordering_seed=config.ordering_seed,
                precision_bits=getattr(args, "precision_bits", None),
                deadline=deadline)
            return res.solution
        sink = None
        trace_path = getattr(args, "trace", None)
        if trace_path:
            fp = open(trace_path, "w")
            sink = stepwise.make_trace_writer(fp)
        try:
            fn = (stepwise.solve_forward if method == "forward"
                  else stepwise.solve_backward)
            return fn(inst, config, trace_sink=sink, deadline=deadline)
        finally:
            if trace_path:
                fp.close()
    if method == "dp":
        return dp.solve_dp(inst, deadline=deadline)
    if method == "greedy":
        return greedy.greedy_select(inst, deadline=deadline)
    if method == "oracle":
        return oracle.brute_force(inst).optimum
    raise InputError(f"method {method} is not a solver")


def cmd_solve(args) -> int:
    try:
        inst, ppp = _load_any(args.instance, args.precision_bits)
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    deadline = None
    if args.time_limit_s is not None:
        deadline = perf_counter() + args.time_limit_s

    if args.method == "milp-export":
        lp = bounds.export_milp(inst, bounds.Refinement(args.refinement))
        lp_path = Path(args.instance).with_suffix(".lp")
        lp_path.write_text(lp)
        print(lp_path)
        if args.solver_cmd or os.environ.get(bounds.SOLVER_ENV_VAR):
            result = bounds.external_solve(lp, args.solver_cmd)
            if result is None:
                print("solver unavailable", file=sys.stderr)
            else:
                print(f"OBJ {result.objective!r} BOUND {result.bound!r} "
                      f"GAP {result.gap!r}")
        return 0

    start = perf_counter()
    try:
        if args.method == "assignment-ub":
            bound = bounds.assignment_upper_bound(inst)
            runtime_ms = (perf_counter() - start) * 1e3
            print(SOLVE_HEADER)
            print(f"{args.instance},assignment-ub,{bound!r},0,"
                  f"{runtime_ms:.3f},")
            return 0
        solution = _run_method(args.method, inst, ppp, args, deadline)
    except (CapacityError, InputError) as exc:
        print(f"error: {args.method} inapplicable: {exc}", file=sys.stderr)
        return 3
    except SolveTimeout:
        print("error: time limit exceeded", file=sys.stderr)
        return 3

    runtime_ms = solution.stats.runtime * 1e3
    ids = ";".join(str(i) for i in solution.selected)
    print(SOLVE_HEADER)
    print(f"{args.instance},{args.method},{_objective_str(solution.objective)},"
          f"{solution.stats.subsets_evaluated},{runtime_ms:.3f},{ids}")
    return 0


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------

def _bench_one(row, method, args, base_dir):
    path = base_dir / row["path"]
    inst, ppp = _load_any(path, args.precision_bits)
    deadline = None
    if args.time_limit_s is not None:
        deadline = perf_counter() + args.time_limit_s
    started = perf_counter()
    try:
        solution = _run_method(method, inst, ppp, args, deadline)
        status = "solved"
    except SolveTimeout:
        return {**row, "method": method, "status": "timeout",
                "objective": "", "subsets": "", "runtime_ms":
                    (perf_counter() - started) * 1e3, "ids": ""}
    except (CapacityError, InputError):
        return {**row, "method": method, "status": "inapplicable",
                "objective": "", "subsets": "", "runtime_ms": 0.0, "ids": ""}
    return {**row, "method": method, "status": status,
            "objective": _objective_str(solution.objective),
            "subsets": solution.stats.subsets_evaluated,
            "runtime_ms": solution.stats.runtime * 1e3,
            "ids": ";".join(str(i) for i in solution.selected)}


def cmd_bench(args) -> int:
    manifest_path = Path(args.manifest)
    rows = instances.read_manifest(manifest_path)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in METHODS or m == "milp-export":
            print(f"error: bench does not support method {m}", file=sys.stderr)
            return 2
    base = manifest_path.parent

    tasks = [(row, method) for method in methods for row in rows]
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(
                lambda t: _bench_one(t[0], t[1], args, base), tasks))
    else:
        results = [_bench_one(row, method, args, base)
                   for row, method in tasks]

    lines = [BENCH_HEADER]
    for res in results:
        lines.append(
            f"instance,{res['path']},{res['method']},{res['n']},"
            f"{res['scheme']},{res['seed']},{res['status']},"
            f"{res['objective']},{res['subsets']},{res['runtime_ms']:.3f},"
            f"{res['ids']},,,")

    groups = {}
    for res in results:
        groups.setdefault((res["method"], res["n"], res["scheme"]), []).append(res)
    for (method, n, scheme), members in sorted(groups.items()):
        solved = [m for m in members if m["status"] == "solved"]
        pct = 100.0 * len(solved) / len(members)
        mean_rt = (sum(m["runtime_ms"] for m in solved) / len(solved)
                   if solved else float("nan"))
        mean_sub = (sum(int(m["subsets"]) for m in solved) / len(solved)
                    if solved else float("nan"))
        lines.append(
            f"aggregate,,{method},{n},{scheme},,,,,,,"
            f"{mean_rt:.3f},{pct:.1f},{mean_sub:.1f}")

    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _check(name, ok, detail=""):
    tag = "ok" if ok else "FAIL"
    line = f"[{tag}] {name}"
    if detail and not ok:
        line += f": {detail}"
    print(line)
    return bool(ok)


def cmd_verify(args) -> int:
    ok = True
    inst2 = fixtures.unit_reward_trio()
    g2 = greedy.greedy_select(inst2)
    o2 = oracle.brute_force(inst2).optimum
    ok &= _check("unit-reward trio: greedy picks {1,2} at 0.103",
                 g2.selected == (1, 2) and values_close(g2.objective, 0.103),
                 f"got {g2.selected} at {g2.objective}")
    ok &= _check("unit-reward trio: optimum {1,3} at 0.113",
                 o2.selected == (1, 3) and values_close(o2.objective, 0.113),
                 f"got {o2.selected} at {o2.objective}")

    inst3 = fixtures.equal_expected_reward_quartet()
    g3 = greedy.greedy_select(inst3)
    o3 = oracle.brute_force(inst3).optimum
    ok &= _check("equal-expected-reward quartet: greedy {1,2,3} at 80.6",
                 g3.selected == (1, 2, 3) and values_close(g3.objective, 80.6),
                 f"got {g3.selected} at {g3.objective}")
    ok &= _check("equal-expected-reward quartet: optimum {1,3,4} at 82.8",
                 o3.selected == (1, 3, 4) and values_close(o3.objective, 82.8),
                 f"got {o3.selected} at {o3.objective}")

    inst4 = fixtures.stepwise_quartet()
    fwd = stepwise.solve_forward(inst4)
    bwd = stepwise.solve_backward(inst4)
    ok &= _check("stepwise quartet: forward {1,3} at 173.75 in 6 subsets",
                 fwd.selected == (1, 3) and fwd.objective == 173.75
                 and fwd.stats.subsets_evaluated == 6,
                 f"got {fwd.selected} at {fwd.objective} in "
                 f"{fwd.stats.subsets_evaluated}")
    ok &= _check("stepwise quartet: backward matches in 8 subsets",
                 bwd.selected == (1, 3) and bwd.objective == 173.75
                 and bwd.stats.subsets_evaluated == 8,
                 f"got {bwd.selected} at {bwd.objective} in "
                 f"{bwd.stats.subsets_evaluated}")
    d4 = dp.solve_dp(inst4)
    ok &= _check("stepwise quartet: DP agrees at budget 145",
                 d4.objective == 173.75 and d4.total_cost == 145,
                 f"got {d4.objective} spending {d4.total_cost}")
    ub4 = bounds.assignment_upper_bound(inst4)
    ok &= _check("stepwise quartet: assignment bound covers the optimum",
                 ub4 >= 173.75 - 1e-9, f"bound {ub4}")

    ppp = fixtures.ppp_two_twos()
    res = stepwise.solve_ppp_mode(ppp)
    ok &= _check("ppp {2,2}: threshold attained with equal products",
                 res.attained and res.left_product == res.right_product == 2
                 and abs(res.solution.objective - res.threshold) < 1e-30,
                 f"products {res.left_product}/{res.right_product}")

    for k in range(args.seed_battery):
        scheme = list(instances.Scheme)[k % 4]
        n = 5 + (k % 8)
        inst = instances.generate_uniform(n, scheme, seed=10_000 + k)
        opt = oracle.brute_force(inst).optimum.objective
        f = stepwise.solve_forward(inst).objective
        b = stepwise.solve_backward(inst).objective
        d = dp.solve_dp(inst).objective
        ub = bounds.assignment_upper_bound(inst)
        agree = (values_close(f, opt) and values_close(b, opt)
                 and values_close(d, opt) and ub >= opt - 1e-9)
        ok &= _check(f"battery seed {10_000 + k} ({scheme.value}, n={n})",
                     agree, f"opt={opt} fwd={f} bwd={b} dp={d} ub={ub}")

    print(f"backend: {BACKEND}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
