"""Command-line surface: solve, certify, counterexample, theory, sweep.

Subcommands read an optional INI config file (one section per subcommand,
``key = value``) with command-line flags taking precedence.  Every artifact
embeds the fully resolved configuration and seed so any output can be
replayed bit-identically from its own header.

Exit codes: 0 all checks pass, 1 a scientific verification failed, 2 usage
error.

CSV schemas (data rows; ``#``-prefixed header lines carry the config):

* sweep:     r,trial,seed,final_error,final_objective,grad_norm,hess_min_eig,certified,wall_ms
  (aggregate rows repeat the schema with trial = "mean" / "median")
* threshold: kappa_sp,r_sp,r_star,kappa_crit,hess_min_eig,grad_norm,certified
* trace:     iter,objective,grad_norm,tr_radius
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .certificates import CertificationError, certify_convex_global, certify_point, error_vs_truth
from .counterexamples import build_example2, build_spur_gen, build_thm5, build_thm6, verify_instance, SpurGenSpec
from .objective import FactorPoint, ProblemInstance
from .operators import make_gaussian_ensemble, operator_from_json, operator_to_json
from .solvers import SolverConfig, SolverError, multistart, solve_convex_prox, solve_factored
from .theory import (
    TheoryParams,
    critical_condition_number,
    critical_rip_constant,
    curvature_to_rip,
    effective_strong_convexity,
    effective_strong_convexity_minmax,
    recovery_error_bound,
    rip_recovery_error_bound,
)

USAGE_ERROR = 2
VERIFICATION_FAILED = 1

SWEEP_COLUMNS = [
    "r",
    "trial",
    "seed",
    "final_error",
    "final_objective",
    "grad_norm",
    "hess_min_eig",
    "certified",
    "wall_ms",
]
THRESHOLD_COLUMNS = ["kappa_sp", "r_sp", "r_star", "kappa_crit", "hess_min_eig", "grad_norm", "certified"]


class UsageError(Exception):
    pass


def _load_config_section(path, section):
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise UsageError(f"config file not found: {path}")
    if not parser.has_section(section):
        return {}
    return dict(parser.items(section))


def _merge_config(args, file_values, keys):
    """Command-line flags win; file values fill the gaps."""
    merged = {}
    for key, caster in keys.items():
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            merged[key] = flag_val
        elif key in file_values:
            merged[key] = caster(file_values[key])
    return merged


def _write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _write_csv(path, columns, rows, config_doc):
    with open(path, "w", newline="") as fh:
        fh.write("# schema: 1\n")
        fh.write("# config: " + json.dumps(config_doc, sort_keys=True) + "\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        writer.writerows(rows)


def _fmt(value):
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.12g}"
    return value


# ---------------------------------------------------------------------------
# theory


def cmd_theory(args):
    params = TheoryParams(
        r=args.r,
        r_star=args.r_star,
        mu=args.mu,
        L=args.L,
        L2=args.L2 if args.L2 is not None else args.L,
        lam=args.lam,
        noise_opnorm=args.noise,
    )
    dcrit = critical_rip_constant(params.r, params.r_star)
    kcrit = critical_condition_number(params.r, params.r_star)
    eff = effective_strong_convexity(params)
    oracle = effective_strong_convexity_minmax(params, grid_n=args.grid_n)
    bound3 = recovery_error_bound(params)
    delta_k = curvature_to_rip(params.mu, params.L)
    bound2 = rip_recovery_error_bound(params.r, params.r_star, delta_k, params.lam, params.noise_opnorm)

    rows = [
        ("r / r_star", f"{params.r} / {params.r_star}"),
        ("mu / L / L2", f"{params.mu:g} / {params.L:g} / {params.L2:g}"),
        ("lam / noise_opnorm", f"{params.lam:g} / {params.noise_opnorm:g}"),
        ("critical RIP constant", f"{dcrit:.10g}"),
        ("critical condition number", f"{kcrit:.10g}"),
        ("effective strong convexity (closed)", f"{eff.value:.10g} (feasible: {eff.feasible})"),
        (f"effective strong convexity (min-max, n={args.grid_n})", f"{oracle.value:.10g}"),
        ("error bound (curvature form)", f"{bound3.value:.10g} (feasible: {bound3.feasible})"),
        (f"error bound (RIP form, delta_k={delta_k:.6g})", f"{bound2.value:.10g} (feasible: {bound2.feasible})"),
    ]
    width = max(len(label) for label, _ in rows)
    for label, value in rows:
        print(f"{label:<{width}}  {value}")
    if args.out:
        _write_json(
            args.out,
            {
                "schema": 1,
                "config": vars_config(args),
                "critical_rip_constant": dcrit,
                "critical_condition_number": kcrit,
                "mu_eff_closed": eff.value,
                "mu_eff_feasible": eff.feasible,
                "mu_eff_minmax": oracle.value,
                "bound_curvature": None if not bound3.feasible else bound3.value,
                "bound_curvature_feasible": bound3.feasible,
                "bound_rip": None if not bound2.feasible else bound2.value,
                "bound_rip_feasible": bound2.feasible,
                "delta_k": delta_k,
            },
        )
    return 0


def vars_config(args):
    return {k: v for k, v in vars(args).items() if k not in ("func", "config") and v is not None}


# ---------------------------------------------------------------------------
# instance I/O


def instance_to_json(inst):
    doc = {
        "schema": 1,
        "operator": operator_to_json(inst.op),
        "b": inst.b.tolist(),
        "lam": inst.lam,
        "symmetric": inst.symmetric,
    }
    if inst.truth is not None:
        doc["truth"] = {"M_star": inst.M_star.tolist(), "xi": inst.xi.tolist()}
    return doc


def instance_from_json(doc):
    if doc.get("schema") != 1:
        raise UsageError(f"unsupported instance schema {doc.get('schema')!r}")
    op = operator_from_json(doc["operator"])
    truth = None
    if "truth" in doc:
        truth = (np.asarray(doc["truth"]["M_star"], float), np.asarray(doc["truth"]["xi"], float))
    return ProblemInstance(
        op=op,
        b=np.asarray(doc["b"], float),
        lam=float(doc["lam"]),
        symmetric=bool(doc.get("symmetric", False)),
        truth=truth,
    )


def _load_instance(path):
    with open(path) as fh:
        return instance_from_json(json.load(fh))


def _load_point(path, symmetric):
    with open(path) as fh:
        doc = json.load(fh)
    U = np.asarray(doc["U"], float)
    if symmetric:
        return FactorPoint(U=U, symmetric=True)
    return FactorPoint(U=U, V=np.asarray(doc["V"], float))


# ---------------------------------------------------------------------------
# solve


def cmd_solve(args):
    inst = _load_instance(args.instance)
    config = SolverConfig(
        method=args.method,
        max_iters=args.max_iters,
        grad_tol=args.grad_tol,
        seed=args.seed,
        init_scale=args.init_scale,
    )
    if args.method == "prox-grad":
        result = solve_convex_prox(inst, config)
        point_doc = {"M": result.point.tolist()}
        error = None if inst.truth is None else error_vs_truth(result.point, inst.M_star)[0]
    else:
        if args.rank is None:
            raise UsageError("--rank is required for factored solves")
        if args.n_starts > 1:
            ms = multistart(inst, args.rank, config, args.n_starts)
            result = min(ms.runs, key=lambda run: run.objective)
        else:
            result = solve_factored(inst, args.rank, config)
        point = result.point
        point_doc = {"U": point.U.tolist()}
        if not inst.symmetric:
            point_doc["V"] = point.V.tolist()
        error = None if inst.truth is None else error_vs_truth(point, inst.M_star)[0]
    doc = {
        "schema": 1,
        "config": vars_config(args),
        "objective": result.objective,
        "grad_norm": result.grad_norm,
        "iters": result.iters,
        "converged": result.converged,
        "point": point_doc,
    }
    if error is not None:
        doc["error_vs_truth"] = error
    if args.out:
        _write_json(args.out, doc)
    if args.trace_out and result.trace:
        _write_csv(
            args.trace_out,
            ["iter", "objective", "grad_norm", "tr_radius"],
            [[it, _fmt(obj), _fmt(gn), _fmt(rad)] for it, obj, gn, rad in result.trace],
            vars_config(args),
        )
    print(
        f"objective = {result.objective:.10g}, grad_norm = {result.grad_norm:.3e}, "
        f"iters = {result.iters}, converged = {result.converged}"
        + (f", error vs truth = {error:.6g}" if error is not None else "")
    )
    return 0


# ---------------------------------------------------------------------------
# certify


def cmd_certify(args):
    inst = _load_instance(args.instance)
    if args.point:
        point = _load_point(args.point, inst.symmetric)
        cert = certify_point(inst, point, grad_tol=args.grad_tol, eig_tol=args.eig_tol)
        doc = {"schema": 1, "config": vars_config(args), "criticality": cert.to_json()}
        ok = cert.verdict == "second-order-critical"
        print(
            f"verdict = {cert.verdict} (grad_norm = {cert.grad_norm:.3e}, "
            f"hess_min_eig = {cert.hess_min_eig:.3e}, method = {cert.method})"
        )
    elif args.matrix:
        with open(args.matrix) as fh:
            M = np.asarray(json.load(fh)["M"], float)
        cert = certify_convex_global(inst, M, tol=args.tol)
        doc = {"schema": 1, "config": vars_config(args), "convex_global": cert.to_json()}
        ok = cert.verdict
        print(f"convex global optimality: {cert.verdict} (residuals: {cert.residuals})")
    else:
        raise UsageError("certify needs --point (factored) or --matrix (convex)")
    if args.out:
        _write_json(args.out, doc)
    return 0 if ok else VERIFICATION_FAILED


# ---------------------------------------------------------------------------
# counterexample


def _build_family(args):
    mode = args.mode
    if args.family == "thm5":
        for name in ("r", "r_star", "mu"):
            if getattr(args, name) is None:
                raise UsageError(f"--{name.replace('_', '-')} is required for family thm5")
        return build_thm5(
            args.r, args.r_star, mu=args.mu, lam=args.lam, mode=mode, d=args.d, seed=args.seed
        )
    if args.family == "thm6":
        for name in ("r1", "r_star", "mu"):
            if getattr(args, name) is None:
                raise UsageError(f"--{name.replace('_', '-')} is required for family thm6")
        return build_thm6(args.r1, args.r_star, mu=args.mu, lam=args.lam, mode=mode, seed=args.seed)
    if args.family == "example2":
        for name in ("r", "r_star", "kappa_sp"):
            if getattr(args, name) is None:
                raise UsageError(f"--{name.replace('_', '-')} is required for family example2")
        d1 = args.d1 or args.r + args.r_star + 1
        d2 = args.d2 or args.r + args.r_star + 2
        return build_example2(args.r, args.r_star, d1, d2, kappa_sp=args.kappa_sp, seed=args.seed)
    # spur-gen: raw parametrization
    for name in ("r", "r_star", "r_max", "epsilon", "c"):
        if getattr(args, name) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required for family spur-gen")
    c_perp = args.c_perp
    if c_perp is None:
        val = (1.0 - args.epsilon - args.c**2 * args.r_star) / args.r_max
        if val <= 0:
            raise UsageError("no positive c_perp satisfies the norm constraint; lower c or epsilon")
        c_perp = math.sqrt(val)
    d = args.d or args.r_star + args.r_max
    spec = SpurGenSpec(
        r_star=args.r_star,
        r_max=args.r_max,
        d=d,
        epsilon=args.epsilon,
        c=args.c,
        c_perp=c_perp,
        lam=args.lam,
        r=args.r,
        mode=mode,
    )
    return build_spur_gen(spec, seed=args.seed)


def cmd_counterexample(args):
    if args.sweep_kappa:
        return _cmd_threshold_sweep(args)
    built = _build_family(args)
    report = verify_instance(built)
    if args.out_dir:
        import os

        os.makedirs(args.out_dir, exist_ok=True)
        inst_doc = built.to_json()
        inst_doc["config"] = vars_config(args)
        _write_json(os.path.join(args.out_dir, "instance.json"), inst_doc)
        rep_doc = report.to_json()
        rep_doc["config"] = vars_config(args)
        _write_json(os.path.join(args.out_dir, "report.json"), rep_doc)
        prob_doc = instance_to_json(built.inst)
        prob_doc["config"] = vars_config(args)
        _write_json(os.path.join(args.out_dir, "problem.json"), prob_doc)
    print(f"family = {built.spec.family}, mode = {built.spec.mode}")
    print(
        f"spurious condition: lhs = {built.spec.spur_lhs:.6g}, rhs = {built.spec.spur_rhs:.6g}, "
        f"holds = {built.spec.spur_cond_holds}, strict = {built.spec.spur_cond_strict}"
    )
    for clause in report.clauses:
        status = "ok " if clause["passed"] else "FAIL"
        print(f"  [{status}] {clause['name']}: value = {clause['value']}, expected {clause['expected']}")
    print("verification", "PASSED" if report.passed else "FAILED")
    return 0 if report.passed else VERIFICATION_FAILED


def _cmd_threshold_sweep(args):
    if args.family != "example2":
        raise UsageError("--sweep-kappa is only meaningful for family example2")
    if args.r is None or args.r_star is None:
        raise UsageError("--r and --r-star are required for the kappa sweep")
    try:
        lo, hi, count = args.sweep_kappa.split(":")
        lo, hi, count = float(lo), float(hi), int(count)
    except ValueError as exc:
        raise UsageError(f"--sweep-kappa expects lo:hi:n, got {args.sweep_kappa!r}") from exc
    if not (1.0 < lo < hi) or count < 2:
        raise UsageError("--sweep-kappa needs 1 < lo < hi and n >= 2")
    d1 = args.d1 or args.r + args.r_star + 1
    d2 = args.d2 or args.r + args.r_star + 2
    kcrit = critical_condition_number(args.r, args.r_star)
    rows = []
    for kappa in np.linspace(lo, hi, count):
        built = build_example2(args.r, args.r_star, d1, d2, kappa_sp=float(kappa), seed=args.seed)
        cert = certify_point(built.inst, built.spurious_point)
        rows.append(
            [
                _fmt(float(kappa)),
                args.r,
                args.r_star,
                _fmt(kcrit),
                _fmt(cert.hess_min_eig),
                _fmt(cert.grad_norm),
                _fmt(cert.verdict == "second-order-critical"),
            ]
        )
    if not args.out:
        raise UsageError("--out is required for --sweep-kappa")
    _write_csv(args.out, THRESHOLD_COLUMNS, rows, vars_config(args))
    print(f"wrote {len(rows)} rows to {args.out} (critical condition number {kcrit:.6g})")
    return 0


# ---------------------------------------------------------------------------
# sweep


def _sweep_cell(payload):
    """One (r, trial) cell; module-level so worker pools can pickle it."""
    (d1, d2, r_star, n, lam, singular_values, seed, r, trial, solver) = payload
    if solver.get("single_thread_blas"):
        # workers own whole cores; nested BLAS threading just thrashes
        try:
            from threadpoolctl import threadpool_limits
        except ImportError:
            pass
        else:
            with threadpool_limits(limits=1):
                inner = dict(solver)
                inner.pop("single_thread_blas")
                return _sweep_cell((d1, d2, r_star, n, lam, singular_values, seed, r, trial, inner))
    op_seed = seed + trial
    op = make_gaussian_ensemble(d1, d2, n, seed=op_seed)
    rng = np.random.default_rng((seed, trial, 0xA5))
    P, _ = np.linalg.qr(rng.standard_normal((d1, r_star)))
    Q, _ = np.linalg.qr(rng.standard_normal((d2, r_star)))
    M_star = (P * np.asarray(singular_values)) @ Q.T
    b = op.forward(M_star)
    inst = ProblemInstance(op=op, b=b, lam=lam, truth=(M_star, np.zeros(n)))
    solver_seed = seed * 1_000_003 + r * 1_009 + trial
    config = SolverConfig(
        method=solver["method"],
        max_iters=solver["max_iters"],
        grad_tol=solver["grad_tol"],
        seed=solver_seed,
        init_scale=solver["init_scale"],
        keep_trace=False,
    )
    n_starts = int(solver.get("n_starts", 1))
    t0 = time.perf_counter()
    try:
        if n_starts > 1:
            ms = multistart(inst, r, config, n_starts)
            result = min(ms.runs, key=lambda run: run.objective)
        else:
            result = solve_factored(inst, r, config)
        err = error_vs_truth(result.point, M_star)[0]
        try:
            cert = certify_point(inst, result.point)
            hess_min = cert.hess_min_eig
            certified = cert.verdict == "second-order-critical"
        except CertificationError:
            hess_min = float("nan")
            certified = False
        row = [
            r,
            trial,
            solver_seed,
            _fmt(err),
            _fmt(result.objective),
            _fmt(result.grad_norm),
            _fmt(hess_min),
            _fmt(certified),
            _fmt((time.perf_counter() - t0) * 1e3),
        ]
    except SolverError:
        wall = _fmt((time.perf_counter() - t0) * 1e3)
        row = [r, trial, solver_seed, "nan", "nan", "nan", "nan", "false", wall]
    return row


def cmd_sweep(args):
    file_values = _load_config_section(args.config, "sweep") if args.config else {}
    keys = {
        "d1": int,
        "d2": int,
        "r_star": int,
        "n": int,
        "lam": float,
        "r_values": str,
        "n_trials": int,
        "seed": int,
        "singular_values": str,
        "method": str,
        "max_iters": int,
        "grad_tol": float,
        "init_scale": float,
        "n_starts": int,
        "workers": int,
    }
    if "lambda" in file_values and "lam" not in file_values:
        file_values["lam"] = file_values.pop("lambda")
    merged = _merge_config(args, file_values, keys)
    defaults = {
        "d1": 50,
        "d2": 51,
        "r_star": 2,
        "lam": 1e-4,
        "n_trials": 20,
        "seed": 0,
        "method": "tr-newton-cg",
        "max_iters": 400,
        "grad_tol": 1e-9,
        "init_scale": 1.0,
        "n_starts": 1,
        "workers": 1,
    }
    for key, val in defaults.items():
        merged.setdefault(key, val)
    merged.setdefault("n", math.ceil(2.35 * merged["r_star"] * (merged["d1"] + merged["d2"])))
    merged.setdefault("r_values", ",".join(str(v) for v in range(merged["r_star"], 9)))
    r_values = [int(tok) for tok in str(merged["r_values"]).replace(" ", "").split(",") if tok]
    if not r_values or any(r < 1 for r in r_values):
        raise UsageError("r_values must be a non-empty list of positive ints")
    sv = merged.get("singular_values")
    singular_values = [float(t) for t in str(sv).split(",")] if sv else [1.0] * merged["r_star"]
    if len(singular_values) != merged["r_star"]:
        raise UsageError("singular_values must list exactly r_star values")
    if not args.out:
        raise UsageError("--out is required for sweep")

    workers = int(merged["workers"])
    solver = {
        "method": merged["method"],
        "max_iters": merged["max_iters"],
        "grad_tol": merged["grad_tol"],
        "init_scale": merged["init_scale"],
        "n_starts": int(merged["n_starts"]),
    }
    if workers > 1:
        solver["single_thread_blas"] = True
    cells = [
        (
            merged["d1"],
            merged["d2"],
            merged["r_star"],
            merged["n"],
            merged["lam"],
            singular_values,
            merged["seed"],
            r,
            trial,
            solver,
        )
        for r in r_values
        for trial in range(merged["n_trials"])
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_cell, cells))
    else:
        rows = [_sweep_cell(cell) for cell in cells]

    config_doc = dict(merged)
    config_doc["r_values"] = r_values
    config_doc["singular_values"] = singular_values

    # aggregate rows appended per r; trial column carries the aggregate name
    data_by_r = {}
    for row in rows:
        data_by_r.setdefault(row[0], []).append(row)
    summary_rows = []
    for r in r_values:
        block = data_by_r.get(r, [])
        cols = list(zip(*block))
        errs = np.array([float(v) for v in cols[3]])
        objs = np.array([float(v) for v in cols[4]])
        certified = np.array([v == "true" for v in cols[7]])
        walls = np.array([float(v) for v in cols[8]])
        for name, agg in (("mean", np.nanmean), ("median", np.nanmedian)):
            summary_rows.append(
                [
                    r,
                    name,
                    "",
                    _fmt(float(agg(errs))),
                    _fmt(float(agg(objs))),
                    "",
                    "",
                    _fmt(float(np.mean(certified))),
                    _fmt(float(agg(walls))),
                ]
            )
    _write_csv(args.out, SWEEP_COLUMNS, rows + summary_rows, config_doc)
    by_r = {r: float(np.nanmean([float(row[3]) for row in data_by_r[r]])) for r in r_values}
    print("mean error by search rank:")
    for r in r_values:
        print(f"  r = {r:3d}: {by_r[r]:.6g}")
    print(f"wrote {len(rows)} data rows (+{len(summary_rows)} aggregates) to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser():
    parser = argparse.ArgumentParser(
        prog="matlasso",
        description="Factored matrix LASSO solvers, certificates, and adversarial instances.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("theory", help="print threshold constants and error bounds")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--r-star", dest="r_star", type=int, required=True)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--L2", type=float, default=None)
    p.add_argument("--lam", "--lambda", type=float, default=0.0)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--grid-n", dest="grid_n", type=int, default=2000)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("solve", help="solve an instance file")
    p.add_argument("--instance", required=True)
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--method", default="tr-newton-cg", choices=["tr-newton-cg", "gd", "prox-grad"])
    p.add_argument("--max-iters", dest="max_iters", type=int, default=500)
    p.add_argument("--grad-tol", dest="grad_tol", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--init-scale", dest="init_scale", type=float, default=1.0)
    p.add_argument("--n-starts", dest="n_starts", type=int, default=1)
    p.add_argument("--out", default=None)
    p.add_argument("--trace-out", dest="trace_out", default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("certify", help="certify a factored point or a convex solution")
    p.add_argument("--instance", required=True)
    p.add_argument("--point", default=None, help="JSON file with U (and V)")
    p.add_argument("--matrix", default=None, help="JSON file with M")
    p.add_argument("--grad-tol", dest="grad_tol", type=float, default=None)
    p.add_argument("--eig-tol", dest="eig_tol", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("counterexample", help="build and verify an adversarial instance")
    p.add_argument("--family", required=True, choices=["example2", "thm5", "thm6", "spur-gen"])
    p.add_argument("--mode", default="sym", choices=["sym", "asym"])
    p.add_argument("--r", type=int, default=None)
    p.add_argument("--r-star", dest="r_star", type=int, default=None)
    p.add_argument("--r1", type=int, default=None)
    p.add_argument("--r-max", dest="r_max", type=int, default=None)
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--lam", "--lambda", type=float, default=0.0)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--c-perp", dest="c_perp", type=float, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--d1", type=int, default=None)
    p.add_argument("--d2", type=int, default=None)
    p.add_argument("--kappa-sp", dest="kappa_sp", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", dest="out_dir", default=None)
    p.add_argument("--sweep-kappa", dest="sweep_kappa", default=None, help="lo:hi:n grid for example2")
    p.add_argument("--out", default=None, help="CSV path for --sweep-kappa")
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("sweep", help="rank-sweep recovery experiment with Gaussian measurements")
    p.add_argument("--config", default=None, help="INI file with a [sweep] section")
    p.add_argument("--d1", type=int, default=None)
    p.add_argument("--d2", type=int, default=None)
    p.add_argument("--r-star", dest="r_star", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--lam", "--lambda", type=float, default=None)
    p.add_argument("--r-values", dest="r_values", default=None, help="comma-separated search ranks")
    p.add_argument("--n-trials", dest="n_trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--singular-values", dest="singular_values", default=None)
    p.add_argument("--method", default=None, choices=["tr-newton-cg", "gd"])
    p.add_argument("--max-iters", dest="max_iters", type=int, default=None)
    p.add_argument("--grad-tol", dest="grad_tol", type=float, default=None)
    p.add_argument("--init-scale", dest="init_scale", type=float, default=None)
    p.add_argument("--n-starts", dest="n_starts", type=int, default=None, help="independent starts per draw; best objective wins")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors already; normalize others
        return exc.code if exc.code is not None else USAGE_ERROR
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
