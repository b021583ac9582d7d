"""Command-line front end.

Subcommands: ``dd``, ``funcalc``, ``newton``, ``taylor``, ``dyson``,
``magnus``, ``rearrange``, ``verify-all``, ``gen``.  Reports are JSON (CSV for
time/decay series); every checked residual is reported together with the
tolerance it was held to, and the exit status is 0 only if all residuals pass
(1 on residual failure, 2 on input errors).

Reports contain no timestamps or timings unless ``--timings`` is passed, so
identical job specs and seeds produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import divdiff
from .core import matrix_exp, matrix_from_json, matrix_to_json, opnorm, pair, rel_err
from .errors import OpcalcError
from .funcalc import (
    CommutingTuple,
    Contour,
    apply_function,
    apply_via_eig,
    dd_apply,
    dd_tensor,
    funcalc_elementary,
)
from .functions import named_function
from .generate import KINDS, gen_matrix
from .magnus import builtin_field, field_from_samples, magnus_solve, rk_reference
from .ncseries import dyson_exp, newton_interpolate, taylor_expand
from .rearrange import (
    family_from_exponents,
    rearrange_lhs,
    rearrange_rhs_F,
    rearrange_rhs_G,
)
from .tolerances import DEFAULTS
from .verify import run_battery

__all__ = ["main", "gen_matrix"]


def _complex_json(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def _nodes_from_json(text: str) -> np.ndarray:
    data = json.loads(text)
    return np.array([complex(re, im) for re, im in data])


def _residual(identity: str, value: float, tolerance: float) -> dict:
    return {
        "identity": identity,
        "value": float(value),
        "tolerance": float(tolerance),
        "pass": bool(value <= tolerance),
    }


def _emit(report: dict, args) -> None:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_csv(path_or_stdout, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    lines += [",".join(f"{v:.17g}" if isinstance(v, float) else str(v) for v in row)
              for row in rows]
    text = "\n".join(lines) + "\n"
    if path_or_stdout is None:
        sys.stdout.write(text)
    else:
        with open(path_or_stdout, "w") as fh:
            fh.write(text)


def _finish(report: dict, args, t0: float) -> bool:
    report["diagnostics"]["worker_cap"] = os.environ.get("OPCALC_THREADS", "")
    if args.timings:
        report["timings"] = {"wall_seconds": time.perf_counter() - t0}
    ok = all(r["pass"] for r in report["residuals"])
    for r in report["residuals"]:
        if not r["pass"]:
            print(
                f"FAIL {r['identity']}: residual {r['value']:.3e} exceeds "
                f"tolerance {r['tolerance']:.3e}",
                file=sys.stderr,
            )
    return ok


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_dd(args, tol) -> tuple[dict, bool]:
    t0 = time.perf_counter()
    f = named_function(args.f)
    xs = _nodes_from_json(args.nodes)
    stats: dict = {}
    methods = (
        ["recursive", "explicit", "contour", "hermite"]
        if args.method == "all"
        else [args.method]
    )
    values: dict[str, complex] = {}
    notes: dict[str, str] = {}
    for m in methods:
        try:
            if m == "recursive":
                values[m] = divdiff.dd_recursive(f, xs)
            elif m == "explicit":
                values[m] = divdiff.dd_explicit(f, xs)
            elif m == "contour":
                values[m] = divdiff.dd_contour(f, xs, stats=stats)
            elif m == "hermite":
                values[m] = divdiff.dd_hermite(f, xs, stats=stats)
            elif m == "power":
                if not args.f.startswith("pow:"):
                    raise OpcalcError("--method power needs --f pow:N")
                values[m] = divdiff.dd_power(xs, int(args.f.split(":")[1]))
            else:
                raise OpcalcError(f"unknown method {m!r}")
        except OpcalcError as exc:
            if args.method != "all":
                raise
            notes[m] = str(exc)  # e.g. coincident nodes for the recursion
    residuals = []
    names = sorted(values)
    scale = max(max(abs(v) for v in values.values()), 1e-300)
    for i, mi in enumerate(names):
        for mj in names[i + 1:]:
            residuals.append(
                _residual(
                    f"divided-difference-agreement:{mi}={mj}",
                    abs(values[mi] - values[mj]) / scale,
                    tol.dd_four_way,
                )
            )
    report = {
        "subcommand": "dd",
        "params": {"f": args.f, "nodes": args.nodes, "method": args.method},
        "seed": args.seed,
        "results": {m: _complex_json(v) for m, v in values.items()},
        "notes": notes,
        "residuals": residuals,
        "diagnostics": stats,
    }
    return report, _finish(report, args, t0)


def _cmd_funcalc(args, tol) -> tuple[dict, bool]:
    t0 = time.perf_counter()
    if args.job == "-":
        job = json.load(sys.stdin)
    else:
        with open(args.job) as fh:
            job = json.load(fh)
    mode = job.get("mode", "funcalc")
    mats = [matrix_from_json(m) for m in job["matrices"]]
    spec = job.get("contour", {"auto": True})
    contour = None
    if isinstance(spec, dict) and not spec.get("auto", False):
        contour = Contour(
            complex(spec["center"][0], spec["center"][1]),
            float(spec["radius"]),
            int(spec.get("nodes", 16)),
        )
    fnames = job["function"]
    stats: dict = {}
    residuals = []
    results: dict = {}
    if mode == "funcalc":
        names = [fnames] if isinstance(fnames, str) else list(fnames)
        if len(mats) == 1 and len(names) == 1:
            f = named_function(names[0])
            value = apply_function(f, mats[0], contour, stats=stats)
            results["value"] = matrix_to_json(value)
            try:
                oracle = apply_via_eig(f, mats[0])
                residuals.append(
                    _residual(
                        "calculus-eigendecomposition-oracle",
                        rel_err(value, oracle),
                        tol.funcalc_eig_oracle,
                    )
                )
            except OpcalcError:
                results["oracle"] = "matrix not diagonalizable; contour value only"
        else:
            if len(names) != len(mats):
                raise OpcalcError("need one function name per matrix")
            fs = [named_function(nm) for nm in names]
            tup = CommutingTuple(mats)
            value = funcalc_elementary(fs, tup, check_tol=tol.tensor_rule, stats=stats)
            results["value"] = matrix_to_json(value)
            residuals.append(
                _residual(
                    "tensor-product-rule",
                    stats.get("tensor_rule_defect", 0.0),
                    tol.tensor_rule,
                )
            )
    elif mode == "ddtensor":
        f = named_function(fnames if isinstance(fnames, str) else fnames[0])
        op = dd_tensor(f, mats, contour, stats=stats)
        results["tensor"] = matrix_to_json(op.matrix)
        results["slots"] = op.slots
    elif mode == "ddapply":
        f = named_function(fnames if isinstance(fnames, str) else fnames[0])
        bs = [matrix_from_json(m) for m in job["b_matrices"]]
        value = dd_apply(f, mats, bs, contour, stats=stats)
        results["value"] = matrix_to_json(value)
        tensored = pair(dd_tensor(f, mats, contour), bs)
        residuals.append(
            _residual(
                "tensor-pairing-consistency",
                rel_err(value, tensored),
                tol.pair_consistency,
            )
        )
    else:
        raise OpcalcError(f"unknown mode {mode!r}")
    report = {
        "subcommand": "funcalc",
        "params": {"job": job},
        "seed": args.seed,
        "results": results,
        "residuals": residuals,
        "diagnostics": stats,
    }
    return report, _finish(report, args, t0)


def _expansion_report(kind: str, args, report, residuals, extra=None) -> dict:
    body = {
        "subcommand": kind,
        "params": {
            k: getattr(args, k)
            for k in ("f", "dim", "order", "b_scale", "count")
            if hasattr(args, k)
        },
        "seed": args.seed,
        "results": report.to_dict(),
        "residuals": residuals,
        "diagnostics": extra or {},
    }
    if getattr(args, "csv", None):
        rows = [[n, float(r)] for n, r in enumerate(report.remainder_norms)]
        _write_csv(args.csv, ["order", "remainder_norm"], rows)
    return body


def _cmd_newton(args, tol) -> tuple[dict, bool]:
    t0 = time.perf_counter()
    f = named_function(args.f)
    mats = [gen_matrix("random", args.dim, args.seed + j) for j in range(args.count)]
    report = newton_interpolate(f, mats)
    residuals = [
        _residual(
            "newton-interpolation",
            report.final_residual / max(opnorm(report.target), 1e-300),
            tol.newton_residual,
        )
    ]
    body = _expansion_report("newton", args, report, residuals)
    return body, _finish(body, args, t0)


def _cmd_taylor(args, tol) -> tuple[dict, bool]:
    t0 = time.perf_counter()
    f = named_function(args.f)
    a = gen_matrix("random", args.dim, args.seed)
    b = args.b_scale * gen_matrix("random", args.dim, args.seed + 1)
    report = taylor_expand(f, a, b, N=args.order)
    c2b = report.meta["c2"] * opnorm(b)
    rems = report.meta["explicit_remainder_norms"]
    floor = 1e-13 * max(opnorm(report.target), 1.0)
    ratio = max(
        ((r1 / r0) / c2b
         for r0, r1 in zip(rems, rems[1:]) if r0 > floor and r1 > floor),
        default=0.0,
    )
    defect = max(report.meta["identity_defects"]) / max(opnorm(report.target), 1e-300)
    residuals = [
        _residual("taylor-remainder-geometric-decay", ratio, 1.0),
        _residual("taylor-finite-remainder-identity", defect, tol.dyson_identity),
    ]
    body = _expansion_report("taylor", args, report, residuals, {"c2_times_b": c2b})
    return body, _finish(body, args, t0)


def _cmd_dyson(args, tol) -> tuple[dict, bool]:
    t0 = time.perf_counter()
    a = gen_matrix("random", args.dim, args.seed)
    b = args.b_scale * gen_matrix("random", args.dim, args.seed + 1)
    report = dyson_exp(a, b, N=args.order)
    residuals = [
        _residual(
            "dyson-finite-remainder-identity",
            report.meta["identity_defect"] / max(opnorm(report.target), 1e-300),
            tol.dyson_identity,
        )
    ]
    body = _expansion_report("dyson", args, report, residuals)
    return body, _finish(body, args, t0)


def _cmd_magnus(args, tol) -> tuple[dict, bool]:
    t0 = time.perf_counter()
    if args.field.endswith(".json"):
        with open(args.field) as fh:
            samples = json.load(fh)
        field = field_from_samples(
            samples["times"], [matrix_from_json(m) for m in samples["matrices"]]
        )
    else:
        field = builtin_field(args.field)
    steps = max(1, math.ceil(args.t_end / args.h))
    report_every = max(1, steps // args.rows)
    checkpoints = [k * args.h for k in range(report_every, steps, report_every)]
    checkpoints.append(args.t_end)
    rows = [[0.0, 0.0, 0.0]]
    for t in checkpoints:
        omega, y = magnus_solve(field, t, args.h, args.order)
        reference = rk_reference(field, t, h=t / 32.0)
        rows.append([float(t), opnorm(omega), opnorm(y - reference)])
    residuals = [_residual("magnus-log-consistency", rows[-1][2], tol.magnus_vs_rk)]
    if args.format == "csv":
        _write_csv(args.output, ["t", "omega_norm", "discrepancy"], rows)
        for r in residuals:
            if not r["pass"]:
                print(
                    f"FAIL {r['identity']}: residual {r['value']:.3e} exceeds "
                    f"tolerance {r['tolerance']:.3e}",
                    file=sys.stderr,
                )
        return {"residuals": residuals}, all(r["pass"] for r in residuals)
    report = {
        "subcommand": "magnus",
        "params": {
            "field": args.field,
            "t_end": args.t_end,
            "h": args.h,
            "order": args.order,
        },
        "seed": args.seed,
        "results": {"rows": rows, "columns": ["t", "omega_norm", "discrepancy"]},
        "residuals": residuals,
        "diagnostics": {},
    }
    return report, _finish(report, args, t0)


def _cmd_rearrange(args, tol) -> tuple[dict, bool]:
    t0 = time.perf_counter()
    qs = [int(q) for q in args.family.split(",")]
    if len(qs) != args.p + 1:
        raise OpcalcError(f"--family needs p+1 = {args.p + 1} exponents")
    fs = family_from_exponents(qs)
    a = gen_matrix("hermitian", args.dim, args.seed)
    A = matrix_exp(a)
    bs = [gen_matrix("random", args.dim, args.seed + 1 + j) for j in range(args.p)]
    lhs = rearrange_lhs(fs, A, bs, delta=args.delta)
    rf = rearrange_rhs_F(fs, A, bs, delta=args.delta)
    rg = rearrange_rhs_G(fs, A, bs, delta=args.delta)
    scale = max(opnorm(lhs), 1e-300)
    residuals = [
        _residual("rearrangement:lhs=rhs-F", opnorm(lhs - rf) / scale, tol.rearrange_three_way),
        _residual("rearrangement:lhs=rhs-G", opnorm(lhs - rg) / scale, tol.rearrange_three_way),
        _residual("rearrangement:rhs-F=rhs-G", opnorm(rf - rg) / scale, tol.rearrange_three_way),
    ]
    report = {
        "subcommand": "rearrange",
        "params": {
            "p": args.p,
            "dim": args.dim,
            "family": args.family,
            "delta": args.delta,
        },
        "seed": args.seed,
        "results": {
            "lhs": matrix_to_json(lhs),
            "rhs_F": matrix_to_json(rf),
            "rhs_G": matrix_to_json(rg),
        },
        "residuals": residuals,
        "diagnostics": {},
    }
    return report, _finish(report, args, t0)


def _cmd_verify_all(args, tol) -> tuple[dict, bool]:
    t0 = time.perf_counter()
    results = run_battery(args.seed, tol)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.identity}: residual {r.residual:.3e} "
              f"(tolerance {r.tolerance:.3e})")
    report = {
        "subcommand": "verify-all",
        "params": {},
        "seed": args.seed,
        "results": {},
        "residuals": [
            _residual(r.identity, r.residual, r.tolerance) for r in results
        ],
        "diagnostics": {},
    }
    return report, _finish(report, args, t0)


def _cmd_gen(args, tol) -> tuple[dict, bool]:
    t0 = time.perf_counter()
    out = gen_matrix(args.kind, args.dim, args.seed)
    mats = list(out) if isinstance(out, tuple) else [out]
    report = {
        "subcommand": "gen",
        "params": {"kind": args.kind, "dim": args.dim},
        "seed": args.seed,
        "results": {"matrices": [matrix_to_json(m) for m in mats]},
        "residuals": [],
        "diagnostics": {},
    }
    return report, _finish(report, args, t0)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opcalc",
        description="Divided differences and contour-integral matrix calculus checks",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--output", default=None, help="write the report here")
        p.add_argument("--format", choices=("json", "csv"), default=None)
        p.add_argument("--tol-scale", type=float, default=1.0,
                       help="multiply all tolerances")
        p.add_argument("--timings", action="store_true",
                       help="include wall time (breaks byte-identical reports)")
        p.add_argument("--config", default=None,
                       help="JSON file of flag defaults (same keys as flags)")

    p = sub.add_parser("dd", help="scalar divided differences, four methods")
    p.add_argument("--f", required=True, help="exp | log | pow:N | resolvent:RE,IM | rational:K")
    p.add_argument("--nodes", required=True, help="JSON [[re,im],...]")
    p.add_argument("--method", default="all",
                   choices=("recursive", "explicit", "contour", "hermite", "power", "all"))
    common(p)
    p.set_defaults(handler=_cmd_dd)

    p = sub.add_parser("funcalc", help="contour functional calculus from a JSON job spec")
    p.add_argument("--job", required=True, help="job file path, or - for stdin")
    common(p)
    p.set_defaults(handler=_cmd_funcalc)

    p = sub.add_parser("newton", help="interpolation expansion through random nodes")
    p.add_argument("--f", default="exp")
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--count", type=int, default=4, help="number of nodes")
    p.add_argument("--csv", default=None, help="write the remainder-decay table here")
    common(p)
    p.set_defaults(handler=_cmd_newton)

    p = sub.add_parser("taylor", help="perturbation expansion with remainder tracking")
    p.add_argument("--f", default="exp")
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--order", type=int, default=8)
    p.add_argument("--b-scale", type=float, default=0.1, dest="b_scale")
    p.add_argument("--csv", default=None)
    common(p)
    p.set_defaults(handler=_cmd_taylor)

    p = sub.add_parser("dyson", help="simplex-integral expansion of exp(a+b)")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--b-scale", type=float, default=0.2, dest="b_scale")
    p.add_argument("--csv", default=None)
    common(p)
    p.set_defaults(handler=_cmd_dyson)

    p = sub.add_parser("magnus", help="log-propagator integrator vs Runge-Kutta")
    p.add_argument("--field", default="triangular",
                   help="triangular | perturbed:SEED | samples.json")
    p.add_argument("--t-end", type=float, default=1.0, dest="t_end")
    p.add_argument("--h", type=float, default=0.005)
    p.add_argument("--order", type=int, default=28)
    p.add_argument("--rows", type=int, default=20, help="max CSV rows")
    common(p)
    p.set_defaults(handler=_cmd_magnus, format_default="csv")

    p = sub.add_parser("rearrange", help="three-way half-line rearrangement check")
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--family", default="1,1", help="comma exponents k_j of (1+s)^-k")
    p.add_argument("--delta", type=float, default=0.3)
    common(p)
    p.set_defaults(handler=_cmd_rearrange)

    p = sub.add_parser("verify-all", help="run the whole identity battery")
    common(p)
    p.set_defaults(handler=_cmd_verify_all)

    p = sub.add_parser("gen", help="emit seeded matrices as JSON")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--dim", type=int, default=3)
    common(p)
    p.set_defaults(handler=_cmd_gen)

    return parser


def _apply_config(argv: list[str]) -> list[str]:
    """Insert config-file values as flags right after the subcommand.

    Explicit command-line flags win because argparse keeps the last
    occurrence.  Config keys use the flag spelling (dashes or underscores).
    """
    path = None
    for k, tok in enumerate(argv):
        if tok == "--config" and k + 1 < len(argv):
            path = argv[k + 1]
        elif tok.startswith("--config="):
            path = tok.split("=", 1)[1]
    if path is None or not argv:
        return argv
    with open(path) as fh:
        cfg = json.load(fh)
    inserts: list[str] = []
    for key, value in cfg.items():
        flag = "--" + str(key).replace("_", "-")
        if isinstance(value, bool):
            if value:
                inserts.append(flag)
        else:
            inserts.extend([flag, str(value)])
    return argv[:1] + inserts + argv[1:]


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    try:
        argv = _apply_config(argv)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = getattr(args, "format_default", "json")
    tol = DEFAULTS.scaled(args.tol_scale)
    try:
        report, ok = args.handler(args, tol)
    except (OpcalcError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.subcommand != "magnus" or args.format == "json":
        _emit(report, args)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
