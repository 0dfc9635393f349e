"""Command-line front end: solve, landscape, simulate, curves, tune-lambda.

Machine-readable output only (JSON or CSV); plotting is left to whatever
consumes the tables.

Exit codes: 0 success, 1 numeric non-convergence, 2 usage error,
3 partial success (some replicates failed).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .calibration import (
    CalibrationError,
    optimize_alpha,
    optimize_lambda,
    theory_objective,
    theory_report,
)
from .models import ModelConfigError, ModelSpec, v_quadrature
from .reports import empirical_report
from .state_equations import STATUS_DIVERGED, solve_signaled
from .svm import fit_svm, generate_dataset

EXIT_OK = 0
EXIT_NUMERIC = 1
EXIT_USAGE = 2
EXIT_PARTIAL = 3


def _out_stream(args):
    if args.out and args.out != "-":
        return open(args.out, "w")
    return sys.stdout


def _emit(args, text: str) -> None:
    stream = _out_stream(args)
    stream.write(text)
    if not text.endswith("\n"):
        stream.write("\n")
    if stream is not sys.stdout:
        stream.close()


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _report_csv(doc: dict) -> str:
    keys = sorted(doc)
    return _csv_text(keys, [[doc[k] for k in keys]])


def cmd_solve(args) -> int:
    model = ModelSpec.parse(args.model, args.delta, args.lam)
    try:
        sol = optimize_alpha(model)
    except CalibrationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if not sol.converged:
        if sol.status == STATUS_DIVERGED:
            print(
                "error: gamma diverged; penalty too small for this delta "
                "(labels separable with high probability)",
                file=sys.stderr,
            )
        else:
            print(f"error: solver did not converge ({sol.status})", file=sys.stderr)
        return EXIT_NUMERIC
    report = theory_report(model, solution=sol)
    doc = report.to_dict()
    if args.format == "csv":
        _emit(args, _report_csv(doc))
    else:
        _emit(args, json.dumps(doc, sort_keys=True))
    return EXIT_OK


def cmd_landscape(args) -> int:
    model = ModelSpec.parse(args.model, args.delta, args.lam)
    grid = _parse_grid(args.alpha_grid)
    quad = v_quadrature(model)
    rows = []
    n_solved = 0
    warm = None
    for a in grid:
        sol = solve_signaled(float(a), model, quad=quad, warm=warm)
        if sol.converged:
            warm = (sol.gamma, sol.sigma)
            obj = theory_objective(float(a), sol.gamma, sol.sigma, model, quad)
            rows.append([f"{a:.10g}", f"{sol.gamma:.12g}", f"{sol.sigma:.12g}",
                         f"{obj:.12g}"])
            n_solved += 1
        else:
            rows.append([f"{a:.10g}", "no_solution", "no_solution", "no_solution"])
    if n_solved == 0:
        print("error: no alpha on the grid admits a solution", file=sys.stderr)
        return EXIT_NUMERIC
    _emit(args, _csv_text(["alpha", "gamma_alpha", "sigma_alpha", "objective"], rows))
    return EXIT_OK


def _one_replicate(model, n, p, lam, seed, n_test, theory):
    data = generate_dataset(model, n, p, seed)
    fit = fit_svm(data, lam)
    if not fit.converged:
        return None, fit.status
    return empirical_report(fit, data, model, n_test, theory), fit.status


def cmd_simulate(args) -> int:
    delta = args.p / args.n
    model = ModelSpec.parse(args.model, delta, args.lam)
    theory = theory_report(model)
    seeds = [int(s.generate_state(1)[0] % 2**31)
             for s in np.random.SeedSequence(args.seed).spawn(args.replicates)]

    workers = int(os.environ.get("SVM_ASYM_THREADS", "0")) or None
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(
            pool.map(
                lambda s: _one_replicate(
                    model, args.n, args.p, args.lam, s, args.n_test, theory
                ),
                seeds,
            )
        )

    reports = [r for r, _ in results if r is not None]
    statuses = [st for _, st in results]
    if not reports:
        print("error: every replicate failed to converge", file=sys.stderr)
        return EXIT_NUMERIC

    fields = ["coef_ks", "margin_ks", "boundary_fraction", "test_error", "objective"]
    agg = {}
    for f in fields:
        vals = np.array([r.empirical[f] for r in reports])
        agg[f] = {"mean": float(vals.mean()),
                  "sd": float(vals.std(ddof=1)) if len(vals) > 1 else 0.0}
    doc = {
        "config": {
            "model": model.model_string(),
            "delta": delta,
            "lambda": args.lam,
            "n": args.n,
            "p": args.p,
            "seed": args.seed,
            "replicates": args.replicates,
            "n_test": args.n_test,
        },
        "theory": theory.to_dict(),
        "empirical": agg,
        "replicate_seeds": seeds,
        "replicate_status": statuses,
    }
    if args.format == "csv":
        flat = {"model": model.model_string(), "delta": delta, "lambda": args.lam,
                "n": args.n, "p": args.p, "seed": args.seed}
        for f in fields:
            flat[f + "_mean"] = agg[f]["mean"]
            flat[f + "_sd"] = agg[f]["sd"]
        for k in ("alpha_star", "gamma_star", "sigma_star", "support_fraction",
                  "objective", "misclassification"):
            flat["theory_" + k] = doc["theory"][k]
        _emit(args, _report_csv(flat))
    else:
        _emit(args, json.dumps(doc, sort_keys=True))
    return EXIT_OK if len(reports) == len(seeds) else EXIT_PARTIAL


def cmd_curves(args) -> int:
    model = ModelSpec.parse(args.model, args.delta, args.lam)
    report = theory_report(model)
    lo, hi, n = _parse_gridspec(args.grid)
    x = np.linspace(lo, hi, n)
    dens = report.w_density(x)
    rows = [
        [f"{xi:.12g}", f"{c:.12g}", f"{mcd:.12g}", f"{d:.12g}"]
        for xi, c, mcd, d in zip(x, report.coef_cdf(x), report.margin_cdf(x), dens)
    ]
    out = _csv_text(["x", "coef_cdf", "margin_cdf", "w_density"], rows)
    out += f"# margin_atom,location=1,mass={report.margin_atom():.12g}\n"
    _emit(args, out)
    return EXIT_OK


def cmd_tune_lambda(args) -> int:
    model = ModelSpec.parse(args.model, args.delta, max(args.lo, 1e-300))
    try:
        lam_star, report, scan = optimize_lambda(
            args.delta, model, (args.lo, args.hi), n_grid=args.grid_points
        )
    except CalibrationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    doc = {
        "lambda_star": lam_star,
        "report": report.to_dict(),
        "scan": [{"lambda": lam, "misclassification": None if math.isnan(e) else e}
                 for lam, e in scan],
    }
    if model.kind == "null":
        doc["note"] = "flat objective: misclassification = 0.5 for every lambda"
    _emit(args, json.dumps(doc, sort_keys=True))
    return EXIT_OK


def _parse_grid(spec: str) -> np.ndarray:
    """Grid spec "lo:step:hi" or comma-separated values."""
    if ":" in spec:
        lo, step, hi = (float(t) for t in spec.split(":"))
        if step <= 0 or hi < lo:
            raise ValueError("grid must be increasing")
        return np.arange(lo, hi + 0.5 * step, step)
    vals = np.array([float(t) for t in spec.split(",") if t.strip() != ""])
    if len(vals) == 0 or np.any(np.diff(vals) <= 0):
        raise ValueError("grid must be nonempty and increasing")
    return vals


def _parse_gridspec(spec: str):
    lo, hi, n = spec.split(":")
    lo, hi, n = float(lo), float(hi), int(n)
    if not (hi > lo and n >= 2):
        raise ValueError("grid spec must be lo:hi:n with hi > lo, n >= 2")
    return lo, hi, n


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="svm-asym",
        description="Asymptotic theory and Monte Carlo lab for the soft-margin SVM",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, need_delta=True):
        p.add_argument("--model", required=True,
                       help='"null" | "logistic:<c>" | "indicator"')
        if need_delta:
            p.add_argument("--delta", type=float, required=True, help="p/n ratio")
        p.add_argument("--lambda", dest="lam", type=float, default=1.0,
                       help="ridge penalty (default 1)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", default="-", help="output path, - for stdout")

    p = sub.add_parser("solve", help="solve the fixed-point system")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("landscape", help="objective vs alpha table")
    common(p)
    p.add_argument("--alpha-grid", default="0:0.02:1",
                   help='"lo:step:hi" or comma list')
    p.set_defaults(func=cmd_landscape)

    p = sub.add_parser("simulate", help="Monte Carlo replicates vs theory")
    common(p, need_delta=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--n-test", type=int, default=10_000)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("curves", help="predicted CDF / density tables")
    common(p)
    p.add_argument("--grid", default="-6:6:2001", help="lo:hi:n")
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("tune-lambda", help="optimal penalty by predicted error")
    p.add_argument("--model", required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--grid-points", type=int, default=30)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_tune_lambda)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ModelConfigError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        ap.print_usage(sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
