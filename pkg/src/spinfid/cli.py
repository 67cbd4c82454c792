"""Command-line entry point: sweep | peaks | scale | oracle | plot.

Exit codes: 0 success (flagged rows allowed), 1 usage or input error,
2 numerical failure against oracle tolerances.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__, runio
from .basis import build_sector_basis
from .eigensolver import full_spectrum, make_solver
from .fidelity import (LambdaGrid, SweepOptions, chi_from_derivatives,
                       chi_from_stencil, resolve_workers, sweep)
from .hamiltonian import ChainSpec, dense_hamiltonian
from .oracle import (chi2_perturbative, chi3_perturbative,
                     d3E_finite_difference, d3E_perturbative, driving_elements)
from .scaling import extrapolate, find_peak
from .svgplot import Chart

ORACLE_L_MAX = 12
ORACLE_L_OPTIN = 14


class CliError(Exception):
    """Usage or input problem; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(message)


def _parse_sites(text: str) -> list[int]:
    try:
        sites = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise CliError(f"--sites must be a comma list of integers, got {text!r}")
    if not sites:
        raise CliError("--sites is empty")
    for L in sites:
        if L % 2 != 0:
            raise CliError(f"L must be even, got {L}")
    return sites


def build_parser() -> _Parser:
    p = _Parser(prog="spinfid",
                description="Fidelity analysis of the spin-1/2 chain with "
                            "next-nearest-neighbor coupling.")
    p.add_argument("--version", action="version", version=f"spinfid {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sweep", help="compute chi2/chi3 over an (L, lambda) grid")
    s.add_argument("--sites", default="14,16,18,20",
                   help="comma list of even L (default: the production sizes)")
    s.add_argument("--lambda-min", type=float, default=0.0)
    s.add_argument("--lambda-max", type=float, default=0.5)
    s.add_argument("--lambda-step", type=float, default=0.005)
    s.add_argument("--delta", type=float, default=1e-3, help="base stencil step h")
    s.add_argument("--method", choices=["stencil", "derivative", "both"],
                   default="stencil")
    s.add_argument("--seed", type=int, default=1)
    s.add_argument("--tol", type=float, default=1e-12, help="eigensolver residual tolerance")
    s.add_argument("--solver", choices=["lanczos", "dense"], default="lanczos")
    s.add_argument("--no-richardson", action="store_true",
                   help="skip the half-step consistency check (faster, unguarded)")
    s.add_argument("--workers", type=int, default=None)
    s.add_argument("--out", required=True, help="output CSV path")

    pk = sub.add_parser("peaks", help="locate the per-L peak of a sweep column")
    pk.add_argument("--in", dest="infile", required=True, help="sweep CSV")
    pk.add_argument("--quantity", default="chi3_abs")
    pk.add_argument("--prominence", type=float, default=0.02,
                    help="minimum peak prominence as a fraction of the column range")
    pk.add_argument("--out", required=True, help="output JSON path")

    sc = sub.add_parser("scale", help="extrapolate peak positions to infinite size")
    sc.add_argument("--in", dest="infile", required=True, help="peaks JSON")
    sc.add_argument("--variable", choices=["inv_L", "inv_L2"], default="inv_L",
                    help="designated primary scaling variable (both are fitted)")
    sc.add_argument("--out", required=True, help="output JSON path")

    orc = sub.add_parser("oracle", help="cross-check all chi/d3E routes at small L")
    orc.add_argument("--sites", required=True, help="comma list of even L <= 12")
    orc.add_argument("--lambda", dest="lam", type=float, required=True)
    orc.add_argument("--delta", type=float, default=1e-3)
    orc.add_argument("--seed", type=int, default=1)
    orc.add_argument("--tol-chi2", type=float, default=0.005)
    orc.add_argument("--tol-chi3", type=float, default=0.01)
    orc.add_argument("--tol-d3e", type=float, default=0.005)
    orc.add_argument("--allow-l14", action="store_true",
                     help="permit L = 14 (slow full spectrum)")
    orc.add_argument("--out", default=None, help="optional JSON report path")

    pl = sub.add_parser("plot", help="render sweep columns or a scaling fit as SVG")
    pl.add_argument("--in", dest="infile", required=True, help="sweep CSV or scaling JSON")
    pl.add_argument("--quantity", default="chi3_abs",
                    help="sweep column name, or 'scaling' for a fit JSON")
    pl.add_argument("--out", required=True, help="output SVG path")
    return p


def cmd_sweep(args) -> int:
    sites = _parse_sites(args.sites)
    grid = LambdaGrid(lo=args.lambda_min, hi=args.lambda_max, step=args.lambda_step)
    workers = resolve_workers(args.workers)
    opts = SweepOptions(h=args.delta, method=args.method, seed=args.seed,
                        tol=args.tol, richardson=not args.no_richardson,
                        solver=args.solver, workers=workers)
    try:
        result = sweep(sites, grid, opts)
    except ValueError as e:
        raise CliError(str(e))
    runio.write_sweep_csv(args.out, result.rows)
    runio.write_manifest(args.out, "sweep", {
        "sites": sites, "lambda_min": args.lambda_min, "lambda_max": args.lambda_max,
        "lambda_step": args.lambda_step, "delta": args.delta, "method": args.method,
        "seed": args.seed, "tol": args.tol, "solver": args.solver,
        "richardson": not args.no_richardson, "workers": workers,
    }, points=result.meta)
    flagged = sum(1 for r in result.rows if r.flag)
    print(f"sweep: {len(result.rows)} rows ({flagged} flagged) -> {args.out}")
    return 0


def cmd_peaks(args) -> int:
    rows = runio.read_sweep_csv(args.infile)
    sizes = sorted({r.L for r in rows})
    peaks = []
    for L in sizes:
        lams, vals = runio.sweep_column(rows, L, args.quantity)
        if len(lams) < 5:
            continue
        vals = np.asarray(vals)
        threshold = args.prominence * float(vals.max() - vals.min())
        rec = find_peak(lams, vals, threshold, L=L)
        if rec is not None:
            peaks.append(rec)
    runio.write_json(args.out, runio.peaks_to_json(peaks, args.quantity, args.prominence))
    runio.write_manifest(args.out, "peaks", {
        "in": str(args.infile), "quantity": args.quantity,
        "prominence": args.prominence,
    })
    for rec in peaks:
        print(f"L={rec.L}: peak at lambda = {rec.lambda_peak:.6f} "
              f"(value {rec.peak_value:.6g})")
    if not peaks:
        print("no qualifying peaks")
    return 0


def cmd_scale(args) -> int:
    payload = runio.read_json(args.infile)
    peaks = runio.peaks_from_json(payload)
    try:
        fits = {v: extrapolate(peaks, v) for v in ("inv_L", "inv_L2")}
    except ValueError as e:
        raise CliError(str(e))
    runio.write_json(args.out, runio.scaling_to_json(fits, args.variable))
    runio.write_manifest(args.out, "scale", {
        "in": str(args.infile), "variable": args.variable,
    })
    for name, fit in fits.items():
        mark = " (primary)" if name == args.variable else ""
        print(f"{name}{mark}: lambda_c = {fit.lambda_c:.6f} "
              f"+- {fit.intercept_std_error:.6f} (r^2 = {fit.r_squared:.6f})")
    return 0


def cmd_oracle(args) -> int:
    sites = _parse_sites(args.sites)
    limit = ORACLE_L_OPTIN if args.allow_l14 else ORACLE_L_MAX
    for L in sites:
        if L > limit:
            raise CliError(f"oracle guard: L = {L} exceeds {limit}"
                           + ("" if args.allow_l14 else " (use --allow-l14 for 14)"))
    report = []
    worst_ok = True
    for L in sites:
        basis = build_sector_basis(L, L // 2)
        solver = make_solver(basis, "lanczos", tol=1e-13, seed=args.seed)
        point_s = chi_from_stencil(solver, args.lam, args.delta)
        point_d = chi_from_derivatives(solver, args.lam, args.delta)
        spectral = full_spectrum(dense_hamiltonian(ChainSpec(L, args.lam), basis),
                                 lam=args.lam, basis=basis)
        elems = driving_elements(spectral, basis)
        chi2_p = chi2_perturbative(elems, spectral.energies)
        chi3_p = chi3_perturbative(elems, spectral.energies)
        d3e_p = d3E_perturbative(elems, spectral.energies)
        d3e_f = d3E_finite_difference(solver, args.lam, h=5e-3)

        def rel(a, b):
            return abs(a - b) / max(abs(b), 1e-300)

        checks = {
            "chi2_stencil": (point_s.chi2, chi2_p, args.tol_chi2),
            "chi2_derivative": (point_d.chi2, chi2_p, args.tol_chi2),
            "chi3_stencil": (point_s.chi3, chi3_p, args.tol_chi3),
            "chi3_derivative": (point_d.chi3, chi3_p, args.tol_chi3),
            "d3E_fd": (d3e_f, d3e_p, args.tol_d3e),
        }
        entry = {"L": L, "lambda": args.lam,
                 "chi2_perturbative": chi2_p, "chi3_perturbative": chi3_p,
                 "d3E_perturbative": d3e_p}
        print(f"L={L} lambda={args.lam}:")
        for name, (val, ref, tol) in checks.items():
            dev = rel(val, ref)
            ok = dev <= tol
            worst_ok = worst_ok and ok
            entry[name] = val
            entry[f"{name}_rel_dev"] = dev
            print(f"  {name:<16} {val: .10e}  vs {ref: .10e}  "
                  f"rel {dev:.3e}  [{'ok' if ok else 'FAIL'} <= {tol:g}]")
        report.append(entry)
    if args.out:
        runio.write_json(args.out, {"tolerances": {
            "chi2": args.tol_chi2, "chi3": args.tol_chi3, "d3E": args.tol_d3e},
            "results": report, "passed": worst_ok})
        runio.write_manifest(args.out, "oracle", {
            "sites": sites, "lambda": args.lam, "delta": args.delta,
            "seed": args.seed, "tol_chi2": args.tol_chi2,
            "tol_chi3": args.tol_chi3, "tol_d3e": args.tol_d3e,
        })
    if not worst_ok:
        print("oracle: FAILED tolerance check", file=sys.stderr)
        return 2
    print("oracle: all routes agree within tolerances")
    return 0


def cmd_plot(args) -> int:
    infile = str(args.infile)
    if args.quantity == "scaling" or infile.endswith(".json"):
        payload = runio.read_json(infile)
        if "fits" not in payload:
            raise CliError(f"{infile} is not a scaling JSON")
        primary = payload.get("primary", "inv_L")
        fit = payload["fits"][primary]
        pts = fit["points"]
        if not pts:
            raise CliError("scaling JSON has no points")
        xs = [1.0 / p["L"] if primary == "inv_L" else 1.0 / p["L"] ** 2 for p in pts]
        ys = [p["lambda_peak"] for p in pts]
        chart = Chart("Finite-size scaling of third-order-fidelity peaks",
                      "1/L" if primary == "inv_L" else "1/L^2", "lambda_peak")
        line_x = [0.0, max(xs) * 1.05]
        line_y = [fit["lambda_c"] + fit["slope"] * x for x in line_x]
        chart.add_line(f"fit: {fit['lambda_c']:.4f} + {fit['slope']:.3f} x", line_x, line_y)
        chart.add_points("peaks", xs, ys)
        chart.add_points(f"lambda_c = {fit['lambda_c']:.4f}", [0.0], [fit["lambda_c"]])
    else:
        rows = runio.read_sweep_csv(infile)
        if not rows:
            raise CliError(f"{infile} has no rows")
        chart = Chart(f"{args.quantity} vs lambda", "lambda", args.quantity)
        added = 0
        for L in sorted({r.L for r in rows}):
            lams, vals = runio.sweep_column(rows, L, args.quantity)
            if lams:
                chart.add_line(f"L = {L}", lams, vals)
                added += 1
        if not added:
            raise CliError("no unflagged rows to plot")
    with open(args.out, "w") as fh:
        fh.write(chart.render())
    runio.write_manifest(args.out, "plot", {
        "in": infile, "quantity": args.quantity,
    })
    print(f"plot -> {args.out}")
    return 0


_COMMANDS = {"sweep": cmd_sweep, "peaks": cmd_peaks, "scale": cmd_scale,
             "oracle": cmd_oracle, "plot": cmd_plot}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
