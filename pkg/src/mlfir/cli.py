"""Command-line front end: ``mlfir design | validate | mcm | sweep``."""
from __future__ import annotations

import argparse
import csv
import itertools
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .benchmarks import benchmark_spec
from .bounds import tighten
from .exceptions import Diverged, IntegerInfeasible, MlfirError, SolverTimeout, SpecError, SpecInfeasible
from .graph import Optimality, emit
from .grid import design_grid
from .ilp1 import build_ilp1, mcm_min_adders
from .ilp2 import build_ilp2
from .milp import SolveOptions, write_lp
from .spec import FilterSpec, FilterType, Gain, from_printed_order
from .validate import design, validate, write_bundle

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_BEST_KNOWN = 2
EXIT_INFEASIBLE = 3
EXIT_DIVERGED = 4
EXIT_USAGE = 64

COEFF_HELP = (
    "coefficients are the M independent integers in printed order: outermost tap first, "
    "center tap (type I) or center pair (type II) last"
)


def _add_spec_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("spec", nargs="?", help="specification JSON file")
    p.add_argument("--benchmark", help="built-in specification (S1a ... L3, redmill-<p>)")
    p.add_argument("--order", type=int, help="filter order N")
    p.add_argument("--type", dest="ftype", help="filter type I..IV")
    p.add_argument("--wordlength", type=int, help="effective coefficient word length B")
    p.add_argument("--gain", help="fixed:v, variable or variable:lo:hi")
    p.add_argument("--allow-error", type=float, help="widen every bound by this amount while designing")


def _add_solver_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--solver", default="scip", help="MILP backend (scip or highs)")
    p.add_argument("--time-limit", type=float, help="per-solve time limit in seconds")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--relax-aux", choices=("on", "off"), default="on",
                   help="relax auxiliary integer variables to continuous")


def _load_spec(args) -> FilterSpec:
    if args.spec and args.benchmark:
        raise SpecError("give either a spec file or --benchmark, not both")
    gain = Gain.parse(args.gain) if args.gain else None
    if args.benchmark:
        missing = [f for f in ("order", "ftype", "wordlength") if getattr(args, f) is None]
        if missing:
            raise SpecError("--benchmark needs --order, --type and --wordlength")
        spec = benchmark_spec(args.benchmark, args.order, args.ftype, args.wordlength, gain)
    elif args.spec:
        spec = FilterSpec.load(args.spec)
        changes = {}
        if args.order is not None:
            changes["order"] = args.order
        if args.ftype is not None:
            changes["ftype"] = FilterType.parse(args.ftype)
        if args.wordlength is not None:
            changes["wordlength"] = args.wordlength
        if gain is not None:
            changes["gain"] = gain
        if changes:
            spec = spec.with_(**changes)
    else:
        raise SpecError("no specification: give a spec file or --benchmark")
    if args.allow_error is not None:
        spec = spec.with_(allow_error=args.allow_error)
    return spec


def _options(args) -> SolveOptions:
    return SolveOptions(time_limit=args.time_limit, threads=args.threads, seed=args.seed,
                        backend=args.solver, verbose=getattr(args, "verbose", False))


def _parse_ad(text: str):
    return "auto" if text == "auto" else int(text)


def cmd_design(args) -> int:
    spec = _load_spec(args)
    opts = _options(args)
    ad = _parse_ad(args.ad)
    relax = args.relax_aux == "on"
    if args.dump_grid or args.dump_bounds or args.dump_lp:
        work = spec.widened()
        grid = design_grid(work, args.grid_k, force_edges=not args.no_force_edges)
        if args.dump_grid:
            Path(args.dump_grid).write_text(grid.to_csv())
        bounds = tighten(work, grid)
        if args.dump_bounds:
            Path(args.dump_bounds).write_text(bounds.to_csv())
        if args.dump_lp:
            if args.method == "ilp1":
                inst = build_ilp1(work, grid, bounds, args.dump_am)
            else:
                inst = build_ilp2(work, grid, bounds, ad if ad != "auto" else 1)
            Path(args.dump_lp).write_text(write_lp(inst.model))
    run = design(spec, args.method, ad, opts, k=args.grid_k, force_edges=not args.no_force_edges,
                 relax_aux=relax, max_iter=args.max_iter)
    sol = run.solution
    if args.out:
        write_bundle(run, args.out, verbose=args.verbose)
    summary = {
        "name": spec.name,
        "method": sol.method,
        "N": spec.order,
        "type": spec.ftype.value,
        "B": spec.wordlength,
        "A_M": sol.multiplier_adders,
        "A_S": sol.structural_adders,
        "A": sol.total_adders,
        "AD": sol.adder_depth,
        "G": sol.gain,
        "error": run.report.max_violation,
        "optimality": sol.optimality.value,
        "coefficients": list(reversed(sol.coefficients)),
    }
    print(json.dumps(summary))
    return EXIT_OK if sol.optimality is Optimality.PROVEN_OPTIMAL else EXIT_BEST_KNOWN


def _read_coeffs(args) -> list[int]:
    if args.coeffs and args.coeffs_file:
        raise SpecError("give either --coeffs or --coeffs-file")
    text = args.coeffs if args.coeffs else Path(args.coeffs_file).read_text() if args.coeffs_file else None
    if text is None:
        raise SpecError("no coefficients given")
    try:
        return from_printed_order(int(t) for t in text.split())
    except ValueError as exc:
        raise SpecError(f"coefficients must be integers: {exc}") from exc


def cmd_validate(args) -> int:
    spec = _load_spec(args)
    h = _read_coeffs(args)
    if len(h) != spec.num_coefficients:
        raise SpecError(f"expected {spec.num_coefficients} coefficients for type {spec.ftype.value} N={spec.order}, got {len(h)}")
    if spec.gain.variable:
        raise SpecError("validate needs a fixed gain (--gain fixed:v)")
    gain = spec.gain.value
    rep = validate(h, gain, spec, density=args.density)
    out = {"max_violation": rep.max_violation, "omega_max_over_pi": rep.omega_max / 3.141592653589793,
           "side": rep.side, "gain": gain, "points": rep.points}
    print(json.dumps(out))
    return EXIT_OK if rep.valid else EXIT_VIOLATION


def cmd_mcm(args) -> int:
    targets = [int(t) for t in args.constants]
    opts = _options(args)
    n, graph = mcm_min_adders(targets, opts, relax_aux=args.relax_aux == "on", max_adders=args.max_adders)
    if args.format == "dot":
        sys.stdout.write(emit(graph, "dot"))
    else:
        print(json.dumps({"constants": targets, "adders": n, "depth": graph.depth, "graph": graph.to_dict()}))
    return EXIT_OK


def _int_list(text: str) -> list[int]:
    """``"20,22"`` or ``"20:30:2"`` (inclusive range)."""
    out = []
    for part in text.split(","):
        if ":" in part:
            bits = [int(b) for b in part.split(":")]
            lo, hi = bits[0], bits[1]
            step = bits[2] if len(bits) > 2 else 1
            out += list(range(lo, hi + 1, step))
        elif part.strip():
            out.append(int(part))
    return out


SWEEP_COLUMNS = ["name", "N", "type", "B", "method", "AD", "A_M", "A_S", "A", "G", "error", "status", "seconds"]


def _sweep_job(job: dict) -> dict:
    t0 = time.perf_counter()
    row = {"name": job["name"], "N": job["order"], "type": job["ftype"], "B": job["wordlength"],
           "method": job["method"], "AD": "", "A_M": "", "A_S": "", "A": "", "G": "", "error": "", "status": ""}
    try:
        gain = Gain.parse(job["gain"]) if job["gain"] else None
        spec = benchmark_spec(job["name"], job["order"], job["ftype"], job["wordlength"], gain, job["allow_error"])
        opts = SolveOptions(time_limit=job["time_limit"], backend=job["solver"], seed=job["seed"])
        run = design(spec, job["method"], job["ad"], opts)
        sol = run.solution
        row.update(AD=sol.adder_depth, A_M=sol.multiplier_adders, A_S=sol.structural_adders, A=sol.total_adders,
                   G=f"{sol.gain:.9g}", error=f"{run.report.max_violation:.6g}", status=sol.optimality.value)
    except (SpecInfeasible, IntegerInfeasible, SpecError) as exc:
        row["status"] = "infeasible" if not isinstance(exc, SpecError) else f"error: {exc}"
    except (Diverged, SolverTimeout) as exc:
        row["status"] = type(exc).__name__.lower()
    row["seconds"] = f"{time.perf_counter() - t0:.2f}"
    return row


def cmd_sweep(args) -> int:
    names = args.benchmark.split(",") if args.benchmark else []
    if args.p:
        names += [f"redmill-{p:g}" for p in (float(x) for x in args.p.split(","))]
    if not names:
        raise SpecError("sweep needs --benchmark and/or --p")
    types = [t.strip() for t in args.types.split(",")]
    jobs = []
    for name, N, t, B in itertools.product(names, _int_list(args.orders), types, _int_list(args.wordlengths)):
        if not FilterType.parse(t).order_is_valid(N):
            continue
        jobs.append({"name": name, "order": N, "ftype": t, "wordlength": B, "method": args.method,
                     "ad": _parse_ad(args.ad), "gain": args.gain, "allow_error": args.allow_error or 0.0,
                     "time_limit": args.time_limit, "solver": args.solver, "seed": args.seed})
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_job, jobs))
    else:
        rows = [_sweep_job(j) for j in jobs]
    out = open(args.csv, "w", newline="") if args.csv else sys.stdout
    try:
        w = csv.DictWriter(out, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mlfir", description="Minimum-adder multiplierless FIR filter design.",
                                     epilog=COEFF_HELP)
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--stage-cache", help="directory for stage-set cache files (empty string disables)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="design a filter", epilog=COEFF_HELP)
    _add_spec_args(p)
    _add_solver_args(p)
    p.add_argument("--method", choices=("ilp1", "ilp2"), default="ilp2")
    p.add_argument("--ad", default="auto", help="adder depth limit for ilp2, or auto")
    p.add_argument("--grid-k", type=int, default=4, help="design grid size as a multiple of M")
    p.add_argument("--no-force-edges", action="store_true", help="do not force band edges into the grid")
    p.add_argument("--max-iter", type=int, default=50)
    p.add_argument("--out", help="directory for the result bundle")
    p.add_argument("--dump-grid", help="write the initial design grid as CSV")
    p.add_argument("--dump-bounds", help="write the initial coefficient bounds as CSV")
    p.add_argument("--dump-lp", help="write the initial model in LP format")
    p.add_argument("--dump-am", type=int, default=0, help="multiplier-block adder count for --dump-lp with ilp1")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("validate", help="check a coefficient set against a specification", epilog=COEFF_HELP)
    _add_spec_args(p)
    p.add_argument("--coeffs", help="whitespace-separated integers")
    p.add_argument("--coeffs-file", help="file with whitespace-separated integers")
    p.add_argument("--density", type=int, help="dense grid size (default 128*M)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("mcm", help="minimum adders for a set of constants")
    p.add_argument("constants", nargs="+")
    _add_solver_args(p)
    p.add_argument("--max-adders", type=int, default=16)
    p.add_argument("--format", choices=("json", "dot"), default="json")
    p.set_defaults(func=cmd_mcm)

    p = sub.add_parser("sweep", help="grid of designs over benchmark, N, type and B")
    p.add_argument("--benchmark", help="comma-separated benchmark names")
    p.add_argument("--p", help="comma-separated redmill error targets in dB")
    p.add_argument("--orders", required=True, help="e.g. 20,22 or 20:30:2")
    p.add_argument("--types", default="I")
    p.add_argument("--wordlengths", required=True)
    p.add_argument("--method", choices=("ilp1", "ilp2"), default="ilp2")
    p.add_argument("--ad", default="auto")
    p.add_argument("--gain")
    p.add_argument("--allow-error", type=float)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--csv", help="output CSV (default stdout)")
    p.add_argument("--solver", default="scip")
    p.add_argument("--time-limit", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2, which is reserved for best-known designs
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.stage_cache is not None:
        os.environ["MLFIR_CACHE_DIR"] = args.stage_cache
    try:
        return args.func(args)
    except (SpecInfeasible, IntegerInfeasible) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (Diverged, SolverTimeout) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (SpecError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MlfirError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
