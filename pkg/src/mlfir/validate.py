"""Dense a-posteriori check, gain rescaling, adaptive refinement and the design driver."""
from __future__ import annotations

import csv
import io
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .bounds import CoefficientBounds, tighten
from .exceptions import Diverged, MlfirError
from .graph import DesignSolution
from .grid import FrequencyGrid, design_grid, refine, uniform_grid
from .ilp1 import minimize_total_adders
from .ilp2 import solve_bounded_ad
from .milp import SolveOptions
from .spec import FilterSpec, zero_phase_response

logger = logging.getLogger(__name__)

DENSITY_FACTOR = 128
GAIN_NUDGE = 1e-9
# absorbs solver feasibility tolerances; far below any quantization effect
VIOLATION_TOL = 1e-9


class NoImprovement(MlfirError):
    """Rescaling the gain cannot remove the violation."""


@dataclass
class ValidationReport:
    max_violation: float
    omega_max: float  # radians
    side: str | None  # "lower" or "upper" at omega_max
    band_worst: list[tuple[float, float]] = field(default_factory=list)  # per band (omega, violation)
    points: int = 0

    @property
    def valid(self) -> bool:
        return self.max_violation == 0.0

    def to_dict(self) -> dict:
        return {
            "max_violation": self.max_violation,
            "omega_max_over_pi": self.omega_max / np.pi,
            "side": self.side,
            "band_worst": [{"omega_over_pi": w / np.pi, "violation": v} for w, v in self.band_worst],
            "points": self.points,
        }


def dense_grid(spec: FilterSpec, density: int | None = None) -> FrequencyGrid:
    """Uniform check grid; ``DENSITY_FACTOR * M`` points over the band union plus edges."""
    n = density if density is not None else DENSITY_FACTOR * spec.num_coefficients
    return uniform_grid(spec, max(n, 2 * len(spec.bands)))


def normalized_response(h: Sequence[int], gain: float, spec: FilterSpec, x_over_pi) -> np.ndarray:
    return zero_phase_response(h, spec.ftype, np.pi * np.asarray(x_over_pi, dtype=float)) / (gain * spec.scale)


def _evaluate(h, gain, spec, grid):
    H = normalized_response(h, gain, spec, grid.x)
    below = grid.lower - H
    above = H - grid.upper
    return H, below, above


def validate(h: Sequence[int], gain: float, spec: FilterSpec, density: int | None = None,
             grid: FrequencyGrid | None = None, tol: float = VIOLATION_TOL) -> ValidationReport:
    """Worst bound violation of the normalized response on a dense grid."""
    grid = grid if grid is not None else dense_grid(spec, density)
    _, below, above = _evaluate(h, gain, spec, grid)
    dev = np.maximum(below, above)
    i = int(np.argmax(dev))
    worst = float(max(dev[i], 0.0))
    if worst <= tol:
        worst = 0.0
    side = None
    if worst > 0:
        side = "lower" if below[i] >= above[i] else "upper"
    band_worst = []
    for b in range(len(spec.bands)):
        idx = np.flatnonzero(grid.band == b)
        if idx.size == 0:
            band_worst.append((float("nan"), 0.0))
            continue
        j = idx[int(np.argmax(dev[idx]))]
        v = float(max(dev[j], 0.0))
        band_worst.append((float(grid.omega[j]), v if v > tol else 0.0))
    return ValidationReport(worst, float(grid.omega[i]), side, band_worst, len(grid))


def validate_solution(solution: DesignSolution, spec: FilterSpec | None = None, **kwargs) -> ValidationReport:
    return validate(solution.coefficients, solution.gain, spec or solution.spec, **kwargs)


def adjust_gain(h: Sequence[int], gain: float, spec: FilterSpec, report: ValidationReport,
                density: int | None = None) -> tuple[float, ValidationReport]:
    """Rescale the gain so the worst point meets its violated bound; raise NoImprovement otherwise."""
    if report.valid:
        return gain, report
    if not spec.gain.variable:
        raise NoImprovement("gain is fixed")
    HR = zero_phase_response(h, spec.ftype, report.omega_max)
    x = report.omega_max / np.pi
    lo = hi = None
    for band in spec.bands:
        if band.contains(x):
            lo = band.lower if lo is None else max(lo, band.lower)
            hi = band.upper if hi is None else min(hi, band.upper)
    target = lo if report.side == "lower" else hi
    if target is None or target == 0 or HR == 0 or (HR > 0) != (target > 0):
        raise NoImprovement("violated bound cannot be met by scaling")
    new = HR / (spec.scale * target)
    # a larger gain shrinks |H|: push away from the violated bound
    nudge = -GAIN_NUDGE if report.side == "lower" else GAIN_NUDGE
    new *= 1.0 + (nudge if target > 0 else -nudge)
    g_lo, g_hi = spec.gain.bounds
    new = min(max(new, g_lo), g_hi)
    rep = validate(h, new, spec, density)
    if not rep.valid:
        raise NoImprovement(f"rescaled gain {new:.9g} still violates by {rep.max_violation:.3g}")
    return new, rep


def _intersect(a: CoefficientBounds | None, b: CoefficientBounds) -> CoefficientBounds:
    if a is None:
        return b
    return CoefficientBounds(
        tuple(max(x, y) for x, y in zip(a.lo, b.lo)),
        tuple(min(x, y) for x, y in zip(a.hi, b.hi)),
    )


@dataclass
class DesignRun:
    """Final solution with its report and the per-iteration trace."""

    solution: DesignSolution
    report: ValidationReport
    grid: FrequencyGrid
    bounds: CoefficientBounds
    iterations: list[dict]


def design(
    spec: FilterSpec,
    method: str = "ilp2",
    ad: int | str = "auto",
    options: SolveOptions | None = None,
    k: int = 4,
    candidate_factor: int = 16,
    force_edges: bool = True,
    max_iter: int = 50,
    relax_aux: bool = True,
    density: int | None = None,
    grid: FrequencyGrid | None = None,
) -> DesignRun:
    """Grid, bounds, solve, validate; rescale the gain or refine the grid until valid.

    With ``allow_error`` the loop works on the widened bounds, while the
    returned violation is measured against the original ones.
    """
    if method not in ("ilp1", "ilp2"):
        raise ValueError(f"unknown method {method!r}")
    work = spec.widened()
    grid = grid if grid is not None else design_grid(work, k, candidate_factor, force_edges)
    check = dense_grid(work, density)
    bounds = None
    trace = []
    for it in range(1, max_iter + 1):
        t0 = time.perf_counter()
        bounds = _intersect(bounds, tighten(work, grid))
        if method == "ilp1":
            sol = minimize_total_adders(work, grid, bounds, options, relax_aux=relax_aux)
        else:
            sol = solve_bounded_ad(work, grid, bounds, ad, options, relax=relax_aux)
        rep = validate(sol.coefficients, sol.gain, work, grid=check)
        entry = {
            "iteration": it,
            "grid_size": len(grid),
            "A_M": sol.multiplier_adders,
            "A_S": sol.structural_adders,
            "AD": sol.adder_depth,
            "gain": sol.gain,
            "violation": rep.max_violation,
            "solver": sol.log,
        }
        if not rep.valid:
            try:
                g, rep = adjust_gain(sol.coefficients, sol.gain, work, rep, density)
                entry["rescaled_gain"] = g
                sol.gain = g
            except NoImprovement as exc:
                entry["rescale"] = str(exc)
        entry["seconds"] = time.perf_counter() - t0
        trace.append(entry)
        logger.info("iteration %d: grid %d, A=%d, violation %.3g", it, len(grid), sol.total_adders, rep.max_violation)
        if rep.valid:
            final = validate(sol.coefficients, sol.gain, spec, density)
            sol.spec = spec
            sol.violation = final.max_violation
            sol.log = trace
            return DesignRun(sol, final, grid, bounds, trace)
        new = [(rep.omega_max / np.pi, None)]
        new += [(w / np.pi, b) for b, (w, v) in enumerate(rep.band_worst) if v > 0]
        grid = refine(grid, new)
    raise Diverged(f"no valid design after {max_iter} refinement iterations")


def response_csv(h: Sequence[int], gain: float, spec: FilterSpec, density: int | None = None) -> str:
    grid = dense_grid(spec, density)
    H = normalized_response(h, gain, spec, grid.x)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["omega_over_pi", "H_normalized", "lower", "upper"])
    for row in zip(grid.x, H, grid.lower, grid.upper):
        w.writerow([f"{v:.12g}" for v in row])
    return buf.getvalue()


def write_bundle(run: DesignRun, outdir, verbose: bool = False) -> Path:
    """Write ``solution.json``, ``graph.dot``, ``response.csv`` and ``log.txt`` into ``outdir``."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    sol = run.solution
    d = sol.to_dict(verbose)
    d["validation"] = run.report.to_dict()
    (out / "solution.json").write_text(json.dumps(d, indent=2) + "\n")
    (out / "graph.dot").write_text(sol.graph.to_dot())
    (out / "response.csv").write_text(response_csv(sol.coefficients, sol.gain, sol.spec))
    lines = []
    for e in run.iterations:
        lines.append(
            f"iteration {e['iteration']}: grid={e['grid_size']} A_M={e['A_M']} A_S={e['A_S']} "
            f"AD={e['AD']} gain={e['gain']:.9g} violation={e['violation']:.3g} seconds={e['seconds']:.2f}"
        )
        for step in e["solver"]:
            lines.append("  " + " ".join(f"{k}={v}" for k, v in step.items()))
        if "rescaled_gain" in e:
            lines.append(f"  gain rescaled to {e['rescaled_gain']:.12g}")
    lines.append(f"final: A={sol.total_adders} violation={run.report.max_violation:.3g} optimality={sol.optimality.value}")
    (out / "log.txt").write_text("\n".join(lines) + "\n")
    return out


def quantized_feasible(spec: FilterSpec, options: SolveOptions | None = None, k: int = 4,
                       max_iter: int = 50) -> bool:
    """Whether some integer coefficient set (no adder constraints) passes dense validation."""
    from .ilp1 import build_sparse_model
    from .milp import Status, solve

    work = spec.widened()
    grid = design_grid(work, k)
    check = dense_grid(work)
    for _ in range(max_iter):
        try:
            bounds = tighten(work, grid)
        except MlfirError:
            return False
        model, h, _, gain = build_sparse_model(work, grid, bounds)
        out = solve(model, options or SolveOptions())
        if out.status is Status.INFEASIBLE:
            return False
        if not out.has_solution:
            raise MlfirError("feasibility check did not finish")
        coeffs = [int(round(out[v])) for v in h]
        g = out[gain] if gain is not None else work.gain.value
        rep = validate(coeffs, g, work, grid=check)
        if not rep.valid and work.gain.variable:
            try:
                g, rep = adjust_gain(coeffs, g, work, rep)
            except NoImprovement:
                pass
        if rep.valid:
            return True
        grid = refine(grid, [(rep.omega_max / np.pi, None)] + [(w / np.pi, b) for b, (w, v) in enumerate(rep.band_worst) if v > 0])
    raise Diverged("feasibility check did not converge")


def minimal_order(make_spec, start: int = 2, step: int = 2, limit: int = 200,
                  options: SolveOptions | None = None) -> int:
    """Smallest order ``N = start, start+step, ...`` whose ``make_spec(N)`` admits a valid quantized design."""
    for n in range(start, limit + 1, step):
        if quantized_feasible(make_spec(n), options):
            return n
    raise MlfirError(f"no feasible order up to {limit}")
