"""Per-coefficient integer ranges from LP projections of the discretized constraints."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .exceptions import SpecInfeasible
from .grid import FrequencyGrid
from .spec import FilterSpec, basis_matrix

ROUNDING_NUDGE = 1e-6


@dataclass(frozen=True)
class CoefficientBounds:
    lo: tuple[int, ...]
    hi: tuple[int, ...]

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise ValueError("lo and hi must have equal length")
        for m, (a, b) in enumerate(zip(self.lo, self.hi)):
            if a > b:
                raise ValueError(f"empty range for coefficient {m}: [{a}, {b}]")

    def __len__(self) -> int:
        return len(self.lo)

    def contains(self, h) -> bool:
        return all(a <= x <= b for a, b, x in zip(self.lo, self.hi, h))

    def max_abs(self, m: int) -> int:
        return max(abs(self.lo[m]), abs(self.hi[m]))

    def to_csv(self) -> str:
        rows = ["m,lo,hi"] + [f"{m},{a},{b}" for m, (a, b) in enumerate(zip(self.lo, self.hi))]
        return "\n".join(rows) + "\n"

    @classmethod
    def box(cls, num_coefficients: int, limit: int) -> "CoefficientBounds":
        return cls((-limit,) * num_coefficients, (limit,) * num_coefficients)


def frequency_rows(spec: FilterSpec, grid: FrequencyGrid):
    """Inequalities ``A [h; G] <= 0`` (variable gain) or ``A h <= b`` (fixed gain) for every grid point."""
    V = basis_matrix(spec.ftype, spec.num_coefficients, grid.omega)
    scale = float(spec.scale)
    if spec.gain.variable:
        upper = np.hstack([V, -scale * grid.upper[:, None]])
        lower = np.hstack([-V, scale * grid.lower[:, None]])
        return np.vstack([upper, lower]), np.zeros(2 * len(grid))
    g = spec.gain.value
    return np.vstack([V, -V]), np.concatenate([g * scale * grid.upper, -g * scale * grid.lower])


def _finite_rows(A, b):
    keep = np.isfinite(b) & np.all(np.isfinite(A), axis=1)
    return A[keep], b[keep]


def tighten(spec: FilterSpec, grid: FrequencyGrid) -> CoefficientBounds:
    """Integer enclosure ``[ceil(min h_m), floor(max h_m)]`` of the real feasible set.

    Each LP honours the frequency constraints on ``grid``, the gain interval
    and the word-length box ``|h_m| <= 2**B``.
    """
    if len(grid) == 0:
        raise ValueError("grid must be nonempty")
    M = spec.num_coefficients
    limit = spec.coefficient_limit
    A, b = _finite_rows(*frequency_rows(spec, grid))
    bounds = [(-limit, limit)] * M
    if spec.gain.variable:
        bounds.append(spec.gain.bounds)
    n = len(bounds)
    lo, hi = [], []
    for m in range(M):
        pair = []
        for direction in (1.0, -1.0):
            c = np.zeros(n)
            c[m] = direction
            res = linprog(c, A_ub=A if len(b) else None, b_ub=b if len(b) else None, bounds=bounds, method="highs")
            if res.status == 2:
                raise SpecInfeasible(
                    f"specification {spec.name or ''} is infeasible even with real coefficients on the design grid"
                )
            if res.status == 3:
                pair.append(-limit * direction)
                continue
            if res.status != 0:
                raise RuntimeError(f"bound LP for coefficient {m} failed: {res.message}")
            pair.append(direction * res.fun)
        lo.append(max(-limit, math.ceil(pair[0] - ROUNDING_NUDGE)))
        hi.append(min(limit, math.floor(pair[1] + ROUNDING_NUDGE)))
    if any(a > b_ for a, b_ in zip(lo, hi)):
        bad = [m for m, (a, b_) in enumerate(zip(lo, hi)) if a > b_]
        raise SpecInfeasible(f"no integer value fits coefficient(s) {bad}")
    return CoefficientBounds(tuple(lo), tuple(hi))
