"""Discretized frequency sets used as constraint points for the design models."""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .exceptions import SpecError
from .spec import FilterSpec, basis_matrix

logger = logging.getLogger(__name__)

_EDGE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Sorted frequency points (as fractions of pi) with per-point bounds.

    Points shared by two adjacent bands carry the intersection of both bands'
    bounds, so that every constraint of both bands is honoured.
    """

    x: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    band: np.ndarray
    bands: tuple = ()
    fallback: bool = False

    def __post_init__(self):
        for name in ("x", "lower", "upper"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        b = np.asarray(self.band, dtype=int)
        b.setflags(write=False)
        object.__setattr__(self, "band", b)

    def __len__(self) -> int:
        return self.x.size

    @property
    def omega(self) -> np.ndarray:
        return np.pi * self.x

    def __eq__(self, other) -> bool:
        if not isinstance(other, FrequencyGrid):
            return NotImplemented
        return (
            np.array_equal(self.x, other.x)
            and np.array_equal(self.lower, other.lower)
            and np.array_equal(self.upper, other.upper)
            and np.array_equal(self.band, other.band)
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["omega_over_pi", "lower", "upper", "band"])
        for row in zip(self.x, self.lower, self.upper, self.band):
            w.writerow([repr(float(row[0])), repr(float(row[1])), repr(float(row[2])), int(row[3])])
        return buf.getvalue()


def _assemble(points: Iterable[tuple[float, int]], bands) -> FrequencyGrid:
    """Sort, deduplicate and attach bounds; coincident points take the tightest bounds."""
    xs, lo, hi, bi = [], [], [], []
    for x, b in sorted((float(x), int(b)) for x, b in points):
        band = bands[b]
        if xs and x - xs[-1] <= _EDGE_TOL:
            lo[-1] = max(lo[-1], band.lower)
            hi[-1] = min(hi[-1], band.upper)
            continue
        xs.append(x)
        lo.append(band.lower)
        hi.append(band.upper)
        bi.append(b)
    return FrequencyGrid(
        x=np.array(xs, dtype=float),
        lower=np.array(lo, dtype=float),
        upper=np.array(hi, dtype=float),
        band=np.array(bi, dtype=int),
        bands=tuple(bands),
    )


def _band_counts(spec: FilterSpec, size: int) -> list[int]:
    widths = [float(b.width) for b in spec.bands]
    minimum = [1 if w == 0 else 2 for w in widths]
    counts = list(minimum)
    extra = size - sum(minimum)
    total = sum(widths)
    if extra > 0 and total > 0:
        shares = [extra * w / total for w in widths]
        floors = [int(np.floor(s)) for s in shares]
        rem = extra - sum(floors)
        order = sorted(range(len(widths)), key=lambda i: (-(shares[i] - floors[i]), i))
        for i in order[:rem]:
            floors[i] += 1
        counts = [c + f for c, f in zip(counts, floors)]
    return counts


def band_edges(spec: FilterSpec) -> list[tuple[float, int]]:
    pts = []
    for i, b in enumerate(spec.bands):
        pts.append((float(b.lo), i))
        pts.append((float(b.hi), i))
    return pts


def uniform_grid(spec: FilterSpec, size: int) -> FrequencyGrid:
    """Equispaced points per band, allocated proportionally to band width.

    Band edges are always present, so a band narrower than its share still gets
    both edges.
    """
    if size < len(spec.bands):
        raise SpecError(f"grid size {size} smaller than the number of bands ({len(spec.bands)})")
    pts = []
    for i, (band, n) in enumerate(zip(spec.bands, _band_counts(spec, size))):
        if band.width == 0:
            pts.append((float(band.lo), i))
            continue
        for x in np.linspace(float(band.lo), float(band.hi), n):
            pts.append((x, i))
        pts[-1] = (float(band.hi), i)
    return _assemble(pts, spec.bands)


def afp_grid(
    spec: FilterSpec,
    target: int,
    candidate_factor: int = 16,
    force_edges: bool = True,
    rank_tol: float = 1e-13,
) -> FrequencyGrid:
    """Approximate Fekete points selected from a dense uniform candidate grid.

    The basis matrix holds the filter type's trigonometric functions ``c_m``
    for ``m < target`` evaluated on the candidates; the rows picked by a
    column-pivoted QR of its transpose maximize the volume greedily.
    """
    M = spec.num_coefficients
    if target < M:
        raise SpecError(f"AFP target {target} smaller than M={M}")
    if candidate_factor < 4:
        raise SpecError("candidate_factor must be at least 4")
    cand = uniform_grid(spec, candidate_factor * target)
    V = basis_matrix(spec.ftype, target, cand.omega)
    _, R, piv = scipy.linalg.qr(V.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > rank_tol * diag[0])) if diag.size and diag[0] > 0 else 0
    if rank < target:
        logger.info("AFP basis rank %d < %d; falling back to uniform grid", rank, target)
        grid = uniform_grid(spec, target)
        return FrequencyGrid(grid.x, grid.lower, grid.upper, grid.band, grid.bands, fallback=True)
    chosen = sorted(int(i) for i in piv[:target])
    pts = [(cand.x[i], int(cand.band[i])) for i in chosen]
    if force_edges:
        pts += band_edges(spec)
    return _assemble(pts, spec.bands)


def design_grid(spec: FilterSpec, k: int = 4, candidate_factor: int = 16, force_edges: bool = True) -> FrequencyGrid:
    """Default starting grid: ``k*M`` approximate Fekete points."""
    return afp_grid(spec, k * spec.num_coefficients, candidate_factor, force_edges)


def locate_band(bands: Sequence, x: float) -> int:
    for i, b in enumerate(bands):
        if b.contains(x):
            return i
    raise SpecError(f"frequency {x}*pi lies outside every band")


def refine(grid: FrequencyGrid, new_points: Sequence[tuple[float, int]]) -> FrequencyGrid:
    """Return a new grid with ``new_points`` (fraction of pi, band index) merged in."""
    if not new_points:
        return grid
    pts = list(zip(grid.x.tolist(), grid.band.tolist()))
    for x, b in new_points:
        if b is None:
            b = locate_band(grid.bands, x)
        if not 0 <= b < len(grid.bands) or not grid.bands[b].contains(x):
            raise SpecError(f"frequency {x}*pi lies outside band {b}")
        pts.append((min(max(float(x), float(grid.bands[b].lo)), float(grid.bands[b].hi)), b))
    return _assemble(pts, grid.bands)
