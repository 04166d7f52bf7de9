"""Minimum-adder multiplierless linear-phase FIR filter design."""
from .aop import a_star, build_stage_sets, max_adder_depth, odd_part
from .benchmarks import BENCHMARKS, PUBLISHED_DESIGNS, benchmark_spec
from .bounds import CoefficientBounds, tighten
from .estimator import MultiplierlessFIR
from .exceptions import (
    DepthInfeasible,
    Diverged,
    GraphError,
    IntegerInfeasible,
    MlfirError,
    SolverTimeout,
    SpecError,
    SpecInfeasible,
)
from .graph import AdderGraph, DesignSolution, Optimality
from .grid import FrequencyGrid, afp_grid, design_grid, refine, uniform_grid
from .ilp1 import mcm_min_adders, minimize_total_adders
from .ilp2 import scm_min_adders, solve_bounded_ad
from .milp import SolveOptions
from .spec import Band, FilterSpec, FilterType, Gain, lowpass_spec, redmill_spec
from .validate import design, validate

__version__ = "0.1.0"

__all__ = [
    "AdderGraph",
    "BENCHMARKS",
    "Band",
    "CoefficientBounds",
    "DepthInfeasible",
    "DesignSolution",
    "Diverged",
    "FilterSpec",
    "FilterType",
    "FrequencyGrid",
    "Gain",
    "GraphError",
    "IntegerInfeasible",
    "MlfirError",
    "MultiplierlessFIR",
    "Optimality",
    "PUBLISHED_DESIGNS",
    "SolveOptions",
    "SolverTimeout",
    "SpecError",
    "SpecInfeasible",
    "a_star",
    "afp_grid",
    "benchmark_spec",
    "build_stage_sets",
    "design",
    "design_grid",
    "lowpass_spec",
    "max_adder_depth",
    "mcm_min_adders",
    "minimize_total_adders",
    "odd_part",
    "redmill_spec",
    "refine",
    "scm_min_adders",
    "solve_bounded_ad",
    "tighten",
    "uniform_grid",
    "validate",
]
