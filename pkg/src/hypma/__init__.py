"""Least-squares solver for the hyperbolic Monge-Ampere equation ``det D^2 u = -f^2``
with a transport boundary condition ``grad u(dX) = dY``."""
from .cases import CASES, CaseDefinition, make_case, rectangle_case, translated
from .errors import (AdjacencyBroken, DegenerateMapping, DegenerateSegment, EmptyCandidates, GridError,
                     HypmaError, NonHyperbolic, SingularSystem, UnknownCase)
from .grid import Grid, build_grid, fd_jacobian
from .kernels import BACKEND
from .popt import minimize_fs_point
from .solver import ErrorMetrics, IterationDiagnostics, Solver, SolverConfig, run, solve_case

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "CASES", "CaseDefinition", "ErrorMetrics", "Grid", "IterationDiagnostics", "Solver",
    "SolverConfig", "build_grid", "fd_jacobian", "make_case", "minimize_fs_point", "rectangle_case",
    "run", "solve_case", "translated",
    "AdjacencyBroken", "DegenerateMapping", "DegenerateSegment", "EmptyCandidates", "GridError",
    "HypmaError", "NonHyperbolic", "SingularSystem", "UnknownCase",
]
