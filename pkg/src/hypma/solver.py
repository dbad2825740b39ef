"""The outer least-squares iteration.

One step takes the current mapping ``m`` through three stages:

1. ``P``: per node, the symmetric matrix with ``det P = -f^2`` closest to the
   finite-difference Jacobian of ``m``;
2. ``b``: boundary targets from one of ``pm``, ``spm``, ``salm``;
3. ``m``: two Robin Poisson solves with data ``(P, b)``.

Boundary nodes whose target is closer to a nearby interior image than to
their own image get a smaller ``alpha`` for that iteration (grid-shock
correction).
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .boundary import METHODS, TargetBoundary, boundary_step, build_target
from .cases import CaseDefinition
from .errors import DegenerateMapping, EmptyCandidates, HypmaError, NonHyperbolic
from .grid import Grid, build_grid, fd_jacobian
from .poisson import RobinSystem, boundary_field, reconstruct_u
from .shock import ShockReport, corrected_alpha, detect_shocks

GUESS_VARIANTS = ("default", "yx", "xy+", "xy-")
STATUSES = ("converged", "stagnated", "max_iters", "error")


@dataclass(frozen=True)
class SolverConfig:
    alpha1: float = 0.2
    alpha2: float = 0.005
    method: str = "salm"
    nb: int = 10_000
    shock_correction: bool = True
    shock_start: int = 100
    shock_metric: str = "euclidean"
    max_iters: int = 50_000
    stop_tol: float | None = None  # None: 1e3 * eps * max(1, diam of target bbox)
    stagnation_window: int = 500
    stagnation_rtol: float = 1e-3
    initial_guess: str | None = None  # None: the case's preferred variant

    def __post_init__(self):
        if not 0.0 < self.alpha2 < self.alpha1 < 1.0:
            raise ValueError("need 0 < alpha2 < alpha1 < 1")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.nb < 2:
            raise ValueError("nb must be at least 2")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.initial_guess is not None and self.initial_guess not in GUESS_VARIANTS:
            raise ValueError(f"initial_guess must be one of {GUESS_VARIANTS}")

    def with_(self, **kw) -> "SolverConfig":
        return replace(self, **kw)


@dataclass
class IterationDiagnostics:
    J_I: list = field(default_factory=list)
    J_B: list = field(default_factory=list)
    delta_m: list = field(default_factory=list)
    shocks: list = field(default_factory=list)
    millis: list = field(default_factory=list)
    bstep_seconds: list = field(default_factory=list)
    status: str = "max_iters"
    error: str = ""
    factorizations: int = 0
    compatibility: float = float("nan")

    @property
    def iterations(self) -> int:
        return len(self.delta_m)

    def rows(self):
        for k in range(self.iterations):
            yield (k + 1, self.J_I[k], self.J_B[k], self.delta_m[k], self.shocks[k], self.millis[k])


@dataclass(frozen=True)
class ErrorMetrics:
    eps_r: float
    eps_u: float
    eps_m1: float
    eps_m2: float

    def as_dict(self) -> dict:
        return {"eps_r": self.eps_r, "eps_u": self.eps_u, "eps_m1": self.eps_m1, "eps_m2": self.eps_m2}


def default_stop_tol(target: TargetBoundary) -> float:
    y1m, y1M, y2m, y2M = target.bbox()
    diam = float(np.hypot(y1M - y1m, y2M - y2m))
    return 1e3 * np.finfo(float).eps * max(1.0, diam)


def initial_guess(target: TargetBoundary, grid: Grid, variant: str = "default") -> np.ndarray:
    """Bilinear map of the source rectangle onto the target bounding box with ``det < 0``."""
    y1m, y1M, y2m, y2M = target.bbox()
    if not (y1M > y1m and y2M > y2m):
        raise DegenerateMapping("target bounding box has zero width or height")
    X1, X2 = grid.mesh()
    t1 = (X1 - grid.x1m) / (grid.x1M - grid.x1m)
    t2 = (X2 - grid.x2m) / (grid.x2M - grid.x2m)
    if variant == "default":
        a, b = t1, 1.0 - t2
    elif variant == "yx":
        a, b = 1.0 - t1, t2
    elif variant == "xy+":
        a, b = t2, t1
    elif variant == "xy-":
        a, b = 1.0 - t2, 1.0 - t1
    else:
        raise ValueError(f"unknown initial guess {variant!r}")
    return np.stack([y1m + a * (y1M - y1m), y2m + b * (y2M - y2m)])


def _f2_field(case: CaseDefinition, grid: Grid, m: np.ndarray) -> np.ndarray:
    X1, X2 = grid.mesh()
    return np.broadcast_to(np.asarray(case.f2(X1, X2, m[0], m[1]), dtype=float), grid.shape)


def p_step(case: CaseDefinition, grid: Grid, m: np.ndarray, iteration: int = -1) -> np.ndarray:
    """Matrix field ``P`` (symmetric, ``det = -f^2``) closest to the Jacobian of ``m``."""
    f2 = _f2_field(case, grid, m)
    bad = ~(f2 > 0.0)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise NonHyperbolic(f"f^2 = {f2[i, j]:.6g} <= 0 at node ({i}, {j}), iteration {iteration}")
    D = fd_jacobian(grid, m)
    c = np.ascontiguousarray
    p11, p22, p12, _, _, _, ok = kernels.minimize_fs_field(
        c(D[0, 0].ravel()), c(D[0, 1].ravel()), c(D[1, 0].ravel()), c(D[1, 1].ravel()),
        c(f2.ravel()))
    ok = np.asarray(ok, dtype=bool)
    if not ok.all():
        nodes = [tuple(int(v) for v in np.unravel_index(k, grid.shape)) for k in np.nonzero(~ok)[0]]
        raise EmptyCandidates(f"no admissible P at {len(nodes)} node(s), first {nodes[0]}, "
                              f"iteration {iteration}", nodes)
    p11, p22, p12 = (np.asarray(v).reshape(grid.shape) for v in (p11, p22, p12))
    return np.array([[p11, p12], [p12, p22]])


def functionals(grid: Grid, m: np.ndarray, P: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    """Trapezoid values of ``J_I = 1/2 int |Dm - P|^2`` and ``J_B = 1/2 oint |m - b|^2``."""
    D = fd_jacobian(grid, m)
    JI = 0.5 * float(np.sum(grid.area_weights() * np.sum((D - P) ** 2, axis=(0, 1))))
    ii, jj = grid.boundary_order()
    r2 = (m[0, ii, jj] - b[:, 0]) ** 2 + (m[1, ii, jj] - b[:, 1]) ** 2
    JB = 0.5 * float(np.sum(grid.boundary_weights() * r2))
    return JI, JB


def residual_field(case: CaseDefinition, grid: Grid, m: np.ndarray) -> np.ndarray:
    D = fd_jacobian(grid, m)
    return D[0, 0] * D[1, 1] - D[0, 1] * D[1, 0] + _f2_field(case, grid, m)


def error_metrics(m: np.ndarray, u: np.ndarray, case: CaseDefinition, grid: Grid) -> ErrorMetrics | None:
    """Max-norm errors against the exact solution, or ``None`` when the case has none."""
    if not case.has_exact:
        return None
    X1, X2 = grid.mesh()
    ue = np.asarray(case.u(X1, X2), dtype=float)
    m1e, m2e = (np.broadcast_to(v, grid.shape) for v in case.m(X1, X2))
    eps_u = np.abs((u - u[0, 0]) - (ue - ue[0, 0])).max()
    return ErrorMetrics(
        eps_r=float(np.abs(residual_field(case, grid, m)).max()),
        eps_u=float(eps_u),
        eps_m1=float(np.abs(m[0] - m1e).max()),
        eps_m2=float(np.abs(m[1] - m2e).max()),
    )


class Solver:
    """Iteration state: the mapping, target polylines and the cached uniform-alpha system."""

    def __init__(self, case: CaseDefinition, grid: Grid, config: SolverConfig = SolverConfig(),
                 target: TargetBoundary | None = None, m0: np.ndarray | None = None):
        self.case = case
        self.grid = grid
        self.config = config
        self.target = target if target is not None else build_target(case, config.nb)
        variant = config.initial_guess or case.initial_guess
        self.m = (initial_guess(self.target, grid, variant) if m0 is None
                  else np.array(m0, dtype=float))
        self.seg_positions = grid.segment_slices()
        self._ii, self._jj = grid.boundary_order()
        self.diagnostics = IterationDiagnostics()
        self.system = RobinSystem(grid, np.full(grid.shape, config.alpha1))
        self.diagnostics.factorizations = 1
        self.n = 0
        self.P = None
        self.b = None
        self.last_report: ShockReport | None = None

    def boundary_images(self, m: np.ndarray | None = None) -> np.ndarray:
        m = self.m if m is None else m
        return np.ascontiguousarray(m[:, self._ii, self._jj].T)

    def step(self) -> float:
        """Advance one iteration; returns the update norm."""
        cfg, grid = self.config, self.grid
        t0 = time.perf_counter()
        P = p_step(self.case, grid, self.m, self.n)
        tb = time.perf_counter()
        b = boundary_step(cfg.method, self.boundary_images(), self.target, self.seg_positions)
        self.diagnostics.bstep_seconds.append(time.perf_counter() - tb)
        bf = boundary_field(grid, b)
        report = detect_shocks(self.m, b, grid, self.n, cfg.shock_metric)
        if cfg.shock_correction and self.n >= cfg.shock_start and report:
            system = RobinSystem(grid, corrected_alpha(report, grid, cfg.alpha1, cfg.alpha2))
            self.diagnostics.factorizations += 1
        else:
            system = self.system
        m_new = system.solve_mapping(P, bf)
        dm = float(np.sqrt(((m_new - self.m) ** 2).sum(axis=0)).max())
        JI, JB = functionals(grid, m_new, P, b)
        d = self.diagnostics
        d.J_I.append(JI)
        d.J_B.append(JB)
        d.delta_m.append(dm)
        d.shocks.append(report.count)
        d.millis.append(1e3 * (time.perf_counter() - t0))
        self.m, self.P, self.b, self.last_report = m_new, P, b, report
        self.n += 1
        return dm


def run(case: CaseDefinition, grid: Grid, config: SolverConfig = SolverConfig(),
        callback=None) -> tuple[np.ndarray, np.ndarray, IterationDiagnostics, ErrorMetrics | None]:
    """Iterate to convergence, stagnation or ``max_iters``; then recover ``u`` and measure errors.

    Module errors raised during the iteration propagate after the status has
    been recorded on the solver's diagnostics.
    """
    solver = Solver(case, grid, config)
    tol = config.stop_tol if config.stop_tol is not None else default_stop_tol(solver.target)
    diag = solver.diagnostics
    running = []
    best = np.inf
    w = config.stagnation_window
    try:
        for _ in range(config.max_iters):
            dm = solver.step()
            best = min(best, dm)
            running.append(best)
            if callback is not None:
                callback(solver)
            if dm < tol:
                diag.status = "converged"
                break
            n = len(running)
            if n > w and running[-1] > (1.0 - config.stagnation_rtol) * running[-1 - w]:
                diag.status = "stagnated"
                break
    except HypmaError as exc:
        diag.status = "error"
        diag.error = exc.name
        exc.diagnostics = diag
        exc.solver = solver
        raise
    u, diag.compatibility = reconstruct_u(grid, solver.m)
    return solver.m, u, diag, error_metrics(solver.m, u, case, grid)


def solve_case(case: CaseDefinition, n1: int, n2: int | None = None, **config):
    """Convenience wrapper: build the grid for ``case`` and run with keyword config."""
    grid = build_grid(case.bounds, n1, n1 if n2 is None else n2)
    return run(case, grid, SolverConfig(**config))
