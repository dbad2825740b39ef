"""Experiment drivers: single runs with artifact export, convergence, boundary and timing sweeps."""
from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import svg
from .boundary import boundary_step
from .cases import CaseDefinition
from .errors import HypmaError
from .grid import build_grid
from .solver import Solver, SolverConfig, run

EXIT_CONVERGED = 0
EXIT_NOT_CONVERGED = 2
EXIT_SOLVER_ERROR = 3
EXIT_USAGE = 64

DIAGNOSTICS_COLUMNS = ("iter", "J_I", "J_B", "delta_m", "shocks", "millis")
FIELDS_COLUMNS = ("i", "j", "x1", "x2", "m1", "m2", "u")
CONVERGENCE_COLUMNS = ("nx1", "nx2", "h", "eps_u", "eps_m1", "eps_m2", "eps_r", "iters", "status")
BOUNDARY_COLUMNS = ("method", "nb", "nx1", "nx2", "eps_u", "eps_m1", "eps_m2", "eps_r", "iters", "status")
TIMING_COLUMNS = ("sweep", "method", "nx1", "nx2", "nb", "mean_seconds")
METRIC_NAMES = ("eps_u", "eps_m1", "eps_m2", "eps_r")
# successive eps_u ratio below this marks the start of the N_b plateau
PLATEAU_RATIO = 1.3


def fmt(v) -> str:
    """Round-trip text for CSV and summary values."""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, columns, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def write_summary(path: Path, items: dict) -> Path:
    path = Path(path)
    path.write_text("".join(f"{k} = {fmt(v)}\n" for k, v in items.items()))
    return path


def observed_order(h, eps) -> float:
    """Least-squares slope of ``log(eps)`` against ``log(h)``; NaN with fewer than two usable points."""
    h, eps = np.asarray(h, dtype=float), np.asarray(eps, dtype=float)
    ok = np.isfinite(h) & np.isfinite(eps) & (h > 0) & (eps > 0)
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(h[ok]), np.log(eps[ok]), 1)[0])


def nb_sweep_analysis(nbs, eps) -> tuple[float, int]:
    """Slope of ``eps`` vs ``N_b`` before the plateau, and the index where the plateau starts.

    The plateau starts at the first point whose improvement over its
    predecessor is below ``PLATEAU_RATIO``; ``len(nbs)`` when there is none.
    """
    nbs, eps = np.asarray(nbs, dtype=float), np.asarray(eps, dtype=float)
    start = len(eps)
    for k in range(1, len(eps)):
        if eps[k - 1] / eps[k] < PLATEAU_RATIO:
            start = k
            break
    return observed_order(nbs[:start], eps[:start]), start


@dataclass(frozen=True)
class RunResult:
    case: str
    nx1: int
    nx2: int
    status: str
    error: str
    iterations: int
    metrics: dict
    wall_seconds: float
    extra: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        if self.status == "converged":
            return EXIT_CONVERGED
        if self.status == "error":
            return EXIT_SOLVER_ERROR
        return EXIT_NOT_CONVERGED


def _metric_dict(metrics) -> dict:
    if metrics is None:
        return {k: float("nan") for k in METRIC_NAMES}
    return metrics.as_dict()


def run_single(case: CaseDefinition, nx1: int, nx2: int, config: SolverConfig,
               out: Path | None = None, plots: bool = False, prefix: str = "") -> RunResult:
    """One solve; writes diagnostics, fields and summary files into ``out`` when given.

    Solver errors are captured in the result rather than raised.
    """
    grid = build_grid(case.bounds, nx1, nx2)
    t0 = time.perf_counter()
    m = u = diag = metrics = None
    err = ""
    try:
        m, u, diag, metrics = run(case, grid, config)
    except HypmaError as exc:
        err = f"{exc.name}: {exc}"
        diag = getattr(exc, "diagnostics", None)
        solver = getattr(exc, "solver", None)
        m = solver.m if solver is not None else None
    wall = time.perf_counter() - t0
    status = diag.status if diag is not None else "error"
    if err:
        status = "error"
    res = RunResult(case.name, nx1, nx2, status, err, diag.iterations if diag else 0,
                    _metric_dict(metrics), wall)
    if out is None:
        return res
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    if diag is not None:
        write_csv(out / f"{prefix}diagnostics.csv", DIAGNOSTICS_COLUMNS, diag.rows())
    if m is not None and u is not None:
        X1, X2 = grid.mesh()
        rows = ((i, j, X1[i, j], X2[i, j], m[0, i, j], m[1, i, j], u[i, j])
                for i in range(nx1) for j in range(nx2))
        write_csv(out / f"{prefix}fields.csv", FIELDS_COLUMNS, rows)
    summary = {
        "case": case.name, "method": config.method, "nx1": nx1, "nx2": nx2, "nb": config.nb,
        "alpha1": config.alpha1, "alpha2": config.alpha2,
        "shock_correction": config.shock_correction, "status": status, "iters": res.iterations,
    }
    if err:
        summary["error"] = err
    summary.update(res.metrics)
    if diag is not None and diag.iterations:
        summary.update({"J_I": diag.J_I[-1], "J_B": diag.J_B[-1], "delta_m": diag.delta_m[-1],
                        "shocks_total": int(sum(diag.shocks)),
                        "factorizations": diag.factorizations,
                        "compatibility": diag.compatibility})
    summary["wall_seconds"] = wall
    write_summary(out / f"{prefix}summary.txt", summary)
    if plots and m is not None:
        from .boundary import build_target
        target = build_target(case, min(config.nb, 2001))
        stride = max(1, max(nx1, nx2) // 40)
        svg.mapped_grid(out / f"{prefix}mapped_grid.svg", m, target.closed, stride,
                        title=f"{case.name} {nx1}x{nx2} {config.method}")
        if diag is not None and diag.iterations:
            it = np.arange(1, diag.iterations + 1)
            svg.line_plot(out / f"{prefix}history.svg",
                          {"delta_m": (it, diag.delta_m), "J_I": (it, diag.J_I), "J_B": (it, diag.J_B)},
                          title="iteration history", xlabel="iteration")
    return res


def convergence_study(case: CaseDefinition, grids, config: SolverConfig, out: Path | None = None,
                      plots: bool = False) -> tuple[list[RunResult], dict]:
    """Runs every grid; returns the results and the observed order per metric."""
    results = [run_single(case, a, b, config, out, False, prefix=f"{a}x{b}_") for a, b in grids]
    hs = [max((case.bounds[1] - case.bounds[0]) / (r.nx1 - 1),
              (case.bounds[3] - case.bounds[2]) / (r.nx2 - 1)) for r in results]
    orders = {k: observed_order(hs, [r.metrics[k] for r in results]) for k in METRIC_NAMES}
    if out is not None:
        rows = [(r.nx1, r.nx2, h, *(r.metrics[k] for k in METRIC_NAMES), r.iterations, r.status)
                for r, h in zip(results, hs)]
        write_csv(Path(out) / "convergence.csv", CONVERGENCE_COLUMNS, rows)
        partial = any(r.status == "error" for r in results)
        write_summary(Path(out) / "summary.txt", {
            "case": case.name, "method": config.method, "study": "convergence",
            "grids": " ".join(f"{r.nx1}x{r.nx2}" for r in results),
            "statuses": " ".join(r.status for r in results), "partial": partial,
            **{f"order_{k}": v for k, v in orders.items()}})
        if plots:
            svg.line_plot(Path(out) / "convergence.svg",
                          {k: (hs, [r.metrics[k] for r in results]) for k in METRIC_NAMES},
                          logx=True, title=f"{case.name} errors", xlabel="h")
    return results, orders


def boundary_study(case: CaseDefinition, nx1: int, nx2: int, nbs, methods, config: SolverConfig,
                   out: Path | None = None, plots: bool = False) -> tuple[list[RunResult], dict]:
    """Fixed grid, varying ``N_b`` per boundary method; returns results and per-method N_b analysis."""
    results = []
    analysis = {}
    for method in methods:
        per = []
        for nb in nbs:
            r = run_single(case, nx1, nx2, config.with_(method=method, nb=int(nb)))
            per.append(RunResult(r.case, r.nx1, r.nx2, r.status, r.error, r.iterations, r.metrics,
                                 r.wall_seconds, {"method": method, "nb": int(nb)}))
        results.extend(per)
        slope, start = nb_sweep_analysis(nbs, [r.metrics["eps_u"] for r in per])
        analysis[method] = {"slope": slope, "plateau_index": start}
    if out is not None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        rows = [(r.extra["method"], r.extra["nb"], r.nx1, r.nx2, *(r.metrics[k] for k in METRIC_NAMES),
                 r.iterations, r.status) for r in results]
        write_csv(out / "boundary.csv", BOUNDARY_COLUMNS, rows)
        summary = {"case": case.name, "study": "boundary", "nx1": nx1, "nx2": nx2,
                   "nbs": " ".join(str(int(n)) for n in nbs)}
        for method, a in analysis.items():
            summary[f"{method}_slope_eps_u"] = a["slope"]
            summary[f"{method}_plateau_index"] = a["plateau_index"]
        write_summary(out / "summary.txt", summary)
        if plots:
            series = {m: (list(nbs), [r.metrics["eps_u"] for r in results if r.extra["method"] == m])
                      for m in methods}
            svg.line_plot(out / "boundary.svg", series, logx=True, title="eps_u vs N_b", xlabel="N_b")
    return results, analysis


def time_boundary_step(case: CaseDefinition, nx1: int, nx2: int, nb: int, method: str,
                       repeats: int = 5, config: SolverConfig = SolverConfig(),
                       min_seconds: float = 0.02) -> float:
    """Mean wall time of one b-step after a warm-up call.

    The boundary images come from one full iteration from the initial guess,
    so every method is timed on the same input.  At least ``repeats`` calls
    are timed, and more until ``min_seconds`` have accumulated.
    """
    grid = build_grid(case.bounds, nx1, nx2)
    solver = Solver(case, grid, config.with_(method="salm", nb=int(nb), shock_correction=False))
    solver.step()
    mb = solver.boundary_images()
    boundary_step(method, mb, solver.target, solver.seg_positions)
    t = []
    while len(t) < repeats or sum(t) < min_seconds:
        t0 = time.perf_counter()
        boundary_step(method, mb, solver.target, solver.seg_positions)
        t.append(time.perf_counter() - t0)
    return float(np.mean(t))


def timing_study(case: CaseDefinition, nx1: int, nx2: int, nb: int, nbs, grids, methods,
                 repeats: int = 5, config: SolverConfig = SolverConfig(),
                 out: Path | None = None, plots: bool = False) -> tuple[list[tuple], dict]:
    """Two sweeps: fixed grid with varying ``N_b``, fixed ``N_b`` with varying grid.

    Returns the timing rows and the log-log slopes per method and sweep.
    """
    rows = []
    for method in methods:
        for b in nbs:
            rows.append(("nb", method, nx1, nx2, int(b),
                         time_boundary_step(case, nx1, nx2, b, method, repeats, config)))
        for a, c in grids:
            rows.append(("grid", method, a, c, int(nb),
                         time_boundary_step(case, a, c, nb, method, repeats, config)))
    slopes = {}
    for method in methods:
        r = [x for x in rows if x[0] == "nb" and x[1] == method]
        slopes[f"{method}_slope_nb"] = observed_order([x[4] for x in r], [x[5] for x in r])
        r = [x for x in rows if x[0] == "grid" and x[1] == method]
        slopes[f"{method}_slope_grid"] = observed_order([max(x[2], x[3]) for x in r], [x[5] for x in r])
    if out is not None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(out / "timing.csv", TIMING_COLUMNS, rows)
        write_summary(out / "summary.txt", {"case": case.name, "study": "timing", **slopes})
        if plots:
            series = {m: ([x[4] for x in rows if x[0] == "nb" and x[1] == m],
                          [x[5] for x in rows if x[0] == "nb" and x[1] == m]) for m in methods}
            svg.line_plot(out / "timing.svg", series, logx=True, title="b-step time vs N_b",
                          xlabel="N_b", ylabel="seconds")
    return rows, slopes
