"""Command-line entry point: ``hypma`` (or ``python3 -m hypma``)."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .cases import CASES, make_case
from .solver import GUESS_VARIANTS, SolverConfig
from .studies import (BOUNDARY_COLUMNS, CONVERGENCE_COLUMNS, DIAGNOSTICS_COLUMNS, EXIT_CONVERGED,
                      EXIT_NOT_CONVERGED, EXIT_SOLVER_ERROR, EXIT_USAGE, FIELDS_COLUMNS,
                      TIMING_COLUMNS, boundary_study, convergence_study, run_single, timing_study)

EPILOG = f"""\
output files (comma-separated, header row, floats in shortest round-trip form):
  diagnostics.csv  {", ".join(DIAGNOSTICS_COLUMNS)}
                   (millis is wall time per iteration and varies between runs)
  fields.csv       {", ".join(FIELDS_COLUMNS)}   (0-based node indices)
  convergence.csv  {", ".join(CONVERGENCE_COLUMNS)}
  boundary.csv     {", ".join(BOUNDARY_COLUMNS)}
  timing.csv       {", ".join(TIMING_COLUMNS)}
  summary.txt      "key = value" lines
  *.svg            with --plots

exit status: 0 converged, 2 stagnated or iteration limit reached,
3 solver error (name on stderr), 64 usage error.

--config FILE reads "key = value" lines using the long option names
(e.g. "method = spm", "shock = off"); command-line flags win.
"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _grid_list(text: str) -> list[tuple[int, int]]:
    out = []
    for tok in text.replace(" ", "").split(","):
        if not tok:
            continue
        a, _, b = tok.lower().partition("x")
        try:
            n1 = int(a)
            n2 = int(b) if b else n1
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad grid {tok!r}; use N or N1xN2") from None
        out.append((n1, n2))
    if not out:
        raise argparse.ArgumentTypeError("grid list is empty")
    return out


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("list is empty")
    return vals


def _methods(text: str) -> list[str]:
    vals = [t for t in text.replace(" ", "").lower().split(",") if t]
    bad = [v for v in vals if v not in ("pm", "spm", "salm")]
    if bad or not vals:
        raise argparse.ArgumentTypeError(f"methods must be from pm, spm, salm; got {text!r}")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hypma", description="Least-squares solver for the hyperbolic Monge-Ampere "
                "equation with transport boundary condition.",
                epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config", type=Path, help="key = value file with defaults for these options")
    p.add_argument("--case", default="annulus-segment", help=f"one of: {', '.join(CASES)}")
    p.add_argument("--nx", type=int, default=21, help="nodes along x1")
    p.add_argument("--ny", type=int, default=None, help="nodes along x2 (default: --nx)")
    p.add_argument("--nb", type=int, default=10_000, help="points per target segment polyline")
    p.add_argument("--method", choices=("pm", "spm", "salm"), default="salm")
    p.add_argument("--alpha1", type=float, default=0.2)
    p.add_argument("--alpha2", type=float, default=0.005)
    p.add_argument("--shock", choices=("on", "off"), default="on", help="grid-shock correction")
    p.add_argument("--shock-start", type=int, default=100)
    p.add_argument("--shock-metric", choices=("euclidean", "chebyshev"), default="euclidean")
    p.add_argument("--max-iters", type=int, default=50_000)
    p.add_argument("--stop-tol", type=float, default=None)
    p.add_argument("--stagnation-window", type=int, default=500)
    p.add_argument("--initial-guess", choices=GUESS_VARIANTS, default=None,
                   help="bounding-box guess variant (default: the case's preferred one)")
    p.add_argument("--out", type=Path, default=Path("hypma-out"))
    p.add_argument("--plots", action="store_true", help="also write SVG plots")
    p.add_argument("--study", choices=("convergence", "boundary", "timing"), default=None)
    p.add_argument("--grids", type=_grid_list, default=None,
                   help='grid list for studies, e.g. "21,41,81" or "59x11,115x19"')
    p.add_argument("--nbs", type=_int_list, default=None,
                   help='N_b list for boundary/timing studies, e.g. "9,17,33,65,129"')
    p.add_argument("--methods", type=_methods, default=None,
                   help="boundary methods for boundary/timing studies (default: --method, or all for timing)")
    p.add_argument("--repeats", type=int, default=5, help="timed b-steps per point in the timing study")
    return p


def _config_argv(path: Path) -> list[str]:
    argv = []
    for n, line in enumerate(path.read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ValueError(f"{path}:{n}: expected key = value")
        key, val = key.strip().replace("_", "-"), val.strip()
        if key == "plots":
            if val.lower() in ("1", "true", "yes", "on"):
                argv.append("--plots")
            continue
        argv += [f"--{key}", val]
    return argv


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    pre, _ = parser.parse_known_args(argv)
    if pre.config is not None:
        try:
            argv = _config_argv(pre.config) + argv
        except (OSError, ValueError) as exc:
            parser.error(str(exc))
    return parser.parse_args(argv)


def solver_config(ns: argparse.Namespace) -> SolverConfig:
    return SolverConfig(alpha1=ns.alpha1, alpha2=ns.alpha2, method=ns.method, nb=ns.nb,
                        shock_correction=ns.shock == "on", shock_start=ns.shock_start,
                        shock_metric=ns.shock_metric, max_iters=ns.max_iters, stop_tol=ns.stop_tol,
                        stagnation_window=ns.stagnation_window, initial_guess=ns.initial_guess)


def _worst(results) -> int:
    codes = [r.exit_code for r in results]
    if EXIT_SOLVER_ERROR in codes:
        return EXIT_SOLVER_ERROR
    if EXIT_NOT_CONVERGED in codes:
        return EXIT_NOT_CONVERGED
    return EXIT_CONVERGED


def main(argv=None) -> int:
    ns = parse_args(argv)
    if ns.case not in CASES:
        print(f"hypma: error: unknown case {ns.case!r}; choose from {', '.join(CASES)}", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = solver_config(ns)
    except ValueError as exc:
        print(f"hypma: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    case = make_case(ns.case)
    nx1, nx2 = ns.nx, ns.ny if ns.ny is not None else ns.nx
    if min(nx1, nx2) < 3:
        print("hypma: error: grids need at least 3 nodes per axis", file=sys.stderr)
        return EXIT_USAGE
    out = ns.out

    if ns.study is None:
        res = run_single(case, nx1, nx2, cfg, out, ns.plots)
        if res.status == "error":
            print(res.error, file=sys.stderr)
        print(f"{case.name} {nx1}x{nx2} {cfg.method}: {res.status} after {res.iterations} iterations; "
              + ", ".join(f"{k}={v:.3e}" for k, v in res.metrics.items()))
        return res.exit_code

    if ns.study == "convergence":
        grids = ns.grids or [(21, 21), (41, 41), (81, 81)]
        if len(grids) < 2:
            print("hypma: error: a convergence study needs at least two grids", file=sys.stderr)
            return EXIT_USAGE
        results, orders = convergence_study(case, grids, cfg, out, ns.plots)
        for r in results:
            if r.status == "error":
                print(f"{r.nx1}x{r.nx2}: {r.error}", file=sys.stderr)
        print(", ".join(f"order_{k}={v:.3f}" for k, v in orders.items()))
        return _worst(results)

    if ns.study == "boundary":
        nbs = ns.nbs or [9, 17, 33, 65, 129]
        results, analysis = boundary_study(case, nx1, nx2, nbs, ns.methods or [cfg.method], cfg,
                                           out, ns.plots)
        for method, a in analysis.items():
            print(f"{method}: eps_u slope vs N_b {a['slope']:.3f}, plateau from index {a['plateau_index']}")
        return _worst(results)

    nbs = ns.nbs or [1001, 2003, 4007, 10007]
    grids = ns.grids or [(101, 101), (201, 201), (401, 401)]
    try:
        _, slopes = timing_study(case, nx1, nx2, cfg.nb, nbs, grids, ns.methods or ["pm", "spm", "salm"],
                                 ns.repeats, cfg, out, ns.plots)
    except Exception as exc:  # noqa: BLE001 - surfaced as a solver error exit
        name = getattr(exc, "name", type(exc).__name__)
        print(f"{name}: {exc}", file=sys.stderr)
        return EXIT_SOLVER_ERROR
    print(", ".join(f"{k}={v:.3f}" for k, v in slopes.items()))
    return EXIT_CONVERGED


if __name__ == "__main__":
    sys.exit(main())
