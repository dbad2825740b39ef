"""Compare the compiled and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeats 5]

Prints the median wall time per call for each kernel and backend, and the
largest difference between the backends' outputs.
"""
import argparse
import statistics
import time

import numpy as np

from hypma.kernels import get_backend


def _time(fn, repeats):
    fn()
    out = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return statistics.median(out)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--nodes", type=int, default=101 * 101, help="P-minimization problem size")
    ap.add_argument("--nb", type=int, default=10007, help="polyline points")
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    D = [np.ascontiguousarray(rng.uniform(-3, 3, args.nodes)) for _ in range(4)]
    f2 = np.ascontiguousarray(rng.uniform(0.01, 9.0, args.nodes))
    s = np.linspace(0.0, 2 * np.pi, 4 * args.nb, endpoint=False)
    poly = np.ascontiguousarray(np.stack([np.cos(s), 0.5 * np.sin(s)], axis=1))
    pts = np.ascontiguousarray(rng.normal(size=(400, 2)))
    seg = poly[: args.nb]
    t = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(seg, axis=0), axis=1))])
    q = np.ascontiguousarray(np.sort(rng.uniform(0, t[-1], 400)))
    # four quarter-ellipse segments and 400 noisy boundary images, 101 per segment
    T = np.ascontiguousarray(np.stack([t] * 4))
    Y = np.ascontiguousarray(np.stack([poly[k * args.nb:(k + 1) * args.nb] for k in range(4)]))
    ang = np.linspace(0.0, 2 * np.pi, 400, endpoint=False)
    mb = np.ascontiguousarray(np.stack([np.cos(ang), 0.5 * np.sin(ang)], axis=1) + rng.normal(0, 1e-3, (400, 2)))
    pos = np.concatenate([(100 * k + np.arange(101)) % 400 for k in range(4)]).astype(np.int64)
    offs = np.arange(0, 405, 101, dtype=np.int64)

    try:
        backends = {"cython": get_backend("cython"), "python": get_backend("python")}
    except ImportError:
        backends = {"python": get_backend("python")}
        print("compiled extension unavailable; timing the numpy backend only")

    cases = {
        f"minimize_fs_field ({args.nodes} nodes)": lambda k: k.minimize_fs_field(*D, f2),
        f"project_polyline (400 pts, closed {4 * args.nb})": lambda k: k.project_polyline(pts, poly, True),
        f"interp_arclength (400 pts, {args.nb})": lambda k: k.interp_arclength(t, seg, q),
        f"salm_boundary (400 images, 4 x {args.nb})": lambda k: k.salm_boundary(mb, pos, offs, T, Y),
    }
    print(f"{'kernel':48s} " + " ".join(f"{b:>12s}" for b in backends) + "   speedup   max|diff|")
    for label, call in cases.items():
        times = {b: _time(lambda k=k: call(k), args.repeats) for b, k in backends.items()}
        if len(backends) == 2:
            a, b = (call(k) for k in backends.values())
            a = a if isinstance(a, tuple) else (a,)
            b = b if isinstance(b, tuple) else (b,)
            diff = max(float(np.max(np.abs(np.asarray(x, float) - np.asarray(y, float))))
                       for x, y in zip(a, b))
            speed = f"{times['python'] / times['cython']:8.1f}x   {diff:.2e}"
        else:
            speed = ""
        print(f"{label:48s} " + " ".join(f"{v * 1e3:10.2f}ms" for v in times.values()) + f"  {speed}")


if __name__ == "__main__":
    main()
