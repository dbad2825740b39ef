"""Grid-shock detection at the boundary and the matching alpha correction."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import Grid

RADIUS = 2


def _offsets(metric: str) -> list[tuple[int, int]]:
    out = []
    for di in range(-RADIUS, RADIUS + 1):
        for dj in range(-RADIUS, RADIUS + 1):
            if di == 0 and dj == 0:
                continue
            if metric == "euclidean":
                ok = di * di + dj * dj <= RADIUS * RADIUS
            elif metric == "chebyshev":
                ok = True
            else:
                raise ValueError(f"unknown index metric {metric!r}")
            if ok:
                out.append((di, dj))
    return out


@dataclass(frozen=True)
class ShockReport:
    """Flagged boundary nodes.

    ``positions`` index the clockwise traversal; ``nodes`` are the matching
    ``(i, j)`` pairs and ``competitors`` the closest interior neighbor of each.
    """
    positions: np.ndarray
    nodes: np.ndarray
    competitors: np.ndarray
    iteration: int = -1
    mask: np.ndarray = field(repr=False, default=None)

    @property
    def count(self) -> int:
        return int(len(self.positions))

    def __bool__(self) -> bool:
        return self.count > 0


def detect_shocks(m: np.ndarray, b: np.ndarray, grid: Grid, iteration: int = -1,
                  metric: str = "euclidean") -> ShockReport:
    """Flag boundary nodes whose target ``b`` is closer to an interior neighbor's image.

    ``m`` is ``(2, nx1, nx2)``, ``b`` is ``(N, 2)`` along the traversal.
    """
    nx1, nx2 = grid.shape
    ii, jj = grid.boundary_order()
    b = np.asarray(b, dtype=float)
    own = np.hypot(m[0, ii, jj] - b[:, 0], m[1, ii, jj] - b[:, 1])
    best = np.full(len(ii), np.inf)
    best_k = np.full(len(ii), -1)
    best_l = np.full(len(ii), -1)
    for di, dj in _offsets(metric):
        k, l = ii + di, jj + dj
        ok = (k >= 1) & (k <= nx1 - 2) & (l >= 1) & (l <= nx2 - 2)
        if not ok.any():
            continue
        kc, lc = np.clip(k, 0, nx1 - 1), np.clip(l, 0, nx2 - 1)
        d = np.hypot(m[0, kc, lc] - b[:, 0], m[1, kc, lc] - b[:, 1])
        d = np.where(ok, d, np.inf)
        better = d < best
        best = np.where(better, d, best)
        best_k = np.where(better, k, best_k)
        best_l = np.where(better, l, best_l)
    mask = best < own
    pos = np.nonzero(mask)[0]
    return ShockReport(
        positions=pos,
        nodes=np.stack([ii[pos], jj[pos]], axis=1),
        competitors=np.stack([best_k[pos], best_l[pos]], axis=1),
        iteration=iteration,
        mask=mask,
    )


def corrected_alpha(report: ShockReport, grid: Grid, alpha1: float = 0.2,
                    alpha2: float = 0.005) -> np.ndarray:
    """Node field: ``alpha2`` at flagged boundary nodes, ``alpha1`` everywhere else."""
    if not 0.0 < alpha2 < alpha1 < 1.0:
        raise ValueError("need 0 < alpha2 < alpha1 < 1")
    alpha = np.full(grid.shape, float(alpha1))
    if report.count:
        alpha[report.nodes[:, 0], report.nodes[:, 1]] = alpha2
    return alpha
