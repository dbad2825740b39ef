"""Tensor-product grids, finite-difference derivatives and boundary indexing.

Fields are stored as numpy arrays indexed ``[i, j]`` with ``i`` along x1 and
``j`` along x2.  A vector field has shape ``(2, nx1, nx2)`` and a matrix field
``(2, 2, nx1, nx2)`` where ``D[r, c]`` is the derivative of component ``r``
with respect to coordinate ``c``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridError

# Source segments in clockwise order: left, top, right, bottom.
SEGMENT_NAMES = ("left", "top", "right", "bottom")


@dataclass(frozen=True)
class Grid:
    x1m: float
    x1M: float
    x2m: float
    x2M: float
    nx1: int
    nx2: int
    h1: float = field(init=False)
    h2: float = field(init=False)

    def __post_init__(self):
        if self.nx1 < 3 or self.nx2 < 3:
            raise GridError(f"need at least 3 nodes per axis, got {self.nx1}x{self.nx2}")
        if not (self.x1M > self.x1m and self.x2M > self.x2m):
            raise GridError("domain bounds must satisfy x1M > x1m and x2M > x2m")
        object.__setattr__(self, "h1", (self.x1M - self.x1m) / (self.nx1 - 1))
        object.__setattr__(self, "h2", (self.x2M - self.x2m) / (self.nx2 - 1))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx1, self.nx2)

    @property
    def size(self) -> int:
        return self.nx1 * self.nx2

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        return (self.x1m, self.x1M, self.x2m, self.x2M)

    @property
    def x1(self) -> np.ndarray:
        return self.x1m + np.arange(self.nx1) * self.h1

    @property
    def x2(self) -> np.ndarray:
        return self.x2m + np.arange(self.nx2) * self.h2

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Node coordinates as two ``(nx1, nx2)`` arrays."""
        return np.meshgrid(self.x1, self.x2, indexing="ij")

    @property
    def n_boundary(self) -> int:
        return 2 * (self.nx1 + self.nx2) - 4

    def segment_indices(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Node indices ``(i, j)`` of the four source segments.

        Each segment is listed in traversal order and includes both of its
        corner endpoints, so neighbouring segments share one node.
        """
        nx1, nx2 = self.nx1, self.nx2
        jj = np.arange(nx2)
        ii = np.arange(nx1)
        left = (np.zeros(nx2, dtype=np.intp), jj)
        top = (ii, np.full(nx1, nx2 - 1, dtype=np.intp))
        right = (np.full(nx2, nx1 - 1, dtype=np.intp), jj[::-1].copy())
        bottom = (ii[::-1].copy(), np.zeros(nx1, dtype=np.intp))
        return [left, top, right, bottom]

    def boundary_order(self) -> tuple[np.ndarray, np.ndarray]:
        """Clockwise traversal of the boundary starting at node ``(0, 0)``."""
        segs = self.segment_indices()
        ii = np.concatenate([s[0][:-1] for s in segs])
        jj = np.concatenate([s[1][:-1] for s in segs])
        return ii, jj

    def segment_slices(self) -> list[np.ndarray]:
        """Positions of each segment's nodes inside the boundary traversal.

        The last segment wraps around to position 0 for its closing corner.
        """
        nx1, nx2 = self.nx1, self.nx2
        n = self.n_boundary
        starts = [0, nx2 - 1, nx2 + nx1 - 2, 2 * nx2 + nx1 - 3]
        lengths = [nx2, nx1, nx2, nx1]
        return [(s + np.arange(k)) % n for s, k in zip(starts, lengths)]

    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        mask[0, :] = mask[-1, :] = mask[:, 0] = mask[:, -1] = True
        return mask

    def boundary_normals(self) -> np.ndarray:
        """Outward unit normal per traversal position; corners get the diagonal."""
        ii, jj = self.boundary_order()
        n = np.zeros((self.n_boundary, 2))
        n[ii == 0, 0] = -1.0
        n[ii == self.nx1 - 1, 0] = 1.0
        n[jj == 0, 1] = -1.0
        n[jj == self.nx2 - 1, 1] = 1.0
        return n / np.linalg.norm(n, axis=1, keepdims=True)

    def boundary_weights(self) -> np.ndarray:
        """Composite trapezoid weights for a closed line integral over the traversal."""
        ii, jj = self.boundary_order()
        pts = np.stack([self.x1m + ii * self.h1, self.x2m + jj * self.h2], axis=1)
        seg = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
        return 0.5 * (seg + np.roll(seg, 1))

    def area_weights(self) -> np.ndarray:
        """Tensor-product trapezoid weights (corner 1/4, edge 1/2, interior 1) times h1*h2."""
        w1 = np.ones(self.nx1)
        w1[[0, -1]] = 0.5
        w2 = np.ones(self.nx2)
        w2[[0, -1]] = 0.5
        return np.outer(w1, w2) * self.h1 * self.h2


def build_grid(bounds, nx1: int, nx2: int) -> Grid:
    """Grid over ``bounds = (x1m, x1M, x2m, x2M)`` with node counts including endpoints."""
    x1m, x1M, x2m, x2M = (float(b) for b in bounds)
    return Grid(x1m, x1M, x2m, x2M, int(nx1), int(nx2))


def fd_derivative(f: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Central differences inside, second-order one-sided differences on the edges."""
    return np.gradient(f, h, axis=axis, edge_order=2)


def fd_jacobian(grid: Grid, m: np.ndarray) -> np.ndarray:
    """Finite-difference Jacobian of a vector field, shape ``(2, 2, nx1, nx2)``."""
    D = np.empty((2, 2) + grid.shape)
    for r in range(2):
        D[r, 0] = fd_derivative(m[r], grid.h1, 0)
        D[r, 1] = fd_derivative(m[r], grid.h2, 1)
    return D


def fd_divergence(grid: Grid, p: np.ndarray) -> np.ndarray:
    """Divergence of a vector field ``p`` of shape ``(2, nx1, nx2)``."""
    return fd_derivative(p[0], grid.h1, 0) + fd_derivative(p[1], grid.h2, 1)


def boundary_values(grid: Grid, field: np.ndarray) -> np.ndarray:
    """Values on the clockwise boundary traversal.

    Scalar fields give shape ``(N,)``; vector fields ``(2, nx1, nx2)`` give ``(N, 2)``.
    """
    ii, jj = grid.boundary_order()
    if field.ndim == 2:
        return field[ii, jj].copy()
    return np.moveaxis(field[..., ii, jj], 0, -1).copy()
