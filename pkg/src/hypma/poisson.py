"""Finite-difference Robin and Neumann Poisson systems on the grid.

Each mapping component solves

    grad(alpha) . grad(m) + alpha * lap(m) = p . grad(alpha) + alpha * div(p)   inside,
    (1 - alpha) m + alpha dm/dn = (1 - alpha) b + alpha p . n                on the boundary,

with ``p`` the matching column of ``P``.  Along every axis on which a node
has two neighbours, both sides are differenced in flux form with
``alpha`` averaged onto the half-way points; this equals the central
stencil for constant ``alpha`` and keeps all off-diagonal weights positive
when ``alpha`` jumps between neighbours.  Boundary rows keep the central
Laplacian stencil with a ghost node per outward coordinate direction; the
ghost value is eliminated through the Robin relation written with a central
normal difference.  Corners do this once per direction.  Rows are scaled
by ``alpha`` so that small boundary ``alpha`` stays well conditioned.

The reconstruction of ``u`` uses the same stencil with ``alpha = 1``
(pure Neumann data ``m . n``), projects the right-hand side onto the range
of the singular operator, and pins ``u = 0`` at node ``(0, 0)``.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import SingularSystem
from .grid import Grid, fd_derivative, fd_divergence

# (axis, side, outward sign): left, right, bottom, top
_FACES = ((0, 0, -1.0), (0, -1, 1.0), (1, 0, -1.0), (1, -1, 1.0))


def uniform_alpha(grid: Grid, alpha1: float) -> np.ndarray:
    return np.full(grid.shape, float(alpha1))


def _along(axis: int, sl: slice) -> tuple:
    out = [slice(None)] * 2
    out[axis] = sl
    return tuple(out)


def _half_alpha(alpha: np.ndarray, axis: int) -> tuple[np.ndarray, np.ndarray]:
    """Mid-point ``alpha`` above and below each node that is inner along ``axis``."""
    mid = 0.5 * (alpha[_along(axis, slice(1, None))] + alpha[_along(axis, slice(None, -1))])
    return mid[_along(axis, slice(1, None))], mid[_along(axis, slice(None, -1))]


def assemble_operator(grid: Grid, alpha: np.ndarray) -> sp.csc_matrix:
    nx1, nx2 = grid.shape
    idx = np.arange(grid.size).reshape(grid.shape)
    rows, cols, vals = [], [], []
    diag = np.zeros(grid.shape)

    def add(r, c, v):
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append(np.broadcast_to(v, r.shape).ravel())

    for axis, h in ((0, grid.h1), (1, grid.h2)):
        n = grid.shape[axis]
        inner = _along(axis, slice(1, n - 1))
        a_up, a_dn = _half_alpha(alpha, axis)
        add(idx[inner], idx[_along(axis, slice(2, n))], a_up / h ** 2)
        add(idx[inner], idx[_along(axis, slice(0, n - 2))], a_dn / h ** 2)
        diag[inner] -= (a_up + a_dn) / h ** 2
        for side, nb in ((0, 1), (n - 1, n - 2)):
            face = [slice(None)] * 2
            face[axis] = side
            nbr = [slice(None)] * 2
            nbr[axis] = nb
            a_f = alpha[tuple(face)]
            add(idx[tuple(face)], idx[tuple(nbr)], 2.0 * a_f / h ** 2)
            diag[tuple(face)] -= 2.0 * a_f / h ** 2 + 2.0 * (1.0 - a_f) / h

    add(idx, idx, diag)
    A = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(grid.size, grid.size))
    return A.tocsc()


def assemble_rhs(grid: Grid, alpha: np.ndarray, p: np.ndarray, b_field: np.ndarray) -> np.ndarray:
    """Right-hand side for one component.

    ``p`` has shape ``(2, nx1, nx2)``; ``b_field`` holds the boundary data at
    boundary nodes (interior entries are ignored).
    """
    rhs = np.zeros(grid.shape)
    for axis, h in ((0, grid.h1), (1, grid.h2)):
        q = p[axis]
        n = grid.shape[axis]
        inner = _along(axis, slice(1, n - 1))
        a_up, a_dn = _half_alpha(alpha, axis)
        rhs[inner] = rhs[inner] + (a_up * (q[inner] + q[_along(axis, slice(2, n))])
                                   - a_dn * (q[inner] + q[_along(axis, slice(0, n - 2))])) / (2.0 * h)
        for side in (0, n - 1):
            face = _along(axis, side)
            rhs[face] = rhs[face] + alpha[face] * fd_derivative(q, h, axis)[face]
    for axis, side, sign in _FACES:
        h = grid.h1 if axis == 0 else grid.h2
        face = [slice(None)] * 2
        face[axis] = side
        face = tuple(face)
        a_f = alpha[face]
        g = (1.0 - a_f) * b_field[face] + a_f * sign * p[axis][face]
        rhs[face] -= 2.0 * g / h
    return rhs


def _factor(A: sp.csc_matrix):
    try:
        lu = splu(A)
    except RuntimeError as exc:  # scipy reports exact singularity this way
        raise SingularSystem(str(exc)) from exc
    if not np.all(np.isfinite(lu.U.diagonal())) or np.any(lu.U.diagonal() == 0.0):
        raise SingularSystem("zero pivot in LU factorization")
    return lu


class RobinSystem:
    """Factorized Robin operator for a fixed ``alpha`` field."""

    def __init__(self, grid: Grid, alpha: np.ndarray):
        alpha = np.asarray(alpha, dtype=float)
        if alpha.shape != grid.shape:
            raise ValueError("alpha must be a node field")
        if not (np.all(alpha > 0.0) and np.all(alpha < 1.0)):
            raise ValueError("alpha must lie in (0, 1)")
        self.grid = grid
        self.alpha = alpha.copy()
        self.alpha.setflags(write=False)
        self.matrix = assemble_operator(grid, alpha)
        self.lu = _factor(self.matrix)

    def solve_rhs(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        flat = rhs.reshape(self.grid.size, -1)
        return self.lu.solve(flat).reshape(rhs.shape)

    def solve_mapping(self, P: np.ndarray, b_field: np.ndarray) -> np.ndarray:
        """Both mapping components; ``P`` is ``(2, 2, nx1, nx2)``, ``b_field`` ``(2, nx1, nx2)``."""
        rhs = np.stack([assemble_rhs(self.grid, self.alpha, P[r], b_field[r]) for r in range(2)],
                       axis=-1)
        sol = self.lu.solve(rhs.reshape(self.grid.size, 2))
        return np.moveaxis(sol.reshape(self.grid.shape + (2,)), -1, 0)


def boundary_field(grid: Grid, b_seq: np.ndarray) -> np.ndarray:
    """Scatter a traversal-ordered sequence ``(N, 2)`` onto a ``(2, nx1, nx2)`` field."""
    ii, jj = grid.boundary_order()
    out = np.zeros((2,) + grid.shape)
    out[:, ii, jj] = np.asarray(b_seq).T
    return out


def solve_mapping_component(system: RobinSystem, p_col: np.ndarray, b_comp: np.ndarray) -> np.ndarray:
    """One component of ``m`` from a column of ``P`` and traversal-ordered boundary data."""
    grid = system.grid
    ii, jj = grid.boundary_order()
    b_field = np.zeros(grid.shape)
    b_field[ii, jj] = b_comp
    return system.solve_rhs(assemble_rhs(grid, system.alpha, p_col, b_field))


class NeumannSystem:
    """Pinned Neumann Poisson operator used to recover ``u`` from ``m``."""

    def __init__(self, grid: Grid):
        self.grid = grid
        A = assemble_operator(grid, np.ones(grid.shape)).tolil()
        A.rows[0] = [0]
        A.data[0] = [1.0]
        self.matrix = A.tocsc()
        self.lu = _factor(self.matrix)

    def solve(self, m: np.ndarray) -> np.ndarray:
        rhs = assemble_rhs(self.grid, np.ones(self.grid.shape), m, np.zeros(self.grid.shape))
        # trapezoid weights span the left null space of the unpinned operator;
        # removing the weighted mean keeps the O(h^2) data defect from
        # concentrating at the pinned node
        w = self.grid.area_weights()
        rhs -= np.sum(w * rhs) / np.sum(w)
        rhs[0, 0] = 0.0
        return self.lu.solve(rhs.ravel()).reshape(self.grid.shape)


def compatibility_defect(grid: Grid, m: np.ndarray) -> float:
    """Trapezoid value of (integral of div m) - (boundary integral of m . n)."""
    vol = float(np.sum(grid.area_weights() * fd_divergence(grid, m)))

    def trap(v, h):
        return h * (v.sum() - 0.5 * (v[0] + v[-1]))

    flux = (trap(m[0, -1, :], grid.h2) - trap(m[0, 0, :], grid.h2)
            + trap(m[1, :, -1], grid.h1) - trap(m[1, :, 0], grid.h1))
    return vol - flux


def reconstruct_u(grid: Grid, m: np.ndarray) -> tuple[np.ndarray, float]:
    """Least-squares potential of ``m`` with ``u = 0`` at node ``(0, 0)``.

    Returns ``(u, compatibility_defect)``.
    """
    return NeumannSystem(grid).solve(m), compatibility_defect(grid, m)
