"""Point-wise projection of a Jacobian onto symmetric matrices with det = -f^2.

For a finite-difference Jacobian ``D`` and ``f > 0`` we minimise
``F_s(P) = 1/2 |P - D_s|_F^2`` over symmetric ``P`` with ``det P = -f^2``,
where ``D_s`` is the symmetric part of ``D``.  Critical points of the
Lagrangian satisfy

    p11 + lam p22 = d11,  lam p11 + p22 = d22,  (1 - lam) p12 = ds,
    p11 p22 - p12^2 = -f^2

and are enumerated in closed form for three classes of ``D_s``:
a multiple of the identity (``lam = 1``), trace-free (``lam = -1`` or
``lam = 1 +- sqrt(|det D_s|)/f``) and everything else (roots of a quartic).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyCandidates, NonHyperbolic
from .quartic import quartic_real_roots, quartic_real_roots_batch, quartic_real_roots_depressed_batch

TOL_CASE = 1e-12
TIE_TOL = 1e-14
ROOT_EXCLUDE = 1e-9
# Loose feasibility screen, relative to the size of the products in det P;
# the KKT polish tightens survivors to rounding level.
DET_SCREEN = 1e-6
KKT_STEPS = 2


class Case(enum.IntEnum):
    CASE1 = 1
    CASE2 = 2
    CASE3 = 3


@dataclass(frozen=True)
class SymMat:
    p11: float
    p22: float
    p12: float

    @property
    def det(self) -> float:
        return self.p11 * self.p22 - self.p12 * self.p12

    @property
    def trace(self) -> float:
        return self.p11 + self.p22

    def as_array(self) -> np.ndarray:
        return np.array([[self.p11, self.p12], [self.p12, self.p22]])


@dataclass(frozen=True)
class PCandidate:
    p: SymMat
    lam: float
    fs: float
    case: Case


def fs_value(p: SymMat, ds: SymMat) -> float:
    return 0.5 * ((p.p11 - ds.p11) ** 2 + 2.0 * (p.p12 - ds.p12) ** 2 + (p.p22 - ds.p22) ** 2)


def kkt_residual(p: SymMat, lam: float, ds: SymMat, f2: float) -> np.ndarray:
    return np.array([
        p.p11 + lam * p.p22 - ds.p11,
        lam * p.p11 + p.p22 - ds.p22,
        (1.0 - lam) * p.p12 - ds.p12,
        p.p11 * p.p22 - p.p12 ** 2 + f2,
    ])


def symmetrize_and_classify(D, f: float, tol_case: float = TOL_CASE) -> tuple[SymMat, Case]:
    D = np.asarray(D, dtype=float)
    d11, d22 = float(D[0, 0]), float(D[1, 1])
    ds = 0.5 * (float(D[0, 1]) + float(D[1, 0]))
    sym = SymMat(d11, d22, ds)
    return sym, _classify(d11, d22, ds, tol_case)


def _classify(d11, d22, ds, tol_case=TOL_CASE) -> Case:
    tau = tol_case * max(1.0, math.sqrt(d11 * d11 + d22 * d22 + 2.0 * ds * ds))
    if abs(d11 - d22) <= tau and abs(ds) <= tau:
        return Case.CASE1
    if abs(d11 + d22) <= tau:
        return Case.CASE2
    return Case.CASE3


def _raw_candidates(d11, d22, ds, f2, case):
    """Yield ``(p11, p22, p12, lam)`` tuples for the given case."""
    out = []
    if case == Case.CASE1:
        d = 0.5 * (d11 + d22)
        r = math.sqrt(d * d + 4.0 * f2)
        a = 0.5 * (d + math.copysign(r, d))
        b = -f2 / a
        for p11 in (a, b):
            out.append((p11, d - p11, 0.0, 1.0))
    elif case == Case.CASE2:
        d = 0.5 * (d11 - d22)
        absdet = d * d + ds * ds
        f = math.sqrt(f2)
        s = math.sqrt(absdet)
        for sign in (1.0, -1.0):
            lam = 1.0 + sign * s / f
            p11 = -sign * d * f / s
            out.append((p11, -p11, -sign * ds * f / s, lam))
        gap = absdet - 4.0 * f2
        if gap >= 0.0:
            r = math.sqrt(gap)
            for p11 in (0.5 * (d + r), 0.5 * (d - r)):
                out.append((p11, p11 - d, 0.5 * ds, -1.0))
    else:
        out = _case3_lambda(d11, d22, ds, f2)
    return out


def _case3_lambda(d11, d22, ds, f2):
    """Case-3 candidates from the multiplier quartic."""
    tr = d11 + d22
    det = d11 * d22 - ds * ds
    out = []
    for lam in quartic_real_roots(f2, 0.0, det - 2.0 * f2, 2.0 * det - tr * tr, f2 + det):
        if abs(lam - 1.0) <= ROOT_EXCLUDE or abs(lam + 1.0) <= ROOT_EXCLUDE:
            continue
        den = lam * lam - 1.0
        out.append(((lam * d22 - d11) / den, (lam * d11 - d22) / den, ds / (1.0 - lam), lam))
    return out


def _case3_eigen(d11, d22, ds, f2):
    """Case-3 critical points evaluated in the eigenbasis of ``D_s``.

    Every critical point commutes with ``D_s``, so ``P = Q diag(a, -f^2/a) Q^T``
    with ``a`` a real root of ``a^4 - s1 a^3 - s2 f^2 a - f^4`` (``s1 >= s2`` the
    eigenvalues of ``D_s``).  Mathematically the same set as the multiplier
    quartic; numerically it keeps the roots near ``lam = +-1`` that the closed
    form either divides away or loses as spurious complex pairs.
    """
    f = math.sqrt(f2)
    h = 0.5 * (d11 - d22)
    mid = 0.5 * (d11 + d22)
    rad = math.hypot(h, ds)
    s1, s2 = mid + rad, mid - rad
    th = 0.5 * math.atan2(ds, h)
    c, s = math.cos(th), math.sin(th)
    out = []
    for ah in quartic_real_roots(1.0, -s1 / f, 0.0, -s2 / f, -1.0):
        a, b = f * ah, -f / ah
        out.append((a * c * c + b * s * s, a * s * s + b * c * c, (a - b) * c * s, (s1 - a) / b))
    return out


def _passes_screen(c, f2) -> bool:
    p11, p22, p12 = c[0], c[1], c[2]
    scale = max(1.0, f2, abs(p11 * p22), p12 * p12)
    return abs(p11 * p22 - p12 * p12 + f2) <= DET_SCREEN * scale


def _kkt_polish(c, d11, d22, ds, f2):
    """Newton refinement of a critical point on the full KKT system."""
    p11, p22, p12, lam = c

    def res(p11, p22, p12, lam):
        return np.array([p11 + lam * p22 - d11, lam * p11 + p22 - d22,
                         (1.0 - lam) * p12 - ds, p11 * p22 - p12 * p12 + f2])

    r = res(p11, p22, p12, lam)
    for _ in range(KKT_STEPS):
        J = np.array([[1.0, lam, 0.0, p22], [lam, 1.0, 0.0, p11],
                      [0.0, 0.0, 1.0 - lam, -p12], [p22, p11, -2.0 * p12, 0.0]])
        try:
            step = np.linalg.solve(J, r)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(step)):
            break
        trial = (p11 - step[0], p22 - step[1], p12 - step[2], lam - step[3])
        r_new = res(*trial)
        if np.max(np.abs(r_new)) >= np.max(np.abs(r)):
            break
        (p11, p22, p12, lam), r = trial, r_new
    return float(p11), float(p22), float(p12), float(lam)


def candidate_solutions(ds: SymMat, f: float, case: Case) -> list[PCandidate]:
    """All real feasible critical points for the class ``case`` of ``ds``."""
    f2 = f * f
    d11, d22, dsv = ds.p11, ds.p22, ds.p12
    raw = _raw_candidates(d11, d22, dsv, f2, case)
    if case == Case.CASE3:
        raw += _case3_eigen(d11, d22, dsv, f2)
    out = []
    for c in raw:
        if not _passes_screen(c, f2):
            continue
        p11, p22, p12, lam = _kkt_polish(c, d11, d22, dsv, f2)
        p = SymMat(p11, p22, p12)
        out.append(PCandidate(p, lam, fs_value(p, ds), case))
    if not out:
        raise EmptyCandidates(f"no real feasible candidate for D_s={ds}, f={f}")
    return out


def _better(fs, p11, p12, best_fs, best_p11, best_p12) -> bool:
    tol = TIE_TOL * max(abs(fs), abs(best_fs))
    if fs < best_fs - tol:
        return True
    if fs > best_fs + tol:
        return False
    if p11 != best_p11:
        return p11 > best_p11
    return p12 > best_p12


def select_minimizer(cands: list[PCandidate]) -> PCandidate:
    best = cands[0]
    for c in cands[1:]:
        if _better(c.fs, c.p.p11, c.p.p12, best.fs, best.p.p11, best.p.p12):
            best = c
    return best


def minimize_fs_point(D, f: float) -> PCandidate:
    """Symmetric ``P`` with ``det P = -f^2`` closest to ``D`` in the Frobenius norm."""
    if not f > 0:
        raise NonHyperbolic(f"f must be positive, got {f}")
    ds, case = symmetrize_and_classify(D, f)
    return select_minimizer(candidate_solutions(ds, f, case))


# --- vectorized field kernel (pure numpy backend) ------------------------------------


def minimize_fs_batch(d11, d12, d21, d22, f2):
    """Vectorized :func:`minimize_fs_point` over flat arrays.

    Returns ``(p11, p22, p12, lam, fs, case, ok)``; ``ok`` is False where no
    feasible candidate was found.
    """
    d11, d12, d21, d22, f2 = (np.ascontiguousarray(a, dtype=float).ravel()
                              for a in (d11, d12, d21, d22, f2))
    n = d11.size
    ds = 0.5 * (d12 + d21)
    tau = TOL_CASE * np.maximum(1.0, np.sqrt(d11 * d11 + d22 * d22 + 2.0 * ds * ds))
    c1 = (np.abs(d11 - d22) <= tau) & (np.abs(ds) <= tau)
    c2 = ~c1 & (np.abs(d11 + d22) <= tau)
    c3 = ~c1 & ~c2
    case = np.where(c1, 1, np.where(c2, 2, 3)).astype(np.int8)

    # columns 0-3: closed-form candidates; 4-7: Case-3 eigenbasis candidates
    K = 8
    P11 = np.zeros((n, K))
    P22 = np.zeros((n, K))
    P12 = np.zeros((n, K))
    LAM = np.zeros((n, K))
    valid = np.zeros((n, K), dtype=bool)

    if c1.any():
        idx = np.nonzero(c1)[0]
        d = 0.5 * (d11[idx] + d22[idx])
        r = np.sqrt(d * d + 4.0 * f2[idx])
        a = 0.5 * (d + np.copysign(r, d))
        b = -f2[idx] / a
        for k, p11 in enumerate((a, b)):
            P11[idx, k] = p11
            P22[idx, k] = d - p11
            LAM[idx, k] = 1.0
            valid[idx, k] = True

    if c2.any():
        idx = np.nonzero(c2)[0]
        d = 0.5 * (d11[idx] - d22[idx])
        dsi = ds[idx]
        absdet = d * d + dsi * dsi
        f = np.sqrt(f2[idx])
        s = np.sqrt(absdet)
        for k, sign in enumerate((1.0, -1.0)):
            p11 = -sign * d * f / s
            P11[idx, k] = p11
            P22[idx, k] = -p11
            P12[idx, k] = -sign * dsi * f / s
            LAM[idx, k] = 1.0 + sign * s / f
            valid[idx, k] = True
        gap = absdet - 4.0 * f2[idx]
        has = gap >= 0.0
        r = np.sqrt(np.where(has, gap, 0.0))
        for k, p11 in ((2, 0.5 * (d + r)), (3, 0.5 * (d - r))):
            P11[idx, k] = p11
            P22[idx, k] = p11 - d
            P12[idx, k] = 0.5 * dsi
            LAM[idx, k] = -1.0
            valid[idx, k] = has

    if c3.any():
        idx = np.nonzero(c3)[0]
        a11, a22, asd, ff = d11[idx], d22[idx], ds[idx], f2[idx]
        tr = a11 + a22
        det = a11 * a22 - asd * asd
        roots, ok = quartic_real_roots_depressed_batch(
            (det - 2.0 * ff) / ff, (2.0 * det - tr * tr) / ff, (ff + det) / ff)
        roots, ok = roots.copy(), ok.copy()
        # each quadratic factor yields its pair in (larger-magnitude, other) order;
        # sort so the candidate order matches the scalar path
        roots = np.where(ok, roots, np.inf)
        order = np.argsort(roots, axis=1, kind="stable")
        roots = np.take_along_axis(roots, order, axis=1)
        ok = np.take_along_axis(ok, order, axis=1)
        ok &= (np.abs(roots - 1.0) > ROOT_EXCLUDE) & (np.abs(roots + 1.0) > ROOT_EXCLUDE)
        lam = np.where(ok, roots, 0.0)
        den = lam * lam - 1.0
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            P11[idx, :4] = (lam * a22[:, None] - a11[:, None]) / den
            P22[idx, :4] = (lam * a11[:, None] - a22[:, None]) / den
            P12[idx, :4] = asd[:, None] / (1.0 - lam)
        LAM[idx, :4] = lam
        valid[idx, :4] = ok
        e11, e22, e12, elam, eok = _case3_eigen_batch(a11, a22, asd, ff)
        P11[idx, 4:], P22[idx, 4:], P12[idx, 4:], LAM[idx, 4:] = e11, e22, e12, elam
        valid[idx, 4:] = eok

    ff = f2[:, None]
    valid &= _screen_batch(P11, P22, P12, ff)
    P11, P22, P12, LAM = _kkt_polish_batch(P11, P22, P12, LAM, d11[:, None], d22[:, None],
                                           ds[:, None], ff, valid)
    FS = 0.5 * ((P11 - d11[:, None]) ** 2 + 2.0 * (P12 - ds[:, None]) ** 2
                + (P22 - d22[:, None]) ** 2)

    best = np.full(n, -1)
    bfs = np.full(n, np.inf)
    b11 = np.zeros(n)
    b12 = np.zeros(n)
    for k in range(K):
        fs, p11, p12 = FS[:, k], P11[:, k], P12[:, k]
        tol = TIE_TOL * np.maximum(np.abs(fs), np.where(np.isfinite(bfs), np.abs(bfs), 0.0))
        first = valid[:, k] & (best < 0)
        lower = fs < bfs - tol
        tie = ~lower & (fs <= bfs + tol)
        tiewin = tie & ((p11 > b11) | ((p11 == b11) & (p12 > b12)))
        take = first | (valid[:, k] & (best >= 0) & (lower | tiewin))
        best = np.where(take, k, best)
        bfs = np.where(take, fs, bfs)
        b11 = np.where(take, p11, b11)
        b12 = np.where(take, p12, b12)

    ok = best >= 0
    kk = np.where(ok, best, 0)
    rows = np.arange(n)
    return (P11[rows, kk], P22[rows, kk], P12[rows, kk], LAM[rows, kk], FS[rows, kk], case, ok)


def _case3_eigen_batch(d11, d22, ds, f2):
    """Vectorized :func:`_case3_eigen`; returns four candidate columns and a validity mask."""
    f = np.sqrt(f2)
    h = 0.5 * (d11 - d22)
    mid = 0.5 * (d11 + d22)
    rad = np.hypot(h, ds)
    s1, s2 = mid + rad, mid - rad
    th = 0.5 * np.arctan2(ds, h)
    c, s = np.cos(th)[:, None], np.sin(th)[:, None]
    roots, ok = quartic_real_roots_batch(-s1 / f, np.zeros_like(f), -s2 / f, -np.ones_like(f))
    # same candidate order as the scalar path: ascending roots, unusable ones last
    roots = np.where(ok, roots, np.inf)
    order = np.argsort(roots, axis=1, kind="stable")
    roots = np.take_along_axis(roots, order, axis=1)
    ok = np.take_along_axis(ok, order, axis=1)
    ah = np.where(ok, roots, 1.0)
    a = f[:, None] * ah
    b = -f[:, None] / ah
    return (a * c * c + b * s * s, a * s * s + b * c * c, (a - b) * c * s,
            (s1[:, None] - a) / b, ok)


def _screen_batch(P11, P22, P12, f2):
    with np.errstate(invalid="ignore", over="ignore"):
        prod = P11 * P22
        sq = P12 * P12
        scale = np.maximum(np.maximum(1.0, f2), np.maximum(np.abs(prod), sq))
        return np.abs(prod - sq + f2) <= DET_SCREEN * scale


def _kkt_polish_batch(P11, P22, P12, LAM, d11, d22, ds, f2, valid):
    def res(p11, p22, p12, lam):
        return np.stack([p11 + lam * p22 - d11, lam * p11 + p22 - d22,
                         (1.0 - lam) * p12 - ds, p11 * p22 - p12 * p12 + f2], axis=-1)

    active = valid.copy()
    with np.errstate(all="ignore"):
        r = res(P11, P22, P12, LAM)
        for _ in range(KKT_STEPS):
            one = np.ones_like(P11)
            zero = np.zeros_like(P11)
            J = np.stack([
                np.stack([one, LAM, zero, P22], -1),
                np.stack([LAM, one, zero, P11], -1),
                np.stack([zero, zero, 1.0 - LAM, -P12], -1),
                np.stack([P22, P11, -2.0 * P12, zero], -1),
            ], -2)
            detJ = np.linalg.det(np.where(active[..., None, None], J, np.eye(4)))
            active &= np.isfinite(detJ) & (detJ != 0.0)
            Js = np.where(active[..., None, None], J, np.eye(4))
            rs = np.where(active[..., None], r, 0.0)
            step = np.linalg.solve(Js, rs[..., None])[..., 0]
            active &= np.all(np.isfinite(step), axis=-1)
            t11, t22, t12, tl = (np.where(active, v - step[..., i], v)
                                 for i, v in enumerate((P11, P22, P12, LAM)))
            r_new = res(t11, t22, t12, tl)
            active &= np.max(np.abs(r_new), -1) < np.max(np.abs(r), -1)
            P11 = np.where(active, t11, P11)
            P22 = np.where(active, t22, P22)
            P12 = np.where(active, t12, P12)
            LAM = np.where(active, tl, LAM)
            r = np.where(active[..., None], r_new, r)
    return P11, P22, P12, LAM
