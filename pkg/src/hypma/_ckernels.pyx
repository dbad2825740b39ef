# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: per-node P-minimization, polyline projection, arc-length lookup, SALM b-step.

Each routine mirrors the numpy implementation in ``_pykernels`` step for step.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, copysign, cos, sin, acos, atan2, hypot, cbrt, INFINITY

cnp.import_array()

cdef double TOL_CASE = 1e-12
cdef double TIE_TOL = 1e-14
cdef double ROOT_EXCLUDE = 1e-9
cdef double DET_SCREEN = 1e-6
cdef double IMAG_TOL = 1e-9
cdef int NEWTON_STEPS = 5
cdef int KKT_STEPS = 2


cdef inline double _max(double a, double b) nogil:
    return a if a > b else b


cdef double _largest_cubic_root(double a, double b, double c) nogil:
    cdef double P = b - a * a / 3.0
    cdef double Q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c
    cdef double disc = 0.25 * Q * Q + P * P * P / 27.0
    cdef double rho, arg, t, sq, y, fy, dfy, y_new
    cdef int it
    if disc <= 0.0 and P < 0.0:
        rho = sqrt(-P / 3.0)
        arg = -0.5 * Q / rho / rho / rho if rho > 0.0 else 0.0
        if arg > 1.0:
            arg = 1.0
        elif arg < -1.0:
            arg = -1.0
        t = 2.0 * rho * cos(acos(arg) / 3.0)
    else:
        sq = sqrt(_max(disc, 0.0))
        t = cbrt(-0.5 * Q + sq) + cbrt(-0.5 * Q - sq)
    y = t - a / 3.0
    for it in range(3):
        fy = ((y + a) * y + b) * y + c
        dfy = (3.0 * y + 2.0 * a) * y + b
        if dfy == 0.0:
            break
        y_new = y - fy / dfy
        if fabs(((y_new + a) * y_new + b) * y_new + c) >= fabs(fy):
            break
        y = y_new
    return y


cdef int _quadratic(double B, double C, double* out) nogil:
    cdef double disc = B * B - 4.0 * C
    cdef double sq, x1, re
    if disc >= 0.0:
        sq = sqrt(disc)
        x1 = -0.5 * (B + copysign(sq, B))
        out[0] = x1
        out[1] = C / x1 if x1 != 0.0 else -B - x1
        return 2
    re = -0.5 * B
    if 0.5 * sqrt(-disc) <= IMAG_TOL * _max(1.0, fabs(re)):
        out[0] = re
        out[1] = re
        return 2
    return 0


cdef inline double _p4(double x, double p, double q, double r) nogil:
    return ((x * x + p) * x + q) * x + r


cdef int _depressed_quartic(double p, double q, double r, double* roots) nogil:
    """Real roots of x^4 + p x^2 + q x + r, sorted ascending; returns count."""
    cdef double y = _largest_cubic_root(-0.5 * p, -r, 0.5 * p * r - 0.125 * q * q)
    cdef double s = sqrt(_max(2.0 * y - p, 0.0))
    cdef double w = copysign(sqrt(_max(y * y - r, 0.0)), q)
    cdef int n = 0, k, it, i, j
    cdef double x, fx, dfx, x_new, tmp
    n += _quadratic(-s, y + w, roots)
    n += _quadratic(s, y - w, roots + n)
    for k in range(n):
        x = roots[k]
        for it in range(NEWTON_STEPS):
            fx = _p4(x, p, q, r)
            dfx = (4.0 * x * x + 2.0 * p) * x + q
            if fx == 0.0 or dfx == 0.0:
                break
            x_new = x - fx / dfx
            if fabs(_p4(x_new, p, q, r)) >= fabs(fx):
                break
            x = x_new
        roots[k] = x
    for i in range(1, n):
        tmp = roots[i]
        j = i - 1
        while j >= 0 and roots[j] > tmp:
            roots[j + 1] = roots[j]
            j -= 1
        roots[j + 1] = tmp
    return n


cdef int _quartic_monic(double a3, double a2, double a1, double a0, double* roots) nogil:
    """Real roots of x^4 + a3 x^3 + a2 x^2 + a1 x + a0, polished on these coefficients."""
    cdef double shift = -0.25 * a3
    cdef double p = a2 - 0.375 * a3 * a3
    cdef double q = a1 - 0.5 * a3 * a2 + 0.125 * a3 * a3 * a3
    cdef double r = a0 - 0.25 * a3 * a1 + a3 * a3 * a2 / 16.0 - 3.0 * a3 * a3 * a3 * a3 / 256.0
    cdef double y = _largest_cubic_root(-0.5 * p, -r, 0.5 * p * r - 0.125 * q * q)
    cdef double s = sqrt(_max(2.0 * y - p, 0.0))
    cdef double w = copysign(sqrt(_max(y * y - r, 0.0)), q)
    cdef int n = 0, k, it, i, j
    cdef double x, fx, dfx, x_new, tmp
    n += _quadratic(-s, y + w, roots)
    n += _quadratic(s, y - w, roots + n)
    for k in range(n):
        x = roots[k] + shift
        for it in range(NEWTON_STEPS):
            fx = (((x + a3) * x + a2) * x + a1) * x + a0
            if fx == 0.0:
                break
            dfx = ((4.0 * x + 3.0 * a3) * x + 2.0 * a2) * x + a1
            if dfx == 0.0:
                break
            x_new = x - fx / dfx
            if fabs((((x_new + a3) * x_new + a2) * x_new + a1) * x_new + a0) >= fabs(fx):
                break
            x = x_new
        roots[k] = x
    for i in range(1, n):
        tmp = roots[i]
        j = i - 1
        while j >= 0 and roots[j] > tmp:
            roots[j + 1] = roots[j]
            j -= 1
        roots[j + 1] = tmp
    return n


cdef inline bint _passes_screen(double* c, double f2) nogil:
    cdef double prod = c[0] * c[1], sq = c[2] * c[2]
    cdef double scale = _max(_max(1.0, f2), _max(fabs(prod), sq))
    return fabs(prod - sq + f2) <= DET_SCREEN * scale


cdef int _eigen_candidates(double d11, double d22, double ds, double f2, double* C) nogil:
    cdef double f = sqrt(f2)
    cdef double h = 0.5 * (d11 - d22), mid = 0.5 * (d11 + d22)
    cdef double rad = hypot(h, ds)
    cdef double s1 = mid + rad, s2 = mid - rad
    cdef double th = 0.5 * atan2(ds, h)
    cdef double c = cos(th), s = sin(th), a, b
    cdef double roots[4]
    cdef int nr = _quartic_monic(-s1 / f, 0.0, -s2 / f, -1.0, roots), k
    for k in range(nr):
        a = f * roots[k]
        b = -f / roots[k]
        C[4 * k] = a * c * c + b * s * s
        C[4 * k + 1] = a * s * s + b * c * c
        C[4 * k + 2] = (a - b) * c * s
        C[4 * k + 3] = (s1 - a) / b
    return nr


cdef double _kkt_res(double* v, double d11, double d22, double ds, double f2, double* r) nogil:
    r[0] = v[0] + v[3] * v[1] - d11
    r[1] = v[3] * v[0] + v[1] - d22
    r[2] = (1.0 - v[3]) * v[2] - ds
    r[3] = v[0] * v[1] - v[2] * v[2] + f2
    return _max(_max(fabs(r[0]), fabs(r[1])), _max(fabs(r[2]), fabs(r[3])))


cdef bint _solve4(double* A, double* b) nogil:
    """In-place Gaussian elimination with partial pivoting on a 4x4 row-major A."""
    cdef int i, j, k, piv
    cdef double m, t
    for k in range(4):
        piv = k
        for i in range(k + 1, 4):
            if fabs(A[i * 4 + k]) > fabs(A[piv * 4 + k]):
                piv = i
        if A[piv * 4 + k] == 0.0:
            return False
        if piv != k:
            for j in range(4):
                t = A[k * 4 + j]
                A[k * 4 + j] = A[piv * 4 + j]
                A[piv * 4 + j] = t
            t = b[k]
            b[k] = b[piv]
            b[piv] = t
        for i in range(k + 1, 4):
            m = A[i * 4 + k] / A[k * 4 + k]
            for j in range(k, 4):
                A[i * 4 + j] -= m * A[k * 4 + j]
            b[i] -= m * b[k]
    for k in range(3, -1, -1):
        t = b[k]
        for j in range(k + 1, 4):
            t -= A[k * 4 + j] * b[j]
        b[k] = t / A[k * 4 + k]
    for k in range(4):
        if not (fabs(b[k]) < INFINITY):
            return False
    return True


cdef void _kkt_polish(double* v, double d11, double d22, double ds, double f2) nogil:
    cdef double r[4]
    cdef double rn[4]
    cdef double A[16]
    cdef double t[4]
    cdef double res = _kkt_res(v, d11, d22, ds, f2, r), res_new
    cdef int it, i
    for it in range(KKT_STEPS):
        A[0] = 1.0; A[1] = v[3]; A[2] = 0.0; A[3] = v[1]
        A[4] = v[3]; A[5] = 1.0; A[6] = 0.0; A[7] = v[0]
        A[8] = 0.0; A[9] = 0.0; A[10] = 1.0 - v[3]; A[11] = -v[2]
        A[12] = v[1]; A[13] = v[0]; A[14] = -2.0 * v[2]; A[15] = 0.0
        for i in range(4):
            rn[i] = r[i]
        if not _solve4(A, rn):
            break
        for i in range(4):
            t[i] = v[i] - rn[i]
        res_new = _kkt_res(t, d11, d22, ds, f2, rn)
        if res_new >= res:
            break
        for i in range(4):
            v[i] = t[i]
            r[i] = rn[i]
        res = res_new


cdef int _candidates(double d11, double d22, double ds, double f2, int case, double* C) nogil:
    """Fill C (rows of p11, p22, p12, lam) and return the candidate count."""
    cdef int n = 0, k, nr
    cdef double d, r, a, s, f, absdet, gap, sign, lam, den, tr, det
    cdef double roots[4]
    if case == 1:
        d = 0.5 * (d11 + d22)
        r = sqrt(d * d + 4.0 * f2)
        a = 0.5 * (d + copysign(r, d))
        C[0] = a; C[1] = d - a; C[2] = 0.0; C[3] = 1.0
        C[4] = -f2 / a; C[5] = d - C[4]; C[6] = 0.0; C[7] = 1.0
        n = 2
    elif case == 2:
        d = 0.5 * (d11 - d22)
        absdet = d * d + ds * ds
        f = sqrt(f2)
        s = sqrt(absdet)
        for k in range(2):
            sign = 1.0 if k == 0 else -1.0
            C[4 * n] = -sign * d * f / s
            C[4 * n + 1] = -C[4 * n]
            C[4 * n + 2] = -sign * ds * f / s
            C[4 * n + 3] = 1.0 + sign * s / f
            n += 1
        gap = absdet - 4.0 * f2
        if gap >= 0.0:
            r = sqrt(gap)
            for k in range(2):
                sign = 1.0 if k == 0 else -1.0
                C[4 * n] = 0.5 * (d + sign * r)
                C[4 * n + 1] = C[4 * n] - d
                C[4 * n + 2] = 0.5 * ds
                C[4 * n + 3] = -1.0
                n += 1
    else:
        tr = d11 + d22
        det = d11 * d22 - ds * ds
        nr = _depressed_quartic((det - 2.0 * f2) / f2, (2.0 * det - tr * tr) / f2,
                                (f2 + det) / f2, roots)
        for k in range(nr):
            lam = roots[k]
            if fabs(lam - 1.0) <= ROOT_EXCLUDE or fabs(lam + 1.0) <= ROOT_EXCLUDE:
                continue
            den = lam * lam - 1.0
            C[4 * n] = (lam * d22 - d11) / den
            C[4 * n + 1] = (lam * d11 - d22) / den
            C[4 * n + 2] = ds / (1.0 - lam)
            C[4 * n + 3] = lam
            n += 1
        # same critical points in the eigenbasis of D_s: keeps roots near +-1
        n += _eigen_candidates(d11, d22, ds, f2, &C[4 * n])
    return n


def minimize_fs_field(const double[::1] d11, const double[::1] d12, const double[::1] d21, const double[::1] d22,
                      const double[::1] f2):
    """Per-node P-minimization; returns (p11, p22, p12, lam, fs, case, ok)."""
    cdef Py_ssize_t n = d11.shape[0], i
    out = np.empty((5, n))
    case_arr = np.empty(n, dtype=np.int8)
    ok_arr = np.empty(n, dtype=np.bool_)
    cdef double[:, ::1] o = out
    cdef signed char[::1] cs = case_arr
    cdef cnp.npy_bool[::1] okv = ok_arr
    cdef double a11, a22, ads, ff, tau, fs, best_fs, tol
    cdef double C[32]
    cdef int case, nc, k, best
    with nogil:
        for i in range(n):
            a11 = d11[i]
            a22 = d22[i]
            ads = 0.5 * (d12[i] + d21[i])
            ff = f2[i]
            tau = TOL_CASE * _max(1.0, sqrt(a11 * a11 + a22 * a22 + 2.0 * ads * ads))
            if fabs(a11 - a22) <= tau and fabs(ads) <= tau:
                case = 1
            elif fabs(a11 + a22) <= tau:
                case = 2
            else:
                case = 3
            cs[i] = case
            nc = _candidates(a11, a22, ads, ff, case, C)
            best = -1
            best_fs = INFINITY
            for k in range(nc):
                if not _passes_screen(&C[4 * k], ff):
                    continue
                _kkt_polish(&C[4 * k], a11, a22, ads, ff)
                fs = 0.5 * ((C[4 * k] - a11) ** 2 + 2.0 * (C[4 * k + 2] - ads) ** 2
                            + (C[4 * k + 1] - a22) ** 2)
                if best < 0:
                    best = k
                    best_fs = fs
                    continue
                tol = TIE_TOL * _max(fabs(fs), fabs(best_fs))
                if fs < best_fs - tol or (fs <= best_fs + tol and (
                        C[4 * k] > C[4 * best] or
                        (C[4 * k] == C[4 * best] and C[4 * k + 2] > C[4 * best + 2]))):
                    best = k
                    best_fs = fs
            if best < 0:
                okv[i] = False
                for k in range(5):
                    o[k, i] = 0.0
            else:
                okv[i] = True
                o[0, i] = C[4 * best]
                o[1, i] = C[4 * best + 1]
                o[2, i] = C[4 * best + 2]
                o[3, i] = C[4 * best + 3]
                o[4, i] = best_fs
    return out[0], out[1], out[2], out[3], out[4], case_arr, ok_arr


def project_polyline(const double[:, ::1] m, const double[:, ::1] y, bint closed):
    """Closest point on the polyline ``y`` for every query row of ``m``.

    Returns ``(b, dist2, edge)``; zero-length edges are skipped.
    """
    cdef Py_ssize_t nq = m.shape[0], nb = y.shape[0], ne, q, e, e1
    ne = nb if closed else nb - 1
    b_arr = np.empty((nq, 2))
    d_arr = np.empty(nq)
    e_arr = np.empty(nq, dtype=np.intp)
    cdef double[:, ::1] b = b_arr
    cdef double[::1] dist = d_arr
    cdef Py_ssize_t[::1] edge = e_arr
    cdef double mx, my, ax, ay, ex, ey, L2, t, px, py, d2, best, bx, by
    cdef Py_ssize_t be
    with nogil:
        for q in range(nq):
            mx = m[q, 0]
            my = m[q, 1]
            best = INFINITY
            bx = y[0, 0]
            by = y[0, 1]
            be = 0
            for e in range(ne):
                e1 = e + 1 if e + 1 < nb else 0
                ax = y[e, 0]
                ay = y[e, 1]
                ex = y[e1, 0] - ax
                ey = y[e1, 1] - ay
                L2 = ex * ex + ey * ey
                if L2 == 0.0:
                    continue
                t = ((mx - ax) * ex + (my - ay) * ey) / L2
                if t < 0.0:
                    t = 0.0
                elif t > 1.0:
                    t = 1.0
                px = ax + t * ex
                py = ay + t * ey
                d2 = (px - mx) * (px - mx) + (py - my) * (py - my)
                if d2 < best:
                    best = d2
                    bx = px
                    by = py
                    be = e
            b[q, 0] = bx
            b[q, 1] = by
            dist[q] = best
            edge[q] = be
    return b_arr, d_arr, e_arr


def interp_arclength(const double[::1] t, const double[:, ::1] y, const double[::1] s):
    """Piecewise-linear point at cumulative arc length ``s`` along the polyline."""
    cdef Py_ssize_t nb = t.shape[0], nq = s.shape[0], q, lo, hi, mid
    out = np.empty((nq, 2))
    cdef double[:, ::1] b = out
    cdef double sv, w, dt
    with nogil:
        for q in range(nq):
            sv = s[q]
            if sv <= t[0]:
                b[q, 0] = y[0, 0]
                b[q, 1] = y[0, 1]
                continue
            if sv >= t[nb - 1]:
                b[q, 0] = y[nb - 1, 0]
                b[q, 1] = y[nb - 1, 1]
                continue
            # largest lo with t[lo] <= sv
            lo = 0
            hi = nb - 1
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if t[mid] <= sv:
                    lo = mid
                else:
                    hi = mid
            dt = t[lo + 1] - t[lo]
            w = (sv - t[lo]) / dt if dt > 0.0 else 0.0
            b[q, 0] = y[lo, 0] + w * (y[lo + 1, 0] - y[lo, 0])
            b[q, 1] = y[lo, 1] + w * (y[lo + 1, 1] - y[lo, 1])
    return out


def salm_boundary(const double[:, ::1] m_b, const cnp.int64_t[::1] pos, const cnp.int64_t[::1] offsets,
                  const double[:, ::1] T, const double[:, :, ::1] Y):
    """SALM b-step for all segments at once.

    Segment ``k`` owns traversal positions ``pos[offsets[k]:offsets[k+1]]``;
    later segments overwrite shared corners.  Returns ``(b, k)`` with ``k``
    the first segment whose images collapsed to a point, or -1.
    """
    cdef Py_ssize_t nseg = offsets.shape[0] - 1, nb = T.shape[1]
    cdef Py_ssize_t k, q, a, e, n, lo, hi, mid, p
    out = np.empty((m_b.shape[0], 2))
    cdef double[:, ::1] b = out
    cdef double dx, dy, total, scale, sv, w, dt, L
    cdef int bad = -1
    cum_arr = np.empty(m_b.shape[0] + 1)
    cdef double[::1] cum = cum_arr
    with nogil:
        for k in range(nseg):
            a = offsets[k]
            e = offsets[k + 1]
            n = e - a
            cum[0] = 0.0
            for q in range(1, n):
                dx = m_b[pos[a + q], 0] - m_b[pos[a + q - 1], 0]
                dy = m_b[pos[a + q], 1] - m_b[pos[a + q - 1], 1]
                cum[q] = cum[q - 1] + sqrt(dx * dx + dy * dy)
            total = cum[n - 1]
            if not total > 0.0:
                bad = <int>k
                break
            L = T[k, nb - 1]
            scale = L / total
            for q in range(n):
                p = pos[a + q]
                sv = L if q == n - 1 else cum[q] * scale
                if sv <= T[k, 0]:
                    b[p, 0] = Y[k, 0, 0]
                    b[p, 1] = Y[k, 0, 1]
                    continue
                if sv >= L:
                    b[p, 0] = Y[k, nb - 1, 0]
                    b[p, 1] = Y[k, nb - 1, 1]
                    continue
                lo = 0
                hi = nb - 1
                while hi - lo > 1:
                    mid = (lo + hi) // 2
                    if T[k, mid] <= sv:
                        lo = mid
                    else:
                        hi = mid
                dt = T[k, lo + 1] - T[k, lo]
                w = (sv - T[k, lo]) / dt if dt > 0.0 else 0.0
                b[p, 0] = Y[k, lo, 0] + w * (Y[k, lo + 1, 0] - Y[k, lo, 0])
                b[p, 1] = Y[k, lo, 1] + w * (Y[k, lo + 1, 1] - Y[k, lo, 1])
    return out, bad
