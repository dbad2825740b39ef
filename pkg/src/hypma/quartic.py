"""Real roots of quartic polynomials by Ferrari's method with Newton polishing."""
from __future__ import annotations

import math

import numpy as np

IMAG_TOL = 1e-9
NEWTON_STEPS = 5


def _largest_cubic_root(a: float, b: float, c: float) -> float:
    """Largest real root of y^3 + a y^2 + b y + c."""
    P = b - a * a / 3.0
    Q = 2.0 * a ** 3 / 27.0 - a * b / 3.0 + c
    disc = 0.25 * Q * Q + P ** 3 / 27.0
    if disc <= 0.0 and P < 0.0:
        rho = math.sqrt(-P / 3.0)
        # divide step by step: rho**3 underflows for subnormal P
        arg = max(-1.0, min(1.0, -0.5 * Q / rho / rho / rho)) if rho > 0.0 else 0.0
        t = 2.0 * rho * math.cos(math.acos(arg) / 3.0)
    else:
        sq = math.sqrt(max(disc, 0.0))
        t = math.copysign(abs(-0.5 * Q + sq) ** (1.0 / 3.0), -0.5 * Q + sq) \
            + math.copysign(abs(-0.5 * Q - sq) ** (1.0 / 3.0), -0.5 * Q - sq)
    y = t - a / 3.0
    for _ in range(3):
        fy = ((y + a) * y + b) * y + c
        dfy = (3.0 * y + 2.0 * a) * y + b
        if dfy == 0.0:
            break
        step = fy / dfy
        y_new = y - step
        if abs(((y_new + a) * y_new + b) * y_new + c) >= abs(fy):
            break
        y = y_new
    return y


def _quadratic_real(B: float, C: float, out: list[float]) -> None:
    """Append real roots of x^2 + B x + C, accepting tiny imaginary parts as real."""
    disc = B * B - 4.0 * C
    if disc >= 0.0:
        sq = math.sqrt(disc)
        x1 = -0.5 * (B + math.copysign(sq, B))
        x2 = C / x1 if x1 != 0.0 else -B - x1
        out.extend((x1, x2))
    else:
        re = -0.5 * B
        if 0.5 * math.sqrt(-disc) <= IMAG_TOL * max(1.0, abs(re)):
            out.extend((re, re))


def _polish(coeffs: tuple[float, ...], x: float) -> float:
    c4, c3, c2, c1, c0 = coeffs
    for _ in range(NEWTON_STEPS):
        fx = (((c4 * x + c3) * x + c2) * x + c1) * x + c0
        if fx == 0.0:
            break
        dfx = ((4.0 * c4 * x + 3.0 * c3) * x + 2.0 * c2) * x + c1
        if dfx == 0.0:
            break
        x_new = x - fx / dfx
        if abs((((c4 * x_new + c3) * x_new + c2) * x_new + c1) * x_new + c0) >= abs(fx):
            break
        x = x_new
    return x


def quartic_real_roots(c4: float, c3: float, c2: float, c1: float, c0: float) -> list[float]:
    """Sorted real roots (with multiplicity) of c4 x^4 + c3 x^3 + c2 x^2 + c1 x + c0."""
    if c4 == 0.0:
        raise ValueError("leading coefficient must be nonzero")
    a3, a2, a1, a0 = c3 / c4, c2 / c4, c1 / c4, c0 / c4
    shift = -0.25 * a3
    # depressed quartic x^4 + p x^2 + q x + r with lambda = x + shift
    p = a2 - 0.375 * a3 * a3
    q = a1 - 0.5 * a3 * a2 + 0.125 * a3 ** 3
    r = a0 - 0.25 * a3 * a1 + a3 * a3 * a2 / 16.0 - 3.0 * a3 ** 4 / 256.0
    y = _largest_cubic_root(-0.5 * p, -r, 0.5 * p * r - 0.125 * q * q)
    s = math.sqrt(max(2.0 * y - p, 0.0))
    w = math.copysign(math.sqrt(max(y * y - r, 0.0)), q)
    roots: list[float] = []
    _quadratic_real(-s, y + w, roots)
    _quadratic_real(s, y - w, roots)
    coeffs = (c4, c3, c2, c1, c0)
    return sorted(_polish(coeffs, x + shift) for x in roots)


def _vquadratic(B, C):
    disc = B * B - 4.0 * C
    real = disc >= 0.0
    sq = np.sqrt(np.abs(disc))
    x1 = -0.5 * (B + np.copysign(sq, B))
    safe = np.where(x1 != 0.0, x1, 1.0)
    x2 = np.where(x1 != 0.0, C / safe, -B - x1)
    re = -0.5 * B
    near = ~real & (0.5 * sq <= IMAG_TOL * np.maximum(1.0, np.abs(re)))
    r1 = np.where(real, x1, re)
    r2 = np.where(real, x2, re)
    ok = real | near
    return r1, r2, ok


def _ferrari_batch(p, q, r):
    """Unpolished Ferrari roots of x^4 + p x^2 + q x + r, shape ``(n, 4)``, plus realness mask."""
    a, b, c = -0.5 * p, -r, 0.5 * p * r - 0.125 * q * q
    P = b - a * a / 3.0
    Q = 2.0 * a ** 3 / 27.0 - a * b / 3.0 + c
    disc = 0.25 * Q * Q + P ** 3 / 27.0
    trig = (disc <= 0.0) & (P < 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        rho = np.sqrt(np.where(trig, -P / 3.0, 1.0))
        arg = np.where(rho > 0.0, np.clip(-0.5 * Q / rho / rho / rho, -1.0, 1.0), 0.0)
        t_trig = 2.0 * rho * np.cos(np.arccos(arg) / 3.0)
        sq = np.sqrt(np.maximum(disc, 0.0))
        t_card = np.cbrt(-0.5 * Q + sq) + np.cbrt(-0.5 * Q - sq)
    y = np.where(trig, t_trig, t_card) - a / 3.0
    active = np.ones_like(y, dtype=bool)
    for _ in range(3):
        fy = ((y + a) * y + b) * y + c
        dfy = (3.0 * y + 2.0 * a) * y + b
        active &= dfy != 0.0
        with np.errstate(invalid="ignore", divide="ignore"):
            y_new = y - fy / np.where(active, dfy, 1.0)
        active &= np.abs(((y_new + a) * y_new + b) * y_new + c) < np.abs(fy)
        y = np.where(active, y_new, y)
    s = np.sqrt(np.maximum(2.0 * y - p, 0.0))
    w = np.copysign(np.sqrt(np.maximum(y * y - r, 0.0)), q)
    r1, r2, ok1 = _vquadratic(-s, y + w)
    r3, r4, ok2 = _vquadratic(s, y - w)
    return np.stack([r1, r2, r3, r4], axis=-1), np.stack([ok1, ok1, ok2, ok2], axis=-1)


def _polish_batch(roots, a3, a2, a1, a0):
    a3, a2, a1, a0 = (v[..., None] for v in (a3, a2, a1, a0))
    P4 = lambda x: (((x + a3) * x + a2) * x + a1) * x + a0
    active = np.ones_like(roots, dtype=bool)
    for _ in range(NEWTON_STEPS):
        fx = P4(roots)
        dfx = ((4.0 * roots + 3.0 * a3) * roots + 2.0 * a2) * roots + a1
        active &= (fx != 0.0) & (dfx != 0.0)
        x_new = roots - fx / np.where(active, dfx, 1.0)
        active &= np.abs(P4(x_new)) < np.abs(fx)
        roots = np.where(active, x_new, roots)
    return roots


def quartic_real_roots_depressed_batch(p, q, r):
    """Vectorized real roots of x^4 + p x^2 + q x + r.

    Returns ``(roots, ok)`` of shape ``(n, 4)``; ``ok`` marks the real ones.
    Same arithmetic as :func:`quartic_real_roots` with ``c3 = 0``.
    """
    p, q, r = (np.asarray(v, dtype=float) for v in (p, q, r))
    roots, ok = _ferrari_batch(p, q, r)
    return _polish_batch(roots, np.zeros_like(p), p, q, r), ok


def quartic_real_roots_batch(a3, a2, a1, a0):
    """Vectorized real roots of the monic quartic x^4 + a3 x^3 + a2 x^2 + a1 x + a0.

    Same contract as :func:`quartic_real_roots_depressed_batch`.
    """
    a3, a2, a1, a0 = (np.asarray(v, dtype=float) for v in (a3, a2, a1, a0))
    shift = -0.25 * a3
    p = a2 - 0.375 * a3 * a3
    q = a1 - 0.5 * a3 * a2 + 0.125 * a3 ** 3
    r = a0 - 0.25 * a3 * a1 + a3 * a3 * a2 / 16.0 - 3.0 * a3 ** 4 / 256.0
    roots, ok = _ferrari_batch(p, q, r)
    return _polish_batch(roots + shift[..., None], a3, a2, a1, a0), ok
