"""Manufactured benchmark problems with known exact solutions.

Each case supplies the source rectangle, the four target boundary segments
(parametrized over ``s in [0, 1]`` in the direction the source boundary is
traversed clockwise), ``f^2(x, m)``, and the exact ``u``, ``m = grad u`` and
Hessian of ``u``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import UnknownCase

E = np.e
SQE = np.sqrt(np.e)
S1, C1 = np.sin(1.0), np.cos(1.0)


def _pts(x, y):
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    return np.stack([x, y], axis=-1)


@dataclass(frozen=True)
class CaseDefinition:
    name: str
    bounds: tuple[float, float, float, float]
    segments: tuple[Callable, Callable, Callable, Callable]
    f2: Callable  # f2(x1, x2, m1, m2)
    u: Callable | None = None
    m: Callable | None = None  # m(x1, x2) -> (m1, m2)
    hessian: Callable | None = None  # -> (u11, u12, u22)
    depends_on_m: bool = False
    notes: str = ""
    # segments allowed to coincide instead of meeting at a single point
    coincident: tuple[tuple[int, int], ...] = field(default=())
    # bounding-box guess variant whose corners match the target corners
    initial_guess: str = "default"

    @property
    def has_exact(self) -> bool:
        return self.u is not None and self.m is not None


def _annulus_segment() -> CaseDefinition:
    segs = (
        lambda s: _pts(np.cos(0.5 - s), np.sin(0.5 - s)),
        lambda s: _pts(np.exp(s) * np.cos(0.5), -np.exp(s) * np.sin(0.5)),
        lambda s: _pts(E * np.cos(0.5 - s), E * np.sin(s - 0.5)),
        lambda s: _pts(np.exp(1 - s) * np.cos(0.5), np.exp(1 - s) * np.sin(0.5)),
    )
    return CaseDefinition(
        name="annulus-segment",
        bounds=(0.0, 1.0, -0.5, 0.5),
        segments=segs,
        f2=lambda x1, x2, m1, m2: np.exp(2 * x1),
        u=lambda x1, x2: np.exp(x1) * np.cos(x2),
        m=lambda x1, x2: (np.exp(x1) * np.cos(x2), -np.exp(x1) * np.sin(x2)),
        hessian=lambda x1, x2: (np.exp(x1) * np.cos(x2), -np.exp(x1) * np.sin(x2),
                                -np.exp(x1) * np.cos(x2)),
        notes="all three boundary methods converge",
    )


def _deformed_square() -> CaseDefinition:
    segs = (
        lambda s: _pts(s - 0.5, -s + 0.5),
        lambda s: _pts(s ** 3 / 3 + s ** 2 + 0.5, s - 0.5),
        lambda s: _pts(-s + 11 / 6, s + 0.5),
        lambda s: _pts(-s ** 3 / 3 + 2 * s ** 2 - 3 * s + 5 / 6, 1.5 - s),
    )
    return CaseDefinition(
        name="deformed-square",
        bounds=(0.0, 1.0, -0.5, 0.5),
        segments=segs,
        f2=lambda x1, x2, m1, m2: (x1 + 1) ** 2,
        u=lambda x1, x2: x1 ** 4 / 12 + x1 ** 3 / 3 + x1 * x2 - x2 ** 2 / 2,
        m=lambda x1, x2: (x1 ** 3 / 3 + x1 ** 2 + x2, x1 - x2),
        hessian=lambda x1, x2: (x1 ** 2 + 2 * x1, np.ones_like(x1), -np.ones_like(x1)),
        notes="grid shocks appear with SPM unless corrected; PM does not converge",
    )


def _inward_fold() -> CaseDefinition:
    segs = (
        lambda s: _pts(0.0 * s, -s ** 4 / 4 + s ** 3 / 2 - 3 * s ** 2 / 8 - 7 * s / 8 + 31 / 64),
        lambda s: _pts(9 * s / 8 - s ** 3 / 2, -s ** 4 / 4 + 3 * s ** 2 / 8 - 33 / 64),
        lambda s: _pts(-s ** 3 + 3 * s ** 2 / 2 + s / 4 + 5 / 8,
                       -s ** 4 / 4 + s ** 3 / 2 + 9 * s ** 2 / 8 - 3 * s / 8 - 25 / 64),
        lambda s: _pts(-s ** 3 / 2 + 3 * s ** 2 / 2 - 19 * s / 8 + 11 / 8,
                       -s ** 4 / 4 + s ** 3 - 9 * s ** 2 / 8 + s / 4 + 39 / 64),
    )

    def hess(x1, x2):
        return (1 - 3 * x1 ** 2 * x2 + x2 ** 3, -x1 ** 3 + 3 * x1 * x2 ** 2,
                -1 + 3 * x1 ** 2 * x2 - x2 ** 3)

    return CaseDefinition(
        name="inward-fold",
        bounds=(0.0, 1.0, -0.5, 0.5),
        segments=segs,
        f2=lambda x1, x2, m1, m2: (x1 ** 6 + 3 * x1 ** 4 * x2 ** 2
                                   + 3 * x1 ** 2 * x2 * (x2 ** 3 - 2) + (1 + x2 ** 3) ** 2),
        u=lambda x1, x2: (x1 ** 2 / 2 - x1 ** 4 * x2 / 4 - x2 ** 2 / 2
                          + x1 ** 2 * x2 ** 3 / 2 - x2 ** 5 / 20),
        m=lambda x1, x2: (x1 - x1 ** 3 * x2 + x1 * x2 ** 3,
                          -x1 ** 4 / 4 - x2 + 1.5 * x1 ** 2 * x2 ** 2 - x2 ** 4 / 4),
        hessian=hess,
        notes="sharp fold near (3*sqrt(3)/8, -3/8); only SALM resolves it",
    )


def _annulus() -> CaseDefinition:
    segs = (
        lambda s: _pts(0.0 * s, np.exp(s - 0.5)),
        lambda s: _pts(-SQE * np.sin(2 * np.pi * s), SQE * np.cos(2 * np.pi * s)),
        lambda s: _pts(0.0 * s, np.exp(0.5 - s)),
        lambda s: _pts(np.sin(2 * np.pi * s) / SQE, np.cos(2 * np.pi * s) / SQE),
    )
    return CaseDefinition(
        name="annulus",
        bounds=(0.0, 2 * np.pi, -0.5, 0.5),
        segments=segs,
        f2=lambda x1, x2, m1, m2: np.exp(2 * x2),
        u=lambda x1, x2: np.exp(x2) * np.cos(x1),
        m=lambda x1, x2: (-np.exp(x2) * np.sin(x1), np.exp(x2) * np.cos(x1)),
        hessian=lambda x1, x2: (-np.exp(x2) * np.cos(x1), -np.exp(x2) * np.sin(x1),
                                np.exp(x2) * np.cos(x1)),
        notes="segments 1 and 3 coincide; SPM accumulates b on part of the inner circle",
        coincident=((0, 2),),
    )


def _gradient_dependent() -> CaseDefinition:
    segs = (
        lambda s: _pts(S1 / 4 * s ** 2 + S1 * s + S1, C1 * s + 2 * C1),
        lambda s: _pts(-9 / 4 * np.sin(2 * s - 1), 3 * np.cos(2 * s - 1)),
        # trace of grad u on x1 = 1; the linear term carries the factor sin(1)
        lambda s: _pts(-S1 / 4 * s ** 2 + 1.5 * S1 * s - 9 * S1 / 4, -C1 * s + 3 * C1),
        lambda s: _pts(np.sin(2 * s - 1), 2 * np.cos(2 * s - 1)),
    )
    return CaseDefinition(
        name="gradient-dependent",
        bounds=(-1.0, 1.0, 1.0, 1.5),
        segments=segs,
        f2=lambda x1, x2, m1, m2: 3 * x2 ** 2 - m1 * np.sin(x1) - m2 ** 2 / 4,
        u=lambda x1, x2: x2 ** 2 * np.cos(x1),
        m=lambda x1, x2: (-x2 ** 2 * np.sin(x1), 2 * x2 * np.cos(x1)),
        hessian=lambda x1, x2: (-x2 ** 2 * np.cos(x1), -2 * x2 * np.sin(x1),
                                2 * np.cos(x1) + 0 * x2),
        depends_on_m=True,
        notes="f^2 depends on m; SPM needs grid shock correction",
        # the exact map reverses x1; the default guess makes f^2 negative at (x1m, x2m)
        initial_guess="yx",
    )


def rectangle_case(bounds=(0.0, 1.0, -0.5, 0.5), target=(0.0, 2.0, 0.0, 1.0)) -> CaseDefinition:
    """Rectangle onto rectangle with constant f^2 = area(target)/area(source).

    The exact mapping is the orientation-reversing affine map, which is
    also the bounding-box initial guess.
    """
    x1m, x1M, x2m, x2M = bounds
    y1m, y1M, y2m, y2M = target
    a = (y1M - y1m) / (x1M - x1m)
    b = (y2M - y2m) / (x2M - x2m)
    segs = (
        lambda s: _pts(y1m + 0 * s, y2M + s * (y2m - y2M)),
        lambda s: _pts(y1m + s * (y1M - y1m), y2m + 0 * s),
        lambda s: _pts(y1M + 0 * s, y2m + s * (y2M - y2m)),
        lambda s: _pts(y1M + s * (y1m - y1M), y2M + 0 * s),
    )
    m = lambda x1, x2: (y1m + a * (x1 - x1m), y2M - b * (x2 - x2m))
    return CaseDefinition(
        name="rectangle",
        bounds=tuple(float(v) for v in bounds),
        segments=segs,
        f2=lambda x1, x2, m1, m2: a * b + 0 * x1,
        u=lambda x1, x2: y1m * x1 + 0.5 * a * (x1 - x1m) ** 2 + y2M * x2 - 0.5 * b * (x2 - x2m) ** 2,
        m=m,
        hessian=lambda x1, x2: (a + 0 * x1, 0 * x1, -b + 0 * x1),
        notes="initial guess is the exact discrete solution",
    )


def translated(case: CaseDefinition, shift) -> CaseDefinition:
    """Same problem with every target point moved by ``shift``."""
    sx, sy = float(shift[0]), float(shift[1])
    segs = tuple((lambda g: (lambda s: g(s) + np.array([sx, sy])))(g) for g in case.segments)
    f2 = case.f2
    m = case.m
    u = case.u
    return CaseDefinition(
        name=f"{case.name}+shift",
        bounds=case.bounds,
        segments=segs,
        f2=lambda x1, x2, m1, m2: f2(x1, x2, m1 - sx, m2 - sy),
        u=None if u is None else (lambda x1, x2: u(x1, x2) + sx * x1 + sy * x2),
        m=None if m is None else (lambda x1, x2: tuple(c + d for c, d in zip(m(x1, x2), (sx, sy)))),
        hessian=case.hessian,
        depends_on_m=case.depends_on_m,
        notes=case.notes,
        coincident=case.coincident,
        initial_guess=case.initial_guess,
    )


CASES = {
    "annulus-segment": _annulus_segment,
    "deformed-square": _deformed_square,
    "inward-fold": _inward_fold,
    "annulus": _annulus,
    "gradient-dependent": _gradient_dependent,
}


def make_case(name: str) -> CaseDefinition:
    try:
        return CASES[name]()
    except KeyError:
        raise UnknownCase(f"unknown case {name!r}; choose from {', '.join(CASES)}") from None
