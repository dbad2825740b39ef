"""Target boundary polylines and the three b-minimization methods.

``pm``   closest point on the whole closed target polyline,
``spm``  closest point on the matching target segment, corners pinned,
``salm`` redistribution along the matching segment by relative arc length.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .errors import AdjacencyBroken, DegenerateMapping, DegenerateSegment

METHODS = ("pm", "spm", "salm")
ADJ_TOL = 1e-12


@dataclass(frozen=True)
class TargetSegment:
    gamma: Callable
    y: np.ndarray  # (N_b, 2) polyline points
    tau: np.ndarray  # chord lengths, (N_b - 1,)
    t: np.ndarray  # cumulative arc length, t[0] = 0

    @property
    def length(self) -> float:
        return float(self.t[-1])

    @classmethod
    def sample(cls, gamma: Callable, nb: int) -> "TargetSegment":
        if nb < 2:
            raise ValueError("need at least 2 points per target segment")
        s = np.arange(nb) / (nb - 1)
        y = np.ascontiguousarray(gamma(s), dtype=float)
        tau = np.linalg.norm(np.diff(y, axis=0), axis=1)
        t = np.concatenate([[0.0], np.cumsum(tau)])
        if t[-1] <= 0.0:
            raise DegenerateSegment("target segment has zero length")
        return cls(gamma, y, tau, t)


@dataclass(frozen=True)
class TargetBoundary:
    segments: tuple[TargetSegment, ...]
    closed: np.ndarray  # concatenated polyline without repeated endpoints
    t_all: np.ndarray  # (4, N_b) cumulative arc lengths, stacked for the SALM kernel
    y_all: np.ndarray  # (4, N_b, 2)

    @property
    def nb(self) -> int:
        return len(self.segments[0].y)

    def bbox(self) -> tuple[float, float, float, float]:
        pts = self.closed
        return (pts[:, 0].min(), pts[:, 0].max(), pts[:, 1].min(), pts[:, 1].max())

    def corners(self) -> np.ndarray:
        """Start point of every segment, shape (4, 2)."""
        return np.array([seg.y[0] for seg in self.segments])


def build_target(case, nb: int) -> TargetBoundary:
    segs = tuple(TargetSegment.sample(g, nb) for g in case.segments)
    for k, seg in enumerate(segs):
        nxt = segs[(k + 1) % len(segs)]
        gap = np.linalg.norm(seg.y[-1] - nxt.y[0])
        scale = max(1.0, float(np.abs(seg.y).max()))
        if gap > ADJ_TOL * scale:
            raise AdjacencyBroken(f"segment {k + 1} ends {gap:.3e} away from segment {k + 2}")
    closed = np.ascontiguousarray(np.concatenate([seg.y[:-1] for seg in segs]))
    t_all = np.ascontiguousarray(np.stack([seg.t for seg in segs]))
    y_all = np.ascontiguousarray(np.stack([seg.y for seg in segs]))
    return TargetBoundary(segs, closed, t_all, y_all)


def project_pm(m_b: np.ndarray, target: TargetBoundary) -> np.ndarray:
    """Closest point on the closed target polyline for each boundary image."""
    b, _, _ = kernels.project_polyline(np.ascontiguousarray(m_b, dtype=float), target.closed, True)
    return b


def project_spm(m_b: np.ndarray, target: TargetBoundary, seg_positions) -> np.ndarray:
    """Segment-wise projection; source corners go to the target segment endpoints."""
    m_b = np.ascontiguousarray(m_b, dtype=float)
    b = np.empty_like(m_b)
    for pos, seg in zip(seg_positions, target.segments):
        bk, _, _ = kernels.project_polyline(np.ascontiguousarray(m_b[pos]), seg.y, False)
        b[pos] = bk
    for pos, seg in zip(seg_positions, target.segments):
        b[pos[0]] = seg.y[0]
        b[pos[-1]] = seg.y[-1]
    return b


def distribute_salm(m_seg: np.ndarray, seg: TargetSegment) -> np.ndarray:
    """Place images along ``seg`` with spacing proportional to the spacing of ``m_seg``."""
    m_seg = np.asarray(m_seg, dtype=float)
    sigma = np.linalg.norm(np.diff(m_seg, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(sigma)])
    total = s[-1]
    if not total > 0.0:
        raise DegenerateMapping("boundary images of a source segment collapsed to a point")
    s_t = s * (seg.length / total)
    s_t[-1] = seg.length
    return kernels.interp_arclength(seg.t, seg.y, s_t)


def project_salm(m_b: np.ndarray, target: TargetBoundary, seg_positions) -> np.ndarray:
    pos = np.concatenate(seg_positions).astype(np.int64, copy=False)
    offsets = [0]
    for p in seg_positions:
        offsets.append(offsets[-1] + len(p))
    offsets = np.array(offsets, dtype=np.int64)
    b, bad = kernels.salm_boundary(np.ascontiguousarray(m_b, dtype=float), pos, offsets,
                                   target.t_all, target.y_all)
    if bad >= 0:
        raise DegenerateMapping(f"boundary images of source segment {bad + 1} collapsed to a point")
    return b


def boundary_step(method: str, m_b: np.ndarray, target: TargetBoundary, seg_positions) -> np.ndarray:
    if method == "pm":
        return project_pm(m_b, target)
    if method == "spm":
        return project_spm(m_b, target, seg_positions)
    if method == "salm":
        return project_salm(m_b, target, seg_positions)
    raise ValueError(f"unknown boundary method {method!r}")


def polyline_distance(points: np.ndarray, polyline: np.ndarray, closed: bool = False) -> np.ndarray:
    """Euclidean distance from each point to a polyline."""
    _, d2, _ = kernels.project_polyline(np.ascontiguousarray(points, dtype=float),
                                        np.ascontiguousarray(polyline, dtype=float), closed)
    return np.sqrt(d2)
