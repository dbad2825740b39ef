"""Pure numpy versions of the compiled kernels in ``_ckernels.pyx``."""
from __future__ import annotations

import numpy as np

from .popt import minimize_fs_batch

# queries per chunk in the projection so the (queries x edges) temporaries stay small
_CHUNK_ELEMS = 2_000_000


def minimize_fs_field(d11, d12, d21, d22, f2):
    return minimize_fs_batch(d11, d12, d21, d22, f2)


def project_polyline(m, y, closed):
    m = np.asarray(m, dtype=float)
    y = np.asarray(y, dtype=float)
    a = y if closed else y[:-1]
    e = (np.roll(y, -1, axis=0) if closed else y[1:]) - a
    L2 = np.einsum("ij,ij->i", e, e)
    keep = L2 > 0.0
    edge_ids = np.nonzero(keep)[0]
    a, e, L2 = a[keep], e[keep], L2[keep]
    nq = m.shape[0]
    b = np.empty((nq, 2))
    dist = np.empty(nq)
    edge = np.empty(nq, dtype=np.intp)
    step = max(1, _CHUNK_ELEMS // max(1, len(a)))
    for s in range(0, nq, step):
        mq = m[s:s + step]
        rx = mq[:, 0, None] - a[None, :, 0]
        ry = mq[:, 1, None] - a[None, :, 1]
        t = np.clip((rx * e[:, 0] + ry * e[:, 1]) / L2, 0.0, 1.0)
        px = a[:, 0] + t * e[:, 0]
        py = a[:, 1] + t * e[:, 1]
        d2 = (px - mq[:, 0, None]) ** 2 + (py - mq[:, 1, None]) ** 2
        # first minimum, as in the sequential scan
        k = np.argmin(d2, axis=1)
        rows = np.arange(len(mq))
        b[s:s + step, 0] = px[rows, k]
        b[s:s + step, 1] = py[rows, k]
        dist[s:s + step] = d2[rows, k]
        edge[s:s + step] = edge_ids[k]
    return b, dist, edge


def interp_arclength(t, y, s):
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    s = np.asarray(s, dtype=float)
    nb = len(t)
    lo = np.clip(np.searchsorted(t, s, side="right") - 1, 0, nb - 2)
    dt = t[lo + 1] - t[lo]
    w = np.where(dt > 0.0, (s - t[lo]) / np.where(dt > 0.0, dt, 1.0), 0.0)
    b = y[lo] + w[:, None] * (y[lo + 1] - y[lo])
    b[s <= t[0]] = y[0]
    b[s >= t[-1]] = y[-1]
    return b


def salm_boundary(m_b, pos, offsets, T, Y):
    m_b = np.asarray(m_b, dtype=float)
    b = np.empty_like(m_b)
    for k in range(len(offsets) - 1):
        p = pos[offsets[k]:offsets[k + 1]]
        seg = m_b[p]
        d = np.diff(seg, axis=0)
        s = np.concatenate([[0.0], np.cumsum(np.sqrt(d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1]))])
        total = s[-1]
        if not total > 0.0:
            return b, k
        L = T[k, -1]
        s = s * (L / total)
        s[-1] = L
        b[p] = interp_arclength(T[k], Y[k], s)
    return b, -1
