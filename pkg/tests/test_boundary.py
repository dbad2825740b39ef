import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypma import kernels
from hypma.boundary import (TargetSegment, build_target, distribute_salm, polyline_distance,
                            project_pm, project_salm, project_spm)
from hypma.cases import CASES, make_case
from hypma.errors import AdjacencyBroken, DegenerateMapping, DegenerateSegment
from hypma.grid import boundary_values, build_grid


def _line(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return lambda s: a + np.asarray(s, float)[:, None] * (b - a)


def test_sample_straight_segment():
    seg = TargetSegment.sample(_line((0, 0), (1, 0)), 3)
    assert np.allclose(seg.y, [[0, 0], [0.5, 0], [1, 0]])
    assert np.allclose(seg.tau, [0.5, 0.5]) and seg.length == 1.0


def test_arc_lengths_of_annulus_segment():
    target = build_target(make_case("annulus-segment"), 10_000)
    assert abs(target.segments[0].length - 1.0) <= 1e-7
    assert target.segments[1].length == pytest.approx(np.e - 1, rel=1e-7)


def test_degenerate_segment():
    with pytest.raises(DegenerateSegment):
        TargetSegment.sample(lambda s: np.zeros((len(s), 2)), 5)
    with pytest.raises(ValueError):
        TargetSegment.sample(_line((0, 0), (1, 0)), 1)


def test_adjacency_checked():
    case = make_case("deformed-square")
    broken = case.__class__(**{**case.__dict__, "segments": (
        case.segments[0], lambda s: case.segments[1](s) + 0.1, case.segments[2], case.segments[3])})
    with pytest.raises(AdjacencyBroken):
        build_target(broken, 50)


@pytest.mark.parametrize("name", list(CASES))
def test_all_cases_build(name):
    t = build_target(make_case(name), 100)
    assert t.closed.shape == (4 * 99, 2)
    assert t.corners().shape == (4, 2)


def _square_target(nb=5):
    class Sq:
        segments = (_line((0, 0), (0, 1)), _line((0, 1), (1, 1)), _line((1, 1), (1, 0)), _line((1, 0), (0, 0)))
    return build_target(Sq, nb)


def test_pm_examples():
    t = _square_target()
    b = project_pm(np.array([[0.5, 0.25], [1.0, 1.0], [1.5, 0.5]]), t)
    assert np.allclose(b, [[0.5, 0.0], [1.0, 1.0], [1.0, 0.5]])


def test_clamped_projection():
    y = np.array([[0.0, 0.0], [1.0, 0.0]])
    b, d2, _ = kernels.project_polyline(np.array([[1.5, 0.5]]), y, False)
    assert np.allclose(b, [[1.0, 0.0]]) and d2[0] == pytest.approx(0.5)


def test_spm_confined_to_segment_and_pins_corners():
    t = _square_target(11)
    g = build_grid((0, 1, 0, 1), 3, 3)
    pos = g.segment_slices()
    mb = np.full((g.n_boundary, 2), 0.9)
    # position 1 lies on source segment 1 (left); it is nearest to segment 3 (x = 1)
    b = project_spm(mb, t, pos)
    assert b[1, 0] == pytest.approx(0.0)
    corners = t.corners()
    for k, p in enumerate(pos):
        assert np.array_equal(b[p[0]], corners[k])


def test_salm_hand_example():
    seg = TargetSegment.sample(_line((0, 0), (1, 0)), 2)
    b = distribute_salm(np.array([[0.2, 0.1], [0.5, 0.1], [0.9, 0.1]]), seg)
    assert np.allclose(b, [[0, 0], [3 / 7, 0], [1, 0]], atol=1e-15)


def test_salm_identity_on_uniform_sampling():
    seg = TargetSegment.sample(_line((0, 0), (2, 1)), 7)
    m = seg.y[::2]
    assert np.allclose(distribute_salm(m, seg), m, atol=1e-14)


def test_salm_collapsed_images():
    seg = TargetSegment.sample(_line((0, 0), (1, 0)), 5)
    with pytest.raises(DegenerateMapping):
        distribute_salm(np.ones((4, 2)), seg)


pt = st.floats(-3, 3, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(pt, pt), min_size=8, max_size=8), st.sampled_from(["pm", "spm", "salm"]))
def test_results_lie_on_target(pts, method):
    t = build_target(make_case("annulus-segment"), 200)
    g = build_grid((0, 1, -0.5, 0.5), 3, 3)
    mb = np.array(pts, dtype=float)
    if method == "salm" and any(np.ptp(mb[p], axis=0).max() == 0 for p in g.segment_slices()):
        return
    fn = {"pm": lambda: project_pm(mb, t), "spm": lambda: project_spm(mb, t, g.segment_slices()),
          "salm": lambda: project_salm(mb, t, g.segment_slices())}[method]
    b = fn()
    L = sum(s.length for s in t.segments)
    assert polyline_distance(b, np.vstack([t.closed, t.closed[:1]])).max() <= 1e-12 * L
    if method == "pm":
        # no polyline vertex is closer than the returned point
        dv = np.linalg.norm(mb[:, None, :] - t.closed[None], axis=2).min(axis=1)
        assert np.all(np.linalg.norm(mb - b, axis=1) <= dv + 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.01, 1.0), min_size=5, max_size=12))
def test_salm_monotone_and_proportional(gaps):
    seg = TargetSegment.sample(lambda s: np.stack([np.cos(s), np.sin(s)], axis=1), 20001)
    s = np.concatenate([[0], np.cumsum(gaps)])
    m = np.stack([s, 0.3 * s], axis=1)
    b = distribute_salm(m, seg)
    # arc-length position of each b along the unit-circle arc is its angle
    arc = np.arctan2(b[:, 1], b[:, 0])
    assert np.all(np.diff(arc) > 0)
    assert np.allclose(np.diff(arc) / seg.length, np.asarray(gaps) / sum(gaps), atol=1e-6)


def test_kernel_backend_parity():
    rng = np.random.default_rng(2)
    y = np.ascontiguousarray(rng.normal(size=(300, 2)).cumsum(axis=0))
    m = np.ascontiguousarray(rng.normal(size=(50, 2)) * 5)
    try:
        cy = kernels.get_backend("cython")
    except ImportError:
        pytest.skip("compiled backend not built")
    py = kernels.get_backend("python")
    for closed in (False, True):
        a, b = cy.project_polyline(m, y, closed), py.project_polyline(m, y, closed)
        for u, v in zip(a, b):
            assert np.allclose(u, v, rtol=0, atol=1e-12)
    t = np.concatenate([[0], np.cumsum(np.linalg.norm(np.diff(y, axis=0), axis=1))])
    s = np.ascontiguousarray(np.sort(rng.uniform(0, t[-1], 40)))
    assert np.allclose(cy.interp_arclength(t, y, s), py.interp_arclength(t, y, s), atol=1e-12)


def test_salm_kernel_parity_and_reference():
    case = make_case("inward-fold")
    target = build_target(case, 700)
    grid = build_grid(case.bounds, 17, 13)
    rng = np.random.default_rng(5)
    mb = np.ascontiguousarray(boundary_values(grid, np.stack(grid.mesh())) + rng.normal(0, 0.01, (grid.n_boundary, 2)))
    pos = grid.segment_slices()
    ref = np.empty_like(mb)
    for p, seg in zip(pos, target.segments):
        ref[p] = distribute_salm(mb[p], seg)
    flat = np.concatenate(pos).astype(np.int64)
    offs = np.cumsum([0] + [len(p) for p in pos]).astype(np.int64)
    py = kernels.get_backend("python").salm_boundary(mb, flat, offs, target.t_all, target.y_all)
    assert py[1] == -1 and np.allclose(py[0], ref, rtol=0, atol=1e-14)
    try:
        cy = kernels.get_backend("cython")
    except ImportError:
        pytest.skip("compiled backend not built")
    got = cy.salm_boundary(mb, flat, offs, target.t_all, target.y_all)
    assert got[1] == -1 and np.allclose(got[0], ref, rtol=0, atol=1e-13)
    mb[pos[2]] = mb[pos[2]][0]
    assert cy.salm_boundary(mb, flat, offs, target.t_all, target.y_all)[1] == 2
