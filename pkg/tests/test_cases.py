import numpy as np
import pytest

from hypma.cases import CASES, make_case, rectangle_case, translated
from hypma.errors import UnknownCase
from hypma.grid import build_grid
from oracles import dense_curve_distance

NAMES = list(CASES)


def _sample(case, n=100, seed=0):
    rng = np.random.default_rng(seed)
    x1m, x1M, x2m, x2M = case.bounds
    return rng.uniform(x1m, x1M, n), rng.uniform(x2m, x2M, n)


@pytest.mark.parametrize("name", NAMES + ["rectangle"])
def test_exact_solution_satisfies_equation(name):
    case = rectangle_case() if name == "rectangle" else make_case(name)
    x1, x2 = _sample(case)
    u11, u12, u22 = (np.broadcast_to(v, x1.shape) for v in case.hessian(x1, x2))
    m1, m2 = case.m(x1, x2)
    f2 = case.f2(x1, x2, m1, m2)
    scale = np.maximum(1.0, np.abs(f2))
    assert np.all(np.abs(u11 * u22 - u12 ** 2 + f2) <= 1e-10 * scale)


@pytest.mark.parametrize("name", NAMES + ["rectangle"])
def test_mapping_is_gradient_and_hessian_is_its_jacobian(name):
    case = rectangle_case() if name == "rectangle" else make_case(name)
    x1, x2 = _sample(case, 40, seed=1)
    h = 1e-5
    m1, m2 = (np.broadcast_to(v, x1.shape) for v in case.m(x1, x2))
    du1 = (case.u(x1 + h, x2) - case.u(x1 - h, x2)) / (2 * h)
    du2 = (case.u(x1, x2 + h) - case.u(x1, x2 - h)) / (2 * h)
    assert np.allclose(du1, m1, atol=1e-7) and np.allclose(du2, m2, atol=1e-7)
    u11, u12, u22 = (np.broadcast_to(v, x1.shape) for v in case.hessian(x1, x2))
    a = np.asarray(case.m(x1 + h, x2)) - np.asarray(case.m(x1 - h, x2))
    b = np.asarray(case.m(x1, x2 + h)) - np.asarray(case.m(x1, x2 - h))
    assert np.allclose(a[0] / (2 * h), u11, atol=1e-7)
    assert np.allclose(a[1] / (2 * h), u12, atol=1e-7)
    assert np.allclose(b[0] / (2 * h), u12, atol=1e-7)
    assert np.allclose(b[1] / (2 * h), u22, atol=1e-7)


@pytest.mark.parametrize("name", NAMES)
def test_exact_boundary_trace_lies_on_target_segment(name):
    case = make_case(name)
    grid = build_grid(case.bounds, 13, 9)
    X1, X2 = grid.mesh()
    for k, (ii, jj) in enumerate(grid.segment_indices()):
        m1, m2 = (np.broadcast_to(v, ii.shape) for v in case.m(X1[ii, jj], X2[ii, jj]))
        for p in zip(m1, m2):
            assert dense_curve_distance(p, case.segments[k]) <= 1e-8


@pytest.mark.parametrize("name", NAMES)
def test_segments_chain_and_target_is_counterclockwise(name):
    case = make_case(name)
    s = np.linspace(0.0, 1.0, 4001)
    pts = [np.asarray(g(s)) for g in case.segments]
    for k in range(4):
        assert np.allclose(pts[k][-1], pts[(k + 1) % 4][0], atol=1e-12)
    poly = np.vstack([p[:-1] for p in pts])
    x, y = poly[:, 0], poly[:, 1]
    area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
    assert area > 0.0


@pytest.mark.parametrize("name", NAMES)
def test_density_positive_on_sampled_grid(name):
    case = make_case(name)
    grid = build_grid(case.bounds, 41, 41)
    X1, X2 = grid.mesh()
    f2 = case.f2(X1, X2, *case.m(X1, X2))
    assert np.all(np.asarray(f2) > 0.0)


def test_inward_fold_reference_points():
    case = make_case("inward-fold")
    assert np.allclose(case.m(1.0, 0.5), (5 / 8, -25 / 64), atol=1e-15)
    r3 = np.sqrt(3.0)
    assert np.allclose(case.m(r3 / 2, 0.5), (3 * r3 / 8, -3 / 8), atol=1e-15)
    # the fold point is where the density vanishes
    assert abs(case.f2(r3 / 2, 0.5, 0.0, 0.0)) < 1e-14


def test_unknown_case():
    with pytest.raises(UnknownCase):
        make_case("nope")


def test_translated_case_shifts_everything():
    case = make_case("gradient-dependent")
    sh = np.array([0.25, -0.5])
    t = translated(case, sh)
    x1, x2 = _sample(case, 20, seed=3)
    m = np.asarray(case.m(x1, x2))
    mt = np.asarray(t.m(x1, x2))
    assert np.allclose(mt, m + sh[:, None])
    assert np.allclose(t.f2(x1, x2, *mt), case.f2(x1, x2, *m))
    s = np.linspace(0, 1, 7)
    for g, gt in zip(case.segments, t.segments):
        assert np.allclose(gt(s), g(s) + sh)
    assert t.initial_guess == case.initial_guess


def test_rectangle_case_area_ratio():
    case = rectangle_case((0.0, 2.0, 0.0, 1.0), (1.0, 4.0, -1.0, 1.0))
    assert np.isclose(case.f2(0.3, 0.7, 0.0, 0.0), (3 * 2) / (2 * 1))
