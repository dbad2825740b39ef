import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypma.errors import GridError
from hypma.grid import boundary_values, build_grid, fd_divergence, fd_jacobian


def test_spacing_and_nodes():
    g = build_grid((0.0, 1.0, -0.5, 0.5), 11, 21)
    assert g.h1 == pytest.approx(0.1)
    assert g.h2 == pytest.approx(0.05)
    assert g.x1[-1] == pytest.approx(1.0)
    assert g.x2[0] == -0.5
    X1, X2 = g.mesh()
    assert X1.shape == (11, 21) and X2[0, 5] == pytest.approx(-0.25)


@pytest.mark.parametrize("n1,n2", [(2, 5), (5, 2), (1, 1)])
def test_too_small_grid(n1, n2):
    with pytest.raises(GridError):
        build_grid((0, 1, 0, 1), n1, n2)


def test_inverted_bounds():
    with pytest.raises(GridError):
        build_grid((1, 0, 0, 1), 5, 5)


def test_boundary_traversal_is_clockwise_and_complete():
    g = build_grid((0, 2, 0, 1), 5, 4)
    ii, jj = g.boundary_order()
    assert len(ii) == g.n_boundary == 2 * (5 + 4) - 4
    assert len(set(zip(ii, jj))) == g.n_boundary
    assert (ii[0], jj[0]) == (0, 0)
    # neighbours along the traversal are grid neighbours
    steps = np.abs(np.diff(np.r_[ii, ii[0]])) + np.abs(np.diff(np.r_[jj, jj[0]]))
    assert np.all(steps == 1)
    # clockwise: negative shoelace area
    x, y = g.x1[ii], g.x2[jj]
    area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
    assert area == pytest.approx(-2.0)


def test_segments_share_corners():
    g = build_grid((0, 1, 0, 1), 6, 4)
    segs = g.segment_indices()
    for k in range(4):
        a, b = segs[k], segs[(k + 1) % 4]
        assert (a[0][-1], a[1][-1]) == (b[0][0], b[1][0])
    ii, jj = g.boundary_order()
    for pos, seg in zip(g.segment_slices(), segs):
        assert np.array_equal(ii[pos], seg[0]) and np.array_equal(jj[pos], seg[1])


def test_quadrature_weights():
    g = build_grid((0, 2, -1, 0.5), 9, 7)
    assert g.area_weights().sum() == pytest.approx(3.0)
    assert g.boundary_weights().sum() == pytest.approx(7.0)


def test_boundary_normals_unit():
    g = build_grid((0, 1, 0, 1), 5, 5)
    n = g.boundary_normals()
    assert np.allclose(np.linalg.norm(n, axis=1), 1.0)
    assert np.allclose(n[0], [-np.sqrt(0.5), -np.sqrt(0.5)])


coef = st.floats(-5, 5, allow_nan=False)


@settings(max_examples=40, deadline=None)
@given(st.lists(coef, min_size=12, max_size=12), st.integers(3, 9), st.integers(3, 9))
def test_jacobian_exact_on_quadratics(c, n1, n2):
    g = build_grid((-0.3, 0.7, 0.1, 1.4), n1, n2)
    X, Y = g.mesh()
    m = np.stack([c[0] + c[1] * X + c[2] * Y + c[3] * X * X + c[4] * X * Y + c[5] * Y * Y,
                  c[6] + c[7] * X + c[8] * Y + c[9] * X * X + c[10] * X * Y + c[11] * Y * Y])
    D = fd_jacobian(g, m)
    exact = np.array([[c[1] + 2 * c[3] * X + c[4] * Y, c[2] + c[4] * X + 2 * c[5] * Y],
                      [c[7] + 2 * c[9] * X + c[10] * Y, c[8] + c[10] * X + 2 * c[11] * Y]])
    assert np.allclose(D, exact, atol=1e-9)
    assert np.allclose(fd_divergence(g, m), exact[0, 0] + exact[1, 1], atol=1e-9)


def test_jacobian_second_order():
    errs = []
    for n in (11, 21, 41):
        g = build_grid((0, 1, 0, 1), n, n)
        X, Y = g.mesh()
        m = np.stack([np.sin(2 * X) * np.exp(Y), np.cos(X * Y)])
        D = fd_jacobian(g, m)
        errs.append(abs(D[0, 0] - 2 * np.cos(2 * X) * np.exp(Y)).max())
    assert 3.5 < errs[0] / errs[1] < 4.5 and 3.5 < errs[1] / errs[2] < 4.5


def test_boundary_values_shapes():
    g = build_grid((0, 1, 0, 1), 4, 3)
    s = np.arange(12.0).reshape(4, 3)
    assert boundary_values(g, s).shape == (g.n_boundary,)
    v = boundary_values(g, np.stack([s, -s]))
    assert v.shape == (g.n_boundary, 2) and np.array_equal(v[:, 1], -v[:, 0])
