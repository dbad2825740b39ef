import numpy as np
import pytest
from hypothesis import example, given, settings, strategies as st

from hypma.quartic import (quartic_real_roots, quartic_real_roots_batch,
                           quartic_real_roots_depressed_batch)
from oracles import bisection_roots


def test_known_roots():
    # (x^2 - 1)(x^2 - 4)
    assert np.allclose(quartic_real_roots(1, 0, -5, 0, 4), [-2, -1, 1, 2])


def test_no_real_roots():
    assert quartic_real_roots(1, 0, 2, 0, 5) == []


def test_leading_zero_rejected():
    with pytest.raises(ValueError):
        quartic_real_roots(0, 1, 1, 1, 1)


def test_matches_bisection_oracle():
    rng = np.random.default_rng(3)
    for _ in range(30):
        c = rng.uniform(-3, 3, 5)
        c[0] = rng.choice([-1, 1]) * rng.uniform(0.5, 2)
        ref = bisection_roots(c, -20, 20, 40001)
        got = quartic_real_roots(*c)
        # simple roots only: skip near-double ones where the oracle is blind
        if len(got) != len(ref):
            gaps = np.diff(got) if len(got) > 1 else [1]
            assert min(gaps) < 1e-3
            continue
        assert np.allclose(got, ref, atol=1e-8)


root = st.floats(-10, 10, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(st.lists(root, min_size=4, max_size=4), st.floats(0.1, 10))
def test_recovers_separated_real_roots(r, lead):
    r = sorted(r)
    if min(np.diff(r)) < 1e-2:
        return
    c = lead * np.poly(r)
    got = quartic_real_roots(*c)
    assert len(got) == 4
    assert np.allclose(got, r, atol=1e-7 * max(1, max(map(abs, r))))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=4, max_size=4))
@example([0.0, 0.0, 0.0, 3.946802656004152e-223])
@example([0.0, 0.0, 0.0, -3.946802656004152e-223])
def test_batch_matches_scalar(a):
    a3, a2, a1, a0 = a
    roots, ok = quartic_real_roots_batch(np.array([a3]), np.array([a2]), np.array([a1]), np.array([a0]))
    got = np.sort(roots[0][ok[0]])
    ref = quartic_real_roots(1.0, a3, a2, a1, a0)
    assert len(got) == len(ref)
    assert np.allclose(got, ref, atol=1e-9 * max(1, np.abs(ref).max() if ref else 1))


def test_depressed_batch_shape():
    p = np.array([-5.0, 2.0])
    q = np.zeros(2)
    r = np.array([4.0, 5.0])
    roots, ok = quartic_real_roots_depressed_batch(p, q, r)
    assert roots.shape == (2, 4)
    assert ok[0].all() and not ok[1].any()
    assert np.allclose(np.sort(roots[0]), [-2, -1, 1, 2])
