import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from regdisk.curves import (
    Polyline,
    frechet,
    mu_length,
    mu_n,
    mu_parameterize,
    resample_by_mu,
)

LN2 = math.log(2.0)


def segment(length=1.0, n=2):
    return Polyline(np.c_[np.linspace(0, length, n), np.zeros(n)])


def series_oracle(s, terms=60):
    return sum(s / (n * 2**n) for n in range(1, terms + 1))


def test_oracle_is_ln2():
    assert series_oracle(1.0) == pytest.approx(LN2, abs=1e-15)


def test_mu_n_segment():
    assert mu_n(segment(), 2) == pytest.approx(0.5, abs=1e-12)
    assert mu_n(segment(), 1) == pytest.approx(1.0, abs=1e-12)
    assert mu_n(segment(), 3) == pytest.approx(1 / 3, abs=1e-3)


def test_mu_n_quarter_arc_brute_force():
    th = np.linspace(0, math.pi / 2, 200)
    arc = Polyline(np.c_[np.cos(th), np.sin(th)])
    v = arc.vertices
    brute = np.sqrt(((v[:, None] - v[None]) ** 2).sum(-1)).max()
    assert mu_n(arc, 1) == pytest.approx(brute, abs=1e-6)
    assert brute == pytest.approx(math.sqrt(2), abs=1e-6)


def test_greedy_is_not_enough():
    # U-turn: the greedy chain overshoots, the exact program does not
    u = Polyline([(0, 0), (1, 0), (1, 0.2), (0, 0.2)])
    v = u.resample_uniform(240)
    best = 0.0
    for i in range(len(v)):
        for j in range(i, len(v)):
            d1 = np.hypot(*(v[i] - v[0]))
            d2 = np.hypot(*(v[j] - v[i]))
            d3 = np.hypot(*(v[-1] - v[j]))
            best = max(best, min(d1, d2, d3))
    assert mu_n(u, 3, resolution=240) == pytest.approx(best, abs=1e-12)


@pytest.mark.parametrize("length", [1.0, 2.0])
def test_mu_length_segment(length):
    got = mu_length(segment(length, 1024), eps=1e-4)
    assert abs(got - series_oracle(length)) <= 1e-4 + 1e-3


def test_mu_length_translation_and_scale():
    rng = np.random.default_rng(3)
    pts = np.cumsum(rng.normal(size=(20, 2)), axis=0)
    a = mu_length(pts, eps=1e-4)
    assert mu_length(pts + 5.0, eps=1e-4) == pytest.approx(a, abs=1e-9)
    assert mu_length(3.0 * pts, eps=3e-4) == pytest.approx(3.0 * a, abs=3e-3 * a)


def test_mu_length_collinear_insertion():
    pts = np.array([(0, 0), (1, 0), (1, 1)], float)
    dense = np.array([(0, 0), (0.3, 0), (1, 0), (1, 0.5), (1, 1)], float)
    assert abs(mu_length(pts, 1e-4) - mu_length(dense, 1e-4)) <= 2e-3


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1)), min_size=2, max_size=12))
def test_mu_length_diameter_bound(pts):
    line = Polyline(pts)
    if line.is_point:
        return
    assert mu_length(line, eps=1e-3) >= line.diameter / 2 - 1e-3


def test_mu_parameterize_segment():
    mp = mu_parameterize(segment(1.0, 3))
    assert np.allclose(mp.mu_cumulative, [0, LN2 / 2, LN2], atol=1e-3)
    one = mu_parameterize(segment(2.0, 2))
    assert np.allclose(one.mu_cumulative, [0, 2 * LN2], atol=1e-3)


def test_mu_cumulative_monotone():
    th = np.linspace(0, 3 * math.pi / 2, 60)
    mp = mu_parameterize(np.c_[np.cos(th), np.sin(th)], eps=1e-4)
    assert np.all(np.diff(mp.mu_cumulative) > 0)
    assert mp.mu_cumulative[-1] == mp.mu_total
    assert mp.mu_total >= mp.base.diameter / 2 - 1e-4


def test_resample_segment():
    pts = resample_by_mu(mu_parameterize(segment(1.0, 9)), 5).vertices
    assert np.allclose(pts[:, 0], [0, 0.25, 0.5, 0.75, 1.0], atol=2e-3)
    ends = resample_by_mu(mu_parameterize(segment(1.0, 9)), 2).vertices
    assert np.array_equal(ends, [[0, 0], [1, 0]])


def test_resample_l_shape_midpoint():
    L = Polyline([(0, 0), (1, 0), (1, 1)])
    mp = mu_parameterize(L, eps=1e-5)
    mid = resample_by_mu(mp, 3).vertices[1]
    prefix = Polyline([(0, 0), tuple(mid)]) if mid[1] == 0 else Polyline([(0, 0), (1, 0), tuple(mid)])
    assert mu_length(prefix, 1e-5) == pytest.approx(mp.mu_total / 2, abs=2e-3)


def test_resample_degenerate():
    with pytest.raises(ValueError):
        resample_by_mu(mu_parameterize(Polyline([(0.3, 0.3)])), 4)


def test_frechet_examples():
    a = segment(1.0, 11)
    b = Polyline(a.vertices + (0, 0.3))
    assert frechet(a, a) == 0.0
    assert frechet(a, b) == pytest.approx(0.3, abs=1e-12)
    assert frechet(a, a.reversed()) == pytest.approx(1.0, abs=1e-12)


def test_frechet_brute_force():
    rng = np.random.default_rng(1)
    P, Q = rng.random((5, 2)), rng.random((4, 2))

    def rec(i, j):
        d = np.hypot(*(P[i] - Q[j]))
        if i == 0 and j == 0:
            return d
        opts = []
        if i > 0:
            opts.append(rec(i - 1, j))
        if j > 0:
            opts.append(rec(i, j - 1))
        if i > 0 and j > 0:
            opts.append(rec(i - 1, j - 1))
        return max(d, min(opts))

    assert frechet(P, Q) == pytest.approx(rec(4, 3), abs=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_frechet_metric(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (np.cumsum(rng.normal(size=(rng.integers(2, 8), 2)), axis=0) for _ in range(3))
    assert frechet(a, b) == frechet(b, a)
    sp = 0.05
    assert frechet(a, c, sp) <= frechet(a, b, sp) + frechet(b, c, sp) + 2 * sp + 1e-12
    assert frechet(a, b) >= max(np.hypot(*(a[0] - b[0])), np.hypot(*(a[-1] - b[-1]))) - 1e-12


def test_polyline_simplicity():
    assert Polyline([(0, 0), (1, 0), (1, 1)]).is_simple()
    assert not Polyline([(0, 0), (1, 1), (1, 0), (0, 1)]).is_simple()
