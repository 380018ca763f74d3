import numpy as np
import pytest

from regdisk.domain import make_field
from regdisk.errors import DecompositionError, TrajectoryError
from regdisk.regularity import (
    check_elc,
    classify,
    decompose_boundary,
    trace_u_trajectory,
)

from conftest import WEAKLY_REGULAR, get_deco, get_field


def _tiles(deco):
    spans = sorted((a.s_begin % 1.0, a.s_end - a.s_begin) for a in deco.arcs)
    return sum(s for _, s in spans)


def test_square_y_decomposition():
    d = get_deco("square_y")
    shape = get_field("square_y").shape
    assert d.n_f == 2
    assert [a.kind for a in d.arcs] == ["monotone", "level"] * 2
    pts = shape.boundary_point(d.points)
    assert np.allclose(pts, [(1, 0), (1, 1), (0, 1), (0, 0)])
    g1, g2, g3, g4 = d.arcs
    assert g1.direction == "increasing" and g3.direction == "decreasing"
    assert g2.level == pytest.approx(1.0) and g4.level == pytest.approx(0.0)


def test_disk_y_decomposition():
    d = get_deco("disk_y")
    shape = get_field("disk_y").shape
    levels = d.level_arcs
    assert d.n_f == 2 and all(a.degenerate for a in levels)
    pts = {tuple(np.round(shape.boundary_point(a.s_begin), 6)) for a in levels}
    assert pts == {(0.0, 1.0), (0.0, -1.0)}


def test_xy_decomposition():
    d = get_deco("square_xy")
    shape = get_field("square_xy").shape
    amin, amax = d.extreme_arcs()
    assert d.n_f == 2
    assert amax.degenerate and np.allclose(shape.boundary_point(amax.s_begin), (1, 1))
    assert amin.s_end - amin.s_begin == pytest.approx(0.5)
    assert np.allclose(shape.boundary_point([amin.s_begin, amin.s_end]), [(0, 1), (1, 0)])
    mono = d.monotone_arcs
    edges = {tuple(np.round(shape.boundary_point((a.s_begin + a.s_end) / 2), 6)) for a in mono}
    assert edges == {(1.0, 0.5), (0.5, 1.0)}


@pytest.mark.parametrize("name", WEAKLY_REGULAR)
def test_arcs_tile_boundary(name):
    d = get_deco(name)
    assert _tiles(d) == pytest.approx(1.0, abs=1e-9)
    for a, b in zip(d.arcs, d.arcs[1:] + d.arcs[:1]):
        assert (a.s_end - b.s_begin) % 1.0 == pytest.approx(0.0, abs=1e-9) or (a.s_end - b.s_begin) % 1.0 == pytest.approx(1.0, abs=1e-9)
    kinds = [a.kind for a in d.arcs]
    assert kinds[0::2] == ["monotone"] * d.n_f and kinds[1::2] == ["level"] * d.n_f


@pytest.mark.parametrize("name", ["square_y", "square_xy", "disk_y", "half_y"])
def test_decomposition_stable_under_refinement(name):
    f = get_field(name)
    a, b = decompose_boundary(f, 400), decompose_boundary(f, 800)
    assert a.n_f == b.n_f
    for x, y in zip(a.arcs, b.arcs):
        assert abs((x.s_begin - y.s_begin + 0.5) % 1.0 - 0.5) <= 1 / 400


def test_constant_boundary_not_decomposable():
    f = make_field("square", lambda x, y: np.zeros_like(x), 17)
    with pytest.raises(DecompositionError):
        decompose_boundary(f)


@pytest.mark.parametrize("name", WEAKLY_REGULAR)
def test_weakly_regular(name):
    v = classify(get_field(name), get_deco(name))
    assert v.status == "weakly_regular"
    assert v.n_f == 2


def test_plateau_not_regular():
    v = classify(get_field("plateau"), get_deco("plateau"))
    assert v.status == "not_regular"
    located = [f for f in v.failures if "where" in f and isinstance(f["where"], list)]
    assert located and all(p["where"][1] >= 0.8 - 1e-9 for p in located)


def test_almost_weakly_regular_path():
    # f = 0 on the bottom edge, but the zero set continues up the line x = 1/2
    f = make_field("square", lambda x, y: (x - 0.5) * y, 65)
    v = classify(f)
    assert v.status == "almost_weakly_regular"
    assert v.n_f == 3
    assert any("not a full level component" in x.get("condition", "") for x in v.failures)


def test_verdict_json_shape():
    d = classify(get_field("square_y")).as_dict()
    assert set(d) == {"status", "n_f", "arcs", "failures", "extremum_points"}
    assert {"kind", "s_begin", "s_end", "direction"} <= set(d["arcs"][0])


def test_trajectory_vertical():
    t = trace_u_trajectory(get_field("square_y"), (0.5, 0.2))
    assert np.allclose(t.vertices[:, 0], 0.5)
    assert np.allclose(t.vertices[-1], (0.5, 1.0))


def test_trajectory_y2():
    t = trace_u_trajectory(get_field("square_y2"), (0.5, 0.5))
    assert t.values[0] == pytest.approx(0.25)
    assert t.values[-1] == pytest.approx(1.0)
    assert np.all(np.diff(t.values) > 0)


def test_trajectory_xy():
    t = trace_u_trajectory(get_field("square_xy"), (0.5, 0.5))
    end = t.vertices[-1]
    assert np.all(np.diff(t.values) > 0)
    assert end[0] == pytest.approx(1.0) or end[1] == pytest.approx(1.0)
    assert t.curve.is_simple(get_field("square_xy").h / 4)


def test_trajectory_descending_and_degenerate_start():
    t = trace_u_trajectory(get_field("square_y"), (0.3, 0.7), direction=-1)
    assert np.all(np.diff(t.values) < 0)
    assert t.vertices[-1][1] == pytest.approx(0.0)
    with pytest.raises(TrajectoryError):
        trace_u_trajectory(get_field("plateau"), (0.5, 0.9))


def test_elc():
    assert check_elc(get_field("square_y"), (0.5, 0.5), 0.1) == pytest.approx(0.1)
    assert check_elc(get_field("square_xy"), (0.5, 0.5), 0.1) > 0
    plateau = check_elc(get_field("plateau"), (0.5, 0.8), 0.1, decomposition=get_deco("plateau"))
    assert 0.0 <= plateau <= 0.1
