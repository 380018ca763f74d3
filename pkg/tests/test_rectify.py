import numpy as np
import pytest

from regdisk.domain import DomainShape, make_field
from regdisk.errors import RectifyError
from regdisk.rectify import (
    DiscreteHomeomorphism,
    band_chart,
    invert,
    quad_areas,
    rectify_affine,
    rectify_auto,
    rectify_band,
    rectify_disk,
    rectify_half_disk,
    rectify_square,
    residual_of,
    tol_rect,
    Band,
    model_band_chart,
    _mu_curve,
)
from regdisk.levelsets import extract_level

from conftest import get_deco, get_field


@pytest.fixture(scope="module")
def H_y():
    return rectify_square(get_field("square_y"), m=33, k=33)


@pytest.fixture(scope="module")
def H_y2():
    return rectify_square(get_field("square_y2"), m=33, k=33)


def test_square_identity(H_y):
    h = get_field("square_y").h
    assert np.abs(H_y.grid - H_y.model_points).max() <= h
    assert H_y.orientation_ok
    assert (H_y.a, H_y.b) == (1.0, 0.0)


def test_square_boundary_rows_fixed(H_y2):
    h = get_field("square_y2").h
    P = H_y2.model_points
    assert np.abs(H_y2.grid[:, 0] - P[:, 0]).max() <= h
    assert np.abs(H_y2.grid[:, -1] - P[:, -1]).max() <= h


def test_square_sqrt(H_y2):
    P = H_y2.model_points
    expected = np.stack([P[..., 0], np.sqrt(P[..., 1])], -1)
    assert np.abs(H_y2.grid - expected).max() <= 2 * get_field("square_y2").h


def test_square_warped_residual():
    f = get_field("square_warped")
    H = rectify_square(f, m=33, k=33)
    assert H.residual <= 2 * f.h
    assert residual_of(f, H) == pytest.approx(H.residual)
    assert H.orientation_ok


def test_rectify_square_needs_unit_levels():
    with pytest.raises(RectifyError):
        rectify_square(make_field("square", lambda x, y: 2 * y + 3, 65))


def test_affine_identity():
    f = make_field("square", lambda x, y: 2 * y + 3, 65)
    H = rectify_affine(f, m=17, k=17)
    assert (H.a, H.b) == pytest.approx((2.0, 3.0))
    assert np.abs(H.grid - H.model_points).max() <= f.h


def test_affine_scaled_sqrt():
    f = make_field("square", lambda x, y: 3 + 2 * y * y, 129)
    H = rectify_affine(f, m=17, k=17)
    P = H.model_points
    assert np.abs(H.grid - np.stack([P[..., 0], np.sqrt(P[..., 1])], -1)).max() <= 2 * f.h


def test_affine_constant_rejected():
    f = make_field("square", lambda x, y: np.full_like(x, 4.0), 17)
    with pytest.raises(ValueError):
        rectify_affine(f)


def test_band_chart_examples():
    G = band_chart(0.0, 1.0, 0.0, 1.0)
    assert np.allclose(G(0.3, 0.7), (0.3, 0.7))
    G = band_chart(0.0, lambda x: 1 + x, 0.0, 1.0)
    assert np.allclose(G(0.5, 0.5), (0.5, 0.75))
    w = lambda y: np.sqrt(1 - y * y)
    G = band_chart(lambda y: -w(y), w, 0.0, 0.5, transpose=True)
    rng = np.random.default_rng(0)
    u, t = rng.uniform(0, 0.5, 100), rng.uniform(0, 1, 100)
    u2, t2 = G.inverse(G(u, t))
    assert np.abs(u2 - u).max() <= 1e-12 and np.abs(t2 - t).max() <= 1e-12
    with pytest.raises(RectifyError):
        band_chart(1.0, 0.0, 0.0, 1.0)


def _band(name, c0, c1, model, a, b):
    f, d = get_field(name), get_deco(name)
    lo = _mu_curve(extract_level(f, d, c0)[0].curve, f.h, False)
    hi = _mu_curve(extract_level(f, d, c1)[0].curve, f.h, False)
    return f, d, Band(a, b, lo, hi, c0, c1, model_band_chart(DomainShape(model), a, b))


def test_band_identity():
    f, d, band = _band("square_y", 0.2, 0.6, "square", 0.2, 0.6)
    piece = rectify_band(f, band, 17, decomposition=d)
    assert np.abs(piece.points - piece.model_points).max() <= f.h


def test_band_sqrt_scaling():
    f, d = get_field("square_y2"), get_deco("square_y2")
    from regdisk.levelsets import arc_curve

    lo = _mu_curve(arc_curve(f, d, d.extreme_arcs()[0]), f.h, False)
    hi = _mu_curve(extract_level(f, d, 0.25)[0].curve, f.h, False)
    band = Band(0.0, 0.5, lo, hi, 0.0, 0.25, model_band_chart(DomainShape("square"), 0.0, 0.5))
    piece = rectify_band(f, band, 9, rows=np.linspace(0, 0.5, 11), decomposition=d)
    want = np.sqrt(piece.rows * 0.25 / 0.5)
    assert np.abs(piece.points[..., 1] - want[None, :]).max() <= 2 * f.h


def test_band_disk_chords():
    f, d, band = _band("disk_y", 1e-9, 0.5, "disk", 1e-9, 0.5)
    piece = rectify_band(f, band, 17, decomposition=d)
    assert np.abs(piece.points - piece.model_points).max() <= 2 * f.h


@pytest.mark.parametrize("name,model", [("half_y", "half_disk"), ("disk_y", "disk")])
def test_model_identity(name, model):
    f = get_field(name)
    H = rectify_auto(f, m=33, k=33)
    assert H.target_shape.kind == model
    assert np.abs(H.grid - H.model_points).max() <= 2 * f.h
    assert (H.a, H.b) == pytest.approx((1.0, 0.0))
    assert H.orientation_ok and H.seam_mismatch <= f.h


def test_half_disk_power():
    f = get_field("half_y15")
    H = rectify_half_disk(f, k=17, m=33)
    eps_cap = H.info["eps_cap"]
    assert H.residual <= 2 * f.h + eps_cap
    rows = H.model_points[..., 1]
    interior = H.rows < 0.95
    assert np.abs(H.grid[:, interior, 1] - rows[:, interior] ** (2 / 3)).max() <= 2 * f.h


def test_half_disk_two_maxima():
    # dip at the top of the arc splits the maximum in two
    f = make_field("half_disk", lambda x, y: y * (1 - 0.8 * np.exp(-((x / 0.3) ** 2))), 129)
    with pytest.raises(RectifyError, match="multiple extrema"):
        rectify_half_disk(f)


def test_disk_target_formula():
    f = make_field("disk", lambda x, y: 2 + 3 * y, 129)
    H = rectify_disk(f, k=17, m=17)
    fm, fp = -1.0 * 3 + 2, 3 + 2
    y = H.rows
    target = ((1 - y) * fm + (1 + y) * fp) / 2
    assert np.allclose(H.target_value(y), target)
    assert H.residual <= tol_rect(f)


def test_disk_perturbed():
    f = get_field("disk_perturbed")
    H = rectify_disk(f, k=33, m=33)
    assert H.residual <= 3 * f.h
    assert H.orientation_ok


def test_disk_cubic_spot():
    f = get_field("disk_y3")
    H = rectify_disk(f, k=33, m=65)
    assert np.allclose(H((0.0, 0.5)), (0.0, 0.5 ** (1 / 3)), atol=2 * f.h)


def test_auto_models():
    assert rectify_auto(get_field("square_y"), m=9, k=9).target_shape.kind == "square"
    H = rectify_auto(get_field("square_xy"), m=17, k=17)
    assert H.target_shape.kind == "half_disk"
    assert H.residual <= tol_rect(get_field("square_xy")) and H.orientation_ok
    with pytest.raises(RectifyError):
        rectify_auto(get_field("plateau"))


def test_refinement_does_not_blow_up():
    f = get_field("square_warped")
    r1 = rectify_auto(f, m=17, k=17).residual
    r2 = rectify_auto(f, m=33, k=33).residual
    assert r2 <= 1.5 * r1 + 1e-12


def test_invert_identity():
    shape = DomainShape("square")
    tau = np.linspace(0, 1, 9)
    P = shape.lattice(9, 9)
    H = DiscreteHomeomorphism(shape, shape, tau, tau, P, 0.0, True)
    I = invert(H)
    assert np.abs(I.grid - I.model_points).max() <= 1e-12


def test_invert_sqrt(H_y2):
    I = invert(H_y2)
    P = I.model_points
    assert np.abs(I.grid - np.stack([P[..., 0], P[..., 1] ** 2], -1)).max() <= 2 * H_y2.spacing
    II = invert(I)
    assert np.abs(II.grid - H_y2.grid).max() <= 4 * H_y2.spacing


def test_invert_disk_roundtrip():
    H = rectify_auto(get_field("disk_perturbed"), m=33, k=33)
    I = invert(H)
    assert np.abs(H(I.grid) - I.model_points).max() <= 2 * H.spacing


def test_quad_areas_sign():
    shape = DomainShape("square")
    P = shape.lattice(3, 3)
    assert np.all(quad_areas(P) > 0)
    Q = P.copy()
    Q[1, 1] = (0.9, 0.9)
    Q[2, 2] = (0.2, 0.2)
    assert not np.all(quad_areas(Q) > 0)


def test_json_roundtrip(H_y2):
    H = DiscreteHomeomorphism.from_dict(H_y2.as_dict())
    assert np.array_equal(H.grid, H_y2.grid) and H.residual == H_y2.residual
