"""Discrete rectifying homeomorphisms ``H: model -> D`` with ``f(H(x, y)) = a y + b``.

A homeomorphism is stored as the images of a lattice that is regular in the
fiber chart ``(tau, row)`` of the model shape (square, half-disk or disk).
Row ``j`` of the lattice is sent onto the level curve of ``f`` at the target
value of that row, and ``tau`` runs along the curve at equal mu-increments.
Near a degenerate extremum the level curves shrink to a point; there the
construction stops at a small level curve and fills the remaining cap with a
fan of segments towards the extremum, each point placed on its exact level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Any, Callable

import numpy as np
from numba import njit
from scipy.spatial import cKDTree

from .curves import MuParamCurve, Polyline, mu_parameterize, mu_points
from .domain import DomainShape, ScalarField
from .errors import LevelStructureError, RectifyError
from .levelsets import arc_curve, extract_level
from .regularity import Arc, BoundaryDecomposition, classify, decompose_boundary


def tol_rect(field: ScalarField) -> float:
    return 3.0 * field.h * (1.0 + field.max_grad)


# -- homeomorphism container ----------------------------------------------------


@dataclass(frozen=True, eq=False)
class DiscreteHomeomorphism:
    """Images ``grid[i, j] = H(P(tau[i], rows[j]))`` of a chart lattice on ``target_shape``.

    ``target_shape`` carries the lattice and ``source_shape`` contains the
    images, so a rectification is stored as the map model -> D.
    """

    source_shape: DomainShape
    target_shape: DomainShape
    tau: np.ndarray
    rows: np.ndarray
    grid: np.ndarray
    residual: float
    orientation_ok: bool
    a: float = 1.0
    b: float = 0.0
    seam_mismatch: float = 0.0
    info: dict = dc_field(default_factory=dict)

    @property
    def k(self) -> int:
        return len(self.tau)

    @property
    def m(self) -> int:
        return len(self.rows)

    @property
    def model_points(self) -> np.ndarray:
        T, R = np.meshgrid(self.tau, self.rows, indexing="ij")
        return self.target_shape.from_chart(T, R)

    @property
    def spacing(self) -> float:
        """Largest lattice step on the target shape."""
        P = self.model_points
        dx = np.hypot(*np.diff(P, axis=0).transpose(2, 0, 1)).max() if self.k > 1 else 0.0
        dy = np.hypot(*np.diff(P, axis=1).transpose(2, 0, 1)).max() if self.m > 1 else 0.0
        return float(max(dx, dy))

    def target_value(self, y):
        return self.a * np.asarray(y, dtype=float) + self.b

    def __call__(self, p) -> np.ndarray:
        """Bilinear interpolation of the lattice images at points ``p`` of the target shape."""
        p = np.asarray(p, dtype=float)
        tau, row = self.target_shape.to_chart(p)
        i = np.clip(np.searchsorted(self.tau, tau, side="right") - 1, 0, self.k - 2)
        j = np.clip(np.searchsorted(self.rows, row, side="right") - 1, 0, self.m - 2)
        s = np.clip((tau - self.tau[i]) / (self.tau[i + 1] - self.tau[i]), 0.0, 1.0)[..., None]
        t = np.clip((row - self.rows[j]) / (self.rows[j + 1] - self.rows[j]), 0.0, 1.0)[..., None]
        G = self.grid
        return (1 - s) * (1 - t) * G[i, j] + s * (1 - t) * G[i + 1, j] + s * t * G[i + 1, j + 1] + (1 - s) * t * G[i, j + 1]

    def as_dict(self) -> dict[str, Any]:
        return {
            "source_shape": self.source_shape.kind,
            "target_shape": self.target_shape.kind,
            "tau": self.tau.tolist(),
            "rows": self.rows.tolist(),
            "grid": self.grid.tolist(),
            "residual": self.residual,
            "orientation_ok": self.orientation_ok,
            "a": self.a,
            "b": self.b,
            "seam_mismatch": self.seam_mismatch,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "DiscreteHomeomorphism":
        grid = np.asarray(d["grid"], dtype=float)
        return cls(
            DomainShape(d["source_shape"]),
            DomainShape(d["target_shape"]),
            np.asarray(d["tau"], dtype=float),
            np.asarray(d["rows"], dtype=float),
            grid,
            float(d["residual"]) if d.get("residual") is not None else math.nan,
            bool(d.get("orientation_ok", quad_orientation_ok(grid))),
            float(d.get("a", 1.0)),
            float(d.get("b", 0.0)),
            float(d.get("seam_mismatch", 0.0)),
        )


def quad_areas(grid: np.ndarray) -> np.ndarray:
    """Signed (shoelace) areas of the mapped lattice cells."""
    A, B = grid[:-1, :-1], grid[1:, :-1]
    C, D = grid[1:, 1:], grid[:-1, 1:]

    def cross(p, q):
        return p[..., 0] * q[..., 1] - p[..., 1] * q[..., 0]

    return 0.5 * (cross(A, B) + cross(B, C) + cross(C, D) + cross(D, A))


def quad_orientation_ok(grid: np.ndarray) -> bool:
    return bool(np.all(quad_areas(grid) > 0.0))


def residual_of(field: ScalarField, H: DiscreteHomeomorphism) -> float:
    """Independent re-evaluation of ``max |f(H(x, y)) - (a y + b)|`` over the lattice."""
    vals = field.eval(H.grid, check=False)
    return float(np.max(np.abs(vals - H.target_value(H.rows)[None, :])))


# -- band charts ----------------------------------------------------------------------


def _as_func(v) -> Callable:
    if callable(v):
        return v
    c = float(v)
    return lambda u: np.full(np.shape(u), c)


@dataclass(frozen=True, eq=False)
class BandChart:
    """``G(u, t) = (u, t beta(u) + (1 - t) alpha(u))`` for ``u`` in ``[lo, hi]``.

    With ``transpose`` the fibers are horizontal and ``G`` returns
    ``(t beta(u) + (1 - t) alpha(u), u)``.
    """

    alpha: Callable
    beta: Callable
    lo: float
    hi: float
    transpose: bool = False

    def __call__(self, u, t) -> np.ndarray:
        u, t = np.broadcast_arrays(np.asarray(u, float), np.asarray(t, float))
        w = t * self.beta(u) + (1.0 - t) * self.alpha(u)
        return np.stack([w, u] if self.transpose else [u, w], axis=-1)

    def inverse(self, p) -> tuple[np.ndarray, np.ndarray]:
        p = np.asarray(p, dtype=float)
        u, w = (p[..., 1], p[..., 0]) if self.transpose else (p[..., 0], p[..., 1])
        al, be = self.alpha(u), self.beta(u)
        return u, (w - al) / (be - al)


def band_chart(alpha, beta, lo: float, hi: float, transpose: bool = False, samples: int = 257) -> BandChart:
    """Fiberwise-affine chart of ``{alpha(u) <= w <= beta(u)}``; requires ``alpha < beta``."""
    chart = BandChart(_as_func(alpha), _as_func(beta), float(lo), float(hi), transpose)
    u = np.linspace(lo, hi, samples)
    if np.any(chart.alpha(u) >= chart.beta(u)):
        raise RectifyError("band chart needs alpha < beta on the whole interval")
    return chart


def model_band_chart(shape: DomainShape, a: float, b: float) -> BandChart:
    """Horizontal-fiber chart of the model between heights ``a`` and ``b``.

    Fibers may collapse at the poles of the disk models, so no strictness
    check is made here.
    """
    if shape.kind == "square":
        return BandChart(_as_func(0.0), _as_func(1.0), a, b, True)
    return BandChart(lambda u: -shape.half_width(u), shape.half_width, a, b, True)


# -- bands ------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Band:
    """Region between two level curves, rectified onto model heights ``[a, b]``."""

    a: float
    b: float
    lower: MuParamCurve
    upper: MuParamCurve
    f0: float
    f1: float
    chart: BandChart
    reverse: bool = False

    def __post_init__(self):
        if self.f0 == self.f1:
            raise RectifyError("band needs distinct levels f0 != f1")
        if not self.b > self.a:
            raise RectifyError("band needs a < b")

    def target(self, y):
        y = np.asarray(y, dtype=float)
        return ((self.b - y) * self.f0 + (y - self.a) * self.f1) / (self.b - self.a)


@dataclass(frozen=True, eq=False)
class BandPiece:
    rows: np.ndarray
    model_points: np.ndarray
    points: np.ndarray
    lower_edge: np.ndarray
    upper_edge: np.ndarray


def _mu_curve(poly: Polyline, h: float, reverse: bool) -> MuParamCurve:
    if reverse:
        poly = poly.reversed()
    if poly.is_point:
        return mu_parameterize(poly)
    res = int(np.clip(math.ceil(8.0 * poly.length / h), 64, 1024))
    return mu_parameterize(poly, eps=h / 16.0, resolution=res)


def _level_poly(field: ScalarField, deco: BoundaryDecomposition, c: float) -> Polyline:
    comps = extract_level(field, deco, float(c))
    if len(comps) != 1:
        raise LevelStructureError(f"level {c} has {len(comps)} components")
    return comps[0].curve


def rectify_band(
    field: ScalarField,
    band: Band,
    k: int,
    rows=None,
    decomposition: BoundaryDecomposition | None = None,
) -> BandPiece:
    """Rectify a band: row ``y`` goes onto the level ``band.target(y)`` at equal mu-steps."""
    if decomposition is None:
        decomposition = decompose_boundary(field)
    if rows is None:
        rows = np.linspace(band.a, band.b, max(2, k))
    rows = np.asarray(rows, dtype=float)
    tau = np.linspace(0.0, 1.0, k)
    pts = np.empty((k, len(rows), 2))
    for j, y in enumerate(rows):
        if y <= band.a:
            curve = band.lower
        elif y >= band.b:
            curve = band.upper
        else:
            curve = _mu_curve(_level_poly(field, decomposition, band.target(y)), field.h, band.reverse)
        pts[:, j] = mu_points(curve, tau)
    T, R = np.meshgrid(tau, rows, indexing="ij")
    return BandPiece(rows, band.chart(R, T), pts, mu_points(band.lower, tau), mu_points(band.upper, tau))


# -- caps -------------------------------------------------------------------------------


def _cap_level(field, deco, norm, v, start: float, eps_cap: float, top: bool, max_iter: int = 60):
    """Normalized level ``c_K`` whose cap around ``v`` has diameter <= eps_cap."""
    nodes = field.nodes()[field.mask]
    gv = norm(field.values[field.mask])
    c = start
    for _ in range(max_iter):
        c = 1.0 - (1.0 - c) / 2.0 if top else c / 2.0
        sel = nodes[gv >= c] if top else nodes[gv <= c]
        poly = _level_poly(field, deco, norm.inverse(c))
        pts = np.vstack([sel, poly.vertices, v[None, :]])
        r = np.hypot(*(pts - v).T).max()
        if r > eps_cap:
            continue
        d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1)).max()
        if d <= eps_cap:
            return c, poly
    raise RectifyError("cap diameter not shrinking: the extremum is not isolated")


def _fan(field, norm, base_pts: np.ndarray, v: np.ndarray, targets: np.ndarray, iters: int = 60) -> np.ndarray:
    """Points on the segments ``base -> v`` whose normalized value equals each target."""
    out = np.empty((len(base_pts), len(targets), 2))
    gb = norm(field.eval(base_pts, check=False))
    gvv = float(norm(field.eval(v, check=False)))
    for j, t in enumerate(targets):
        sgn = 1.0 if gvv >= gb.mean() else -1.0
        lo = np.zeros(len(base_pts))
        hi = np.ones(len(base_pts))
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            q = base_pts + mid[:, None] * (v - base_pts)
            below = sgn * (norm(field.eval(q, check=False)) - t) < 0
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        lam = 0.5 * (lo + hi)
        out[:, j] = base_pts + lam[:, None] * (v - base_pts)
    return out


# -- main construction ------------------------------------------------------------------


class _Norm:
    """``g = (f - f0) / (f1 - f0)`` and its inverse."""

    def __init__(self, f0: float, f1: float):
        self.f0, self.f1 = f0, f1

    def __call__(self, f):
        return (np.asarray(f, dtype=float) - self.f0) / (self.f1 - self.f0)

    def inverse(self, g):
        return self.f0 + np.asarray(g, dtype=float) * (self.f1 - self.f0)


def _end_curve(field, deco, arc: Arc) -> Polyline:
    return arc_curve(field, deco, arc)


def _rectify(field, deco, model: str, m: int, k: int, eps_cap: float | None) -> DiscreteHomeomorphism:
    if m < 3 or k < 2:
        raise ValueError("need m >= 3 levels and k >= 2 samples")
    h = field.h
    eps_cap = 2.0 * h if eps_cap is None else float(eps_cap)
    amin, amax = deco.extreme_arcs()
    if model == "half_disk":
        base, apex = (amin, amax) if amax.degenerate else (amax, amin)
    else:
        base, apex = amin, amax
    f0, f1 = float(base.level), float(apex.level)
    if f0 == f1:
        raise RectifyError("f0 = f1: the field is constant on its extreme level arcs")
    norm = _Norm(f0, f1)
    reverse = f1 < f0
    shape = DomainShape(model)
    lo, hi = shape.row_range
    rows = np.linspace(lo, hi, m)
    tau = np.linspace(0.0, 1.0, k)
    g_rows = (rows - lo) / (hi - lo)

    def curve_at(g: float, poly: Polyline | None = None) -> MuParamCurve:
        if g <= 0.0:
            poly = _end_curve(field, deco, base)
        elif g >= 1.0:
            poly = _end_curve(field, deco, apex)
        elif poly is None:
            poly = _level_poly(field, deco, norm.inverse(g))
        return _mu_curve(poly, h, reverse)

    # breakpoints in normalized level and optional caps
    top_cap = bottom_cap = None
    if model == "square":
        breaks = [0.0, 1.0]
    else:
        start = 0.0 if model == "half_disk" else 0.5
        vt = field.shape.boundary_point(apex.s_begin)
        ck, poly = _cap_level(field, deco, norm, vt, start, eps_cap, top=True)
        top_cap = (ck, vt, poly)
        ups = [start]
        while ups[-1] < ck:
            ups.append(1.0 - (1.0 - ups[-1]) / 2.0)
        breaks = ups
        if model == "disk":
            vb = field.shape.boundary_point(base.s_begin)
            cb, pb = _cap_level(field, deco, norm, vb, 0.5, eps_cap, top=False)
            bottom_cap = (cb, vb, pb)
            downs = [0.5]
            while downs[-1] > cb:
                downs.append(downs[-1] / 2.0)
            breaks = downs[::-1] + ups[1:]

    cache: dict[float, MuParamCurve] = {}

    def band_curve(g):
        if g not in cache:
            pre = None
            if top_cap is not None and g == top_cap[0]:
                pre = top_cap[2]
            if bottom_cap is not None and g == bottom_cap[0]:
                pre = bottom_cap[2]
            cache[g] = curve_at(g, pre)
        return cache[g]

    grid = np.empty((k, m, 2))
    seam = 0.0
    prev_upper = None
    for ga, gb in zip(breaks[:-1], breaks[1:]):
        ya, yb = lo + ga * (hi - lo), lo + gb * (hi - lo)
        band = Band(ya, yb, band_curve(ga), band_curve(gb), norm.inverse(ga), norm.inverse(gb), model_band_chart(shape, ya, yb), reverse)
        sel = (g_rows >= ga) & ((g_rows < gb) | ((gb == breaks[-1]) & (g_rows <= gb)))
        piece = rectify_band(field, band, k, rows[sel], deco)
        grid[:, sel] = piece.points
        if prev_upper is not None:
            seam = max(seam, float(np.abs(prev_upper - piece.lower_edge).max()))
        prev_upper = piece.upper_edge

    for cap, end in ((top_cap, 1.0), (bottom_cap, 0.0)):
        if cap is None:
            continue
        ck, v, _ = cap
        sel = (g_rows > ck) if end == 1.0 else (g_rows < ck)
        if not sel.any():
            continue
        base_pts = mu_points(band_curve(ck), tau)
        targets = g_rows[sel]
        pts = _fan(field, norm, base_pts, v, targets)
        pts[:, targets == end] = v
        grid[:, sel] = pts

    if model == "disk":
        a, b = (f1 - f0) / 2.0, (f0 + f1) / 2.0
    else:
        a, b = f1 - f0, f0
    H = DiscreteHomeomorphism(field.shape, shape, tau, rows, grid, 0.0, quad_orientation_ok(grid), a, b, seam, {"breaks": list(map(float, breaks)), "eps_cap": eps_cap})
    return _with_residual(field, H)


def _with_residual(field, H):
    return DiscreteHomeomorphism(H.source_shape, H.target_shape, H.tau, H.rows, H.grid, residual_of(field, H), H.orientation_ok, H.a, H.b, H.seam_mismatch, H.info)


def _prepare(field, decomposition):
    if decomposition is None:
        decomposition = decompose_boundary(field)
    verdict = classify(field, decomposition)
    if verdict.status != "weakly_regular":
        reasons = "; ".join(sorted({f.get("condition", "") for f in verdict.failures}))
        raise RectifyError(f"field is {verdict.status}: {reasons}")
    return decomposition


def _check_model(deco: BoundaryDecomposition, model: str) -> None:
    amin, amax = deco.extreme_arcs()
    n_deg = int(amin.degenerate) + int(amax.degenerate)
    if model == "square" and n_deg:
        raise RectifyError("square model needs two nondegenerate level arcs")
    if model == "half_disk" and n_deg != 1:
        raise RectifyError("half-disk model needs exactly one degenerate extremum")
    if model == "disk" and n_deg != 2:
        raise RectifyError("disk model needs two degenerate extrema")


def _structure(field, decomposition, what: str) -> BoundaryDecomposition:
    if decomposition is None:
        decomposition = decompose_boundary(field)
    if decomposition.n_f != 2:
        raise RectifyError(f"{what}: the boundary has {decomposition.n_f} monotone arcs")
    return _prepare(field, decomposition)


def rectify_affine(field: ScalarField, m: int = 65, k: int = 65, decomposition=None) -> DiscreteHomeomorphism:
    """Square model: ``f(H(x, y)) = (1 - y) f0 + y f1`` with ``f0, f1`` the two level-arc values."""
    deco = _prepare(field, decomposition)
    _check_model(deco, "square")
    return _rectify(field, deco, "square", m, k, None)


def rectify_square(field: ScalarField, m: int = 65, k: int = 65, decomposition=None) -> DiscreteHomeomorphism:
    """Square model for a field equal to 0 and 1 on its two level arcs."""
    deco = _prepare(field, decomposition)
    _check_model(deco, "square")
    amin, amax = deco.extreme_arcs()
    if abs(amin.level) > deco.tol_level or abs(amax.level - 1.0) > deco.tol_level:
        raise RectifyError("rectify_square needs f = 0 and f = 1 on the level arcs; use rectify_affine")
    return _rectify(field, deco, "square", m, k, None)


def rectify_half_disk(field: ScalarField, eps_cap: float | None = None, k: int = 65, m: int = 65, decomposition=None) -> DiscreteHomeomorphism:
    """Half-disk model: one nondegenerate level arc (diameter) and one boundary extremum ``v``."""
    deco = _structure(field, decomposition, "multiple extrema")
    _check_model(deco, "half_disk")
    return _rectify(field, deco, "half_disk", m, k, eps_cap)


def rectify_disk(field: ScalarField, eps_cap: float | None = None, k: int = 65, m: int = 65, decomposition=None) -> DiscreteHomeomorphism:
    """Disk model: two isolated boundary extrema ``v-`` and ``v+``."""
    deco = _structure(field, decomposition, "extrema not isolated")
    _check_model(deco, "disk")
    return _rectify(field, deco, "disk", m, k, eps_cap)


def select_model(decomposition: BoundaryDecomposition) -> str:
    amin, amax = decomposition.extreme_arcs()
    n = int(amin.degenerate) + int(amax.degenerate)
    return ("square", "half_disk", "disk")[n]


def rectify_auto(field: ScalarField, m: int = 65, k: int = 65, eps_cap: float | None = None, decomposition=None, model: str = "auto") -> DiscreteHomeomorphism:
    """Pick the model from the number of degenerate level arcs and rectify."""
    deco = _structure(field, decomposition, "classification failed")
    if model == "auto":
        model = select_model(deco)
    if model not in ("square", "half_disk", "disk"):
        raise ValueError(f"unknown model {model!r}")
    _check_model(deco, model)
    return _rectify(field, deco, model, m, k, eps_cap)


# -- inversion ----------------------------------------------------------------------------


@njit(cache=True)
def _patch_inverse(A, B, C, D, px, py):
    s = 0.5
    t = 0.5
    for _ in range(40):
        x = (1 - s) * (1 - t) * A[0] + s * (1 - t) * B[0] + s * t * C[0] + (1 - s) * t * D[0]
        y = (1 - s) * (1 - t) * A[1] + s * (1 - t) * B[1] + s * t * C[1] + (1 - s) * t * D[1]
        rx = x - px
        ry = y - py
        xs = (1 - t) * (B[0] - A[0]) + t * (C[0] - D[0])
        ys = (1 - t) * (B[1] - A[1]) + t * (C[1] - D[1])
        xt = (1 - s) * (D[0] - A[0]) + s * (C[0] - B[0])
        yt = (1 - s) * (D[1] - A[1]) + s * (C[1] - B[1])
        det = xs * yt - xt * ys
        if abs(det) < 1e-300:
            break
        ds = (rx * yt - ry * xt) / det
        dt = (xs * ry - ys * rx) / det
        s -= ds
        t -= dt
        s = min(max(s, -1.0), 2.0)
        t = min(max(t, -1.0), 2.0)
        if abs(ds) + abs(dt) < 1e-14:
            break
    s = min(max(s, 0.0), 1.0)
    t = min(max(t, 0.0), 1.0)
    best = _patch_dist(A, B, C, D, s, t, px, py)
    # collapsed patches can stall Newton; corners are always candidates
    for cs, ct in ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)):
        d = _patch_dist(A, B, C, D, cs, ct, px, py)
        if d < best:
            best, s, t = d, cs, ct
    return s, t, best


@njit(cache=True)
def _patch_dist(A, B, C, D, s, t, px, py):
    x = (1 - s) * (1 - t) * A[0] + s * (1 - t) * B[0] + s * t * C[0] + (1 - s) * t * D[0]
    y = (1 - s) * (1 - t) * A[1] + s * (1 - t) * B[1] + s * t * C[1] + (1 - s) * t * D[1]
    return math.sqrt((x - px) ** 2 + (y - py) ** 2)


@njit(cache=True)
def _locate(grid, pts, ni, nj, radius, scale):
    k = grid.shape[0]
    m = grid.shape[1]
    n = pts.shape[0]
    uv = np.zeros((n, 2))
    score = np.full(n, np.inf)
    for q in range(n):
        px = pts[q, 0]
        py = pts[q, 1]
        for sweep in range(2):
            if sweep == 0:
                i0, i1 = max(ni[q] - radius, 0), min(ni[q] + radius, k - 2)
                j0, j1 = max(nj[q] - radius, 0), min(nj[q] + radius, m - 2)
            else:
                if score[q] <= 1e-9:
                    break
                i0, i1, j0, j1 = 0, k - 2, 0, m - 2
            for i in range(i0, i1 + 1):
                for j in range(j0, j1 + 1):
                    s, t, res = _patch_inverse(grid[i, j], grid[i + 1, j], grid[i + 1, j + 1], grid[i, j + 1], px, py)
                    sc = res / scale
                    if sc < score[q]:
                        score[q] = sc
                        uv[q, 0] = i + s
                        uv[q, 1] = j + t
    return uv, score


def locate(H: DiscreteHomeomorphism, pts) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Chart coordinates ``(tau, row)`` with ``H(tau, row) = p``.

    The score is the distance from ``p`` to the located point in units of
    the lattice spacing (0 when ``p`` lies in the mapped lattice).
    """
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    G = np.ascontiguousarray(H.grid)
    flat = G.reshape(-1, 2)
    _, idx = cKDTree(flat).query(pts)
    ni, nj = np.divmod(idx, H.m)
    uv, score = _locate(G, pts, ni.astype(np.int64), nj.astype(np.int64), 2, max(H.spacing, 1e-12))
    i = np.clip(np.floor(uv[:, 0]).astype(int), 0, H.k - 2)
    j = np.clip(np.floor(uv[:, 1]).astype(int), 0, H.m - 2)
    tau = H.tau[i] + (uv[:, 0] - i) * (H.tau[i + 1] - H.tau[i])
    row = H.rows[j] + (uv[:, 1] - j) * (H.rows[j + 1] - H.rows[j])
    return tau, row, score


def invert(H: DiscreteHomeomorphism, k: int | None = None, m: int | None = None, tol: float = 0.5) -> DiscreteHomeomorphism:
    """Numerical inverse on a chart lattice of ``H.source_shape``."""
    k = k or H.k
    m = m or H.m
    src = H.source_shape
    tau = np.linspace(0.0, 1.0, k)
    rows = np.linspace(*src.row_range, m)
    T, R = np.meshgrid(tau, rows, indexing="ij")
    P = src.from_chart(T, R).reshape(-1, 2)
    t_img, r_img, score = locate(H, P)
    if np.any(score > tol):
        raise RectifyError("point not locatable in the mapped lattice (orientation defect)")
    grid = H.target_shape.from_chart(t_img, r_img).reshape(k, m, 2)
    return DiscreteHomeomorphism(H.target_shape, src, tau, rows, grid, math.nan, quad_orientation_ok(grid), H.a, H.b)
