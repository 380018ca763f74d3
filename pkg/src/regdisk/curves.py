"""Plane polylines, mu-length, mu-parameterization and discrete Frechet distance.

``mu_n`` of a curve is the largest possible minimum gap in an ordered chain
of ``n + 1`` points taken along the curve.  It is computed exactly over a
uniform arclength refinement of the curve by a bottleneck dynamic program
that yields ``mu_n`` for every prefix of the curve at once, which is what the
mu-parameterization needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

_MIN_RES = 64
_MAX_RES = 2048


@dataclass(frozen=True, eq=False)
class Polyline:
    """Ordered plane curve; consecutive duplicate vertices are dropped.

    A single remaining vertex represents a degenerate (point) curve.
    """

    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float).reshape(-1, 2)
        if len(v) == 0:
            raise ValueError("a polyline needs at least one vertex")
        if not np.isfinite(v).all():
            raise ValueError("non-finite vertex")
        keep = np.ones(len(v), dtype=bool)
        keep[1:] = np.any(v[1:] != v[:-1], axis=1)
        v = v[keep]
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def is_point(self) -> bool:
        return len(self.vertices) == 1

    @property
    def start(self) -> np.ndarray:
        return self.vertices[0]

    @property
    def end(self) -> np.ndarray:
        return self.vertices[-1]

    def cumlength(self) -> np.ndarray:
        seg = np.hypot(*np.diff(self.vertices, axis=0).T)
        return np.concatenate([[0.0], np.cumsum(seg)])

    @property
    def length(self) -> float:
        return float(self.cumlength()[-1])

    @property
    def diameter(self) -> float:
        v = self.vertices
        if len(v) > 4000:
            from scipy.spatial import ConvexHull

            try:
                v = v[ConvexHull(v).vertices]
            except Exception:
                pass
        d = v[:, None, :] - v[None, :, :]
        return float(np.sqrt((d * d).sum(-1)).max())

    def reversed(self) -> "Polyline":
        return Polyline(self.vertices[::-1])

    def point_at(self, arclength) -> np.ndarray:
        cum = self.cumlength()
        if self.is_point or cum[-1] == 0.0:
            return np.broadcast_to(self.vertices[0], np.shape(arclength) + (2,)).copy()
        a = np.clip(np.asarray(arclength, dtype=float), 0.0, cum[-1])
        x = np.interp(a, cum, self.vertices[:, 0])
        y = np.interp(a, cum, self.vertices[:, 1])
        return np.stack([x, y], axis=-1)

    def resample_uniform(self, intervals: int) -> np.ndarray:
        """``intervals + 1`` points equally spaced in arclength (endpoints kept)."""
        return self.point_at(np.linspace(0.0, self.length, intervals + 1))

    def densify(self, spacing: float) -> "Polyline":
        """Insert collinear vertices so that no segment is longer than ``spacing``."""
        v = self.vertices
        if len(v) < 2:
            return self
        out = [v[:1]]
        for a, b in zip(v[:-1], v[1:]):
            n = max(1, int(math.ceil(np.hypot(*(b - a)) / spacing)))
            t = np.arange(1, n + 1)[:, None] / n
            out.append(a + t * (b - a))
        return Polyline(np.concatenate(out))

    def is_simple(self, tol: float = 0.0) -> bool:
        """No two non-adjacent segments come closer than ``tol`` (or cross)."""
        return _is_simple(self.vertices, tol)


def as_polyline(curve) -> Polyline:
    return curve if isinstance(curve, Polyline) else Polyline(curve)


# -- mu_n / mu-length ---------------------------------------------------------


@njit(cache=True)
def _prefix_chain_table(pts, nmax):
    # best[i]: largest min-gap over chains of k+1 points ending exactly at pts[i]
    n = pts.shape[0]
    table = np.zeros((nmax + 1, n))
    prev = np.full(n, np.inf)
    cur = np.zeros(n)
    for k in range(1, nmax + 1):
        for i in range(n):
            best = 0.0
            xi = pts[i, 0]
            yi = pts[i, 1]
            for j in range(i):
                if prev[j] <= best:
                    continue
                dx = xi - pts[j, 0]
                dy = yi - pts[j, 1]
                d = math.sqrt(dx * dx + dy * dy)
                v = d if d < prev[j] else prev[j]
                if v > best:
                    best = v
            cur[i] = best
        run = 0.0
        for i in range(n):
            if cur[i] > run:
                run = cur[i]
            table[k, i] = run
        for i in range(n):
            prev[i] = cur[i]
    return table


def _resolution(length: float, eps: float | None, n: int = 1) -> int:
    if eps is None or eps <= 0 or length == 0.0:
        return 1024
    return int(np.clip(math.ceil(2.0 * length / eps), max(_MIN_RES, 8 * n), _MAX_RES))


def mu_n(curve, n: int, resolution: int | None = None) -> float:
    """Largest minimum consecutive distance over ordered chains of ``n + 1`` curve points.

    The chain points range over a uniform arclength refinement with
    ``resolution`` intervals (default 1024, never below ``8 n``).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    line = as_polyline(curve)
    if line.is_point:
        return 0.0
    res = max(resolution or 1024, 8 * n)
    pts = line.resample_uniform(res)
    return float(_prefix_chain_table(pts, n)[n, -1])


def _terms(diam: float, eps: float) -> int:
    if diam <= 0.0:
        return 1
    return max(1, int(math.ceil(math.log2(diam / eps))))


def mu_length(curve, eps: float = 1e-4, resolution: int | None = None) -> float:
    """Truncated series ``sum mu_n / 2**n`` with tail bound ``diam * 2**-N <= eps``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    line = as_polyline(curve)
    if line.is_point:
        return 0.0
    nterms = _terms(line.diameter, eps)
    res = resolution or _resolution(line.length, eps, nterms)
    table = _prefix_chain_table(line.resample_uniform(res), nterms)
    weights = 0.5 ** np.arange(1, nterms + 1)
    return float(weights @ table[1:, -1])


@dataclass(frozen=True, eq=False)
class MuParamCurve:
    """A polyline with its cumulative mu-length at every vertex."""

    base: Polyline
    mu_cumulative: np.ndarray
    mu_total: float

    def point_at_mu(self, mu) -> np.ndarray:
        """Inverse of the cumulative mu-length (first vertex segment reaching ``mu``)."""
        cum = self.mu_cumulative
        v = self.base.vertices
        mu = np.clip(np.asarray(mu, dtype=float), 0.0, self.mu_total)
        idx = np.clip(np.searchsorted(cum, mu, side="left"), 1, len(cum) - 1)
        lo, hi = cum[idx - 1], cum[idx]
        span = hi - lo
        t = np.where(span > 0, (mu - lo) / np.where(span > 0, span, 1.0), 1.0)
        t = np.clip(t, 0.0, 1.0)[..., None]
        return v[idx - 1] * (1.0 - t) + v[idx] * t


def mu_parameterize(curve, eps: float | None = None, resolution: int | None = None) -> MuParamCurve:
    """Cumulative mu-length of every vertex prefix of ``curve``.

    One chain table over a uniform refinement gives ``mu_n`` of every prefix;
    vertex values are interpolated in arclength between refinement points.
    """
    line = as_polyline(curve)
    if line.is_point:
        return MuParamCurve(line, np.zeros(1), 0.0)
    diam = line.diameter
    if eps is None:
        eps = 1e-6 * diam
    nterms = _terms(diam, eps)
    res = resolution or _resolution(line.length, eps, nterms)
    pts = line.resample_uniform(res)
    table = _prefix_chain_table(pts, nterms)
    weights = 0.5 ** np.arange(1, nterms + 1)
    fine = weights @ table[1:]
    fine_s = np.linspace(0.0, line.length, res + 1)
    cum = np.interp(line.cumlength(), fine_s, fine)
    cum[0] = 0.0
    cum = np.maximum.accumulate(cum)
    cum[-1] = fine[-1]
    cum.setflags(write=False)
    return MuParamCurve(line, cum, float(fine[-1]))


def resample_by_mu(curve: MuParamCurve, k: int) -> Polyline:
    """``k`` points at equal mu-increments, endpoints included."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if curve.mu_total <= 0.0:
        raise ValueError("degenerate curve: mu-length is zero")
    return Polyline(mu_points(curve, np.linspace(0.0, 1.0, k)))


def mu_points(curve: MuParamCurve, fractions) -> np.ndarray:
    """Curve points at the given fractions of the total mu-length (no dedup)."""
    if curve.mu_total <= 0.0:
        return np.broadcast_to(curve.base.vertices[0], np.shape(fractions) + (2,)).copy()
    fr = np.asarray(fractions, dtype=float)
    pts = curve.point_at_mu(fr * curve.mu_total)
    pts[fr <= 0.0] = curve.base.start
    pts[fr >= 1.0] = curve.base.end
    return pts


# -- Frechet ------------------------------------------------------------------


@njit(cache=True)
def _dfd(P, Q):
    p = P.shape[0]
    q = Q.shape[0]
    prev = np.empty(q)
    cur = np.empty(q)
    for i in range(p):
        for j in range(q):
            dx = P[i, 0] - Q[j, 0]
            dy = P[i, 1] - Q[j, 1]
            d = math.sqrt(dx * dx + dy * dy)
            if i == 0 and j == 0:
                cur[j] = d
            elif i == 0:
                cur[j] = max(cur[j - 1], d)
            elif j == 0:
                cur[j] = max(prev[j], d)
            else:
                m = min(prev[j], cur[j - 1], prev[j - 1])
                cur[j] = max(m, d)
        for j in range(q):
            prev[j] = cur[j]
    return prev[q - 1]


def frechet(a, b, spacing: float | None = None) -> float:
    """Discrete Frechet distance between vertex sequences (optionally refined first)."""
    pa, pb = as_polyline(a), as_polyline(b)
    if spacing is not None and spacing > 0:
        pa, pb = pa.densify(spacing), pb.densify(spacing)
    return float(_dfd(np.ascontiguousarray(pa.vertices), np.ascontiguousarray(pb.vertices)))


# -- simplicity -----------------------------------------------------------------


def _seg_dist(a0, a1, b0, b1):
    """Distance between segment sets (broadcast), zero when they cross."""

    def pt_seg(p, s0, s1):
        d = s1 - s0
        L = (d * d).sum(-1)
        t = np.clip(((p - s0) * d).sum(-1) / np.where(L > 0, L, 1.0), 0.0, 1.0)
        q = s0 + t[..., None] * d
        return np.sqrt(((p - q) ** 2).sum(-1))

    def cross(o, a, b):
        return (a[..., 0] - o[..., 0]) * (b[..., 1] - o[..., 1]) - (a[..., 1] - o[..., 1]) * (b[..., 0] - o[..., 0])

    d1, d2 = cross(a0, a1, b0), cross(a0, a1, b1)
    d3, d4 = cross(b0, b1, a0), cross(b0, b1, a1)
    crossing = (d1 * d2 < 0) & (d3 * d4 < 0)
    dist = np.minimum.reduce([pt_seg(a0, b0, b1), pt_seg(a1, b0, b1), pt_seg(b0, a0, a1), pt_seg(b1, a0, a1)])
    return np.where(crossing, 0.0, dist)


def _is_simple(v: np.ndarray, tol: float) -> bool:
    n = len(v) - 1
    if n < 3:
        return True
    s0, s1 = v[:-1], v[1:]
    cum = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(v, axis=0).T))])
    for start in range(0, n, 256):
        idx = np.arange(start, min(n, start + 256))
        d = _seg_dist(s0[idx, None], s1[idx, None], s0[None], s1[None])
        ii, jj = np.meshgrid(idx, np.arange(n), indexing="ij")
        # pairs only count when they are also apart along the curve
        nonadj = (jj > ii + 1) & (cum[jj] - cum[ii + 1] > 2.0 * tol)
        if np.any(d[nonadj] <= tol) if tol > 0 else np.any(d[nonadj] == 0.0):
            return False
    return True
