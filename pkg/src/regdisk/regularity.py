"""Boundary decomposition, (almost) weak regularity, U-trajectories and ELC.

The boundary is split into maximal constant runs (level arcs) and strictly
monotone runs between them.  Isolated boundary extrema become single-point
level arcs, so arcs always alternate monotone/level.  Arcs are labelled
``gamma_1 .. gamma_2n`` with ``gamma_1`` the first arc, in CCW order from the
base point, along which ``f`` increases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.spatial import cKDTree

from .curves import Polyline
from .domain import ScalarField, boundary_samples
from .errors import DecompositionError, TrajectoryError


@dataclass(frozen=True)
class Arc:
    """Boundary arc ``[s_begin, s_end]`` in CCW parameter (``s_end`` may exceed 1)."""

    index: int
    s_begin: float
    s_end: float
    kind: str
    direction: str
    level: float | None = None

    @property
    def degenerate(self) -> bool:
        return self.kind == "level" and self.s_end - self.s_begin <= 1e-12

    @property
    def s_mid(self) -> float:
        return (0.5 * (self.s_begin + self.s_end)) % 1.0

    def contains(self, s, tol: float = 0.0):
        rel = np.mod(np.asarray(s, dtype=float) - self.s_begin + tol, 1.0)
        return rel <= (self.s_end - self.s_begin) + 2 * tol

    def params(self, shape, spacing: float) -> np.ndarray:
        span = self.s_end - self.s_begin
        if span <= 1e-12:
            return np.array([self.s_begin % 1.0])
        n = max(2, int(math.ceil(span * shape.perimeter / spacing)) + 1)
        s = np.linspace(self.s_begin, self.s_end, n)
        if shape.kind == "square":
            corners = np.arange(math.floor(4 * self.s_begin), math.ceil(4 * self.s_end) + 1) / 4.0
            corners = corners[(corners > self.s_begin) & (corners < self.s_end)]
            s = np.unique(np.concatenate([s, corners]))
        elif shape.kind == "half_disk":
            a = math.pi / shape.perimeter
            extra = np.array([a, 1.0, 1.0 + a])
            extra = extra[(extra > self.s_begin) & (extra < self.s_end)]
            s = np.unique(np.concatenate([s, extra]))
        return s

    def polyline(self, shape, spacing: float) -> Polyline:
        """Arc traced in CCW order."""
        return Polyline(shape.boundary_point(self.params(shape, spacing)))

    def as_dict(self) -> dict[str, Any]:
        d = {
            "index": self.index,
            "kind": self.kind,
            "s_begin": self.s_begin,
            "s_end": self.s_end,
            "direction": self.direction,
            "degenerate": self.degenerate,
        }
        if self.level is not None:
            d["level"] = self.level
        return d


@dataclass(frozen=True, eq=False)
class BoundaryDecomposition:
    """Points ``z_1..z_2n`` and arcs ``gamma_1..gamma_2n`` of the boundary."""

    shape: Any
    arcs: tuple[Arc, ...]
    tol_level: float
    failures: tuple[dict, ...] = ()

    @property
    def n_f(self) -> int:
        return sum(a.kind == "monotone" for a in self.arcs)

    @property
    def points(self) -> list[float]:
        return [a.s_begin % 1.0 for a in self.arcs]

    @property
    def level_arcs(self) -> list[Arc]:
        return [a for a in self.arcs if a.kind == "level"]

    @property
    def monotone_arcs(self) -> list[Arc]:
        return [a for a in self.arcs if a.kind == "monotone"]

    def arc(self, k: int) -> Arc:
        """``gamma_k`` (1-based)."""
        return self.arcs[k - 1]

    def arc_at(self, s: float, prefer: str | None = None) -> Arc:
        """Arc containing boundary parameter ``s``; on shared endpoints ``prefer`` a kind."""
        hits = [a for a in self.arcs if a.contains(s, 1e-9)]
        if prefer:
            pref = [a for a in hits if a.kind == prefer]
            hits = pref or hits
        if not hits:
            raise DecompositionError(f"parameter {s} not covered")
        return hits[0]

    def extreme_arcs(self) -> tuple[Arc, Arc]:
        """(minimum, maximum) level arcs of an ``n_f = 2`` decomposition."""
        lv = self.level_arcs
        return min(lv, key=lambda a: a.level), max(lv, key=lambda a: a.level)


def default_tol_level(field: ScalarField) -> float:
    return 2.0 * (field.fmax - field.fmin) * field.h


def decompose_boundary(
    field: ScalarField,
    m: int = 1024,
    tol_level: float | None = None,
    tol_mono: float = 0.0,
) -> BoundaryDecomposition:
    """Split the boundary into alternating monotone and level arcs."""
    shape = field.shape
    if tol_level is None:
        tol_level = default_tol_level(field)
    bs = boundary_samples(field, m)
    v = bs.values
    scale = max(float(np.abs(v).max()), float(v.max() - v.min()), 1e-300)
    tol_flat = max(tol_mono, 1e-12 * scale)
    steps = np.roll(v, -1) - v  # step k joins sample k and k+1
    sign = np.where(steps > tol_flat, 1, np.where(steps < -tol_flat, -1, 0))
    if not sign.any():
        raise DecompositionError("boundary not decomposable: f is constant on the boundary")
    # a single tie inside a strictly monotone run is collapsed into the run
    for k in np.flatnonzero(sign == 0):
        a, b = sign[k - 1], sign[(k + 1) % m]
        if a != 0 and a == b:
            sign[k] = a

    failures: list[dict] = []
    # raw level pieces: (s_begin, s_end, level)
    pieces: list[tuple[float, float, float]] = []
    start = int(np.flatnonzero(sign != 0)[0])
    order = [(start + i) % m for i in range(m)]
    i = 0
    while i < m:
        k = order[i]
        if sign[k] == 0:
            j = i
            while j + 1 < m and sign[order[j + 1]] == 0:
                j += 1
            first, last = order[i], (order[j] + 1) % m
            idx = [(first + t) % m for t in range(j - i + 2)]
            ext = float(v[idx].max() - v[idx].min())
            s0 = bs.s[first]
            s1 = s0 + (j - i + 1) / m
            if ext > tol_level:
                failures.append({"where": float(s0), "condition": "level arc drifts beyond tol_level", "value": ext})
            pieces.append((s0, s1, float(np.mean(v[idx]))))
            i = j + 1
            continue
        nxt = order[(i + 1) % m]
        if sign[nxt] != 0 and sign[nxt] != sign[k]:
            s_star, val = _refine_extremum(field, bs.s[nxt], 1.0 / m, maximize=sign[k] > 0)
            pieces.append((s_star, s_star, val))
        i += 1
    if len(pieces) < 2:
        raise DecompositionError("boundary not decomposable: fewer than two level arcs")
    pieces.sort(key=lambda p: p[0] % 1.0)
    pieces = [((a % 1.0), (a % 1.0) + (b - a), c) for a, b, c in pieces]

    raw: list[tuple[str, float, float, str, float | None]] = []
    for n, (a0, a1, lev) in enumerate(pieces):
        raw.append(("level", a0, a1, "constant", lev))
        b0, b1, _ = pieces[(n + 1) % len(pieces)]
        end = b0 if b0 >= a1 else b0 + 1.0
        if end - a1 <= 1e-12:
            raise DecompositionError("boundary not decomposable: adjacent level arcs without a monotone run")
        fa, fb = field.eval(shape.boundary_point(a1)), field.eval(shape.boundary_point(end))
        direction = "increasing" if fb > fa else "decreasing"
        _check_monotone(field, a1, end, direction, failures)
        raw.append(("monotone", a1 % 1.0, a1 % 1.0 + (end - a1), direction, None))

    inc = [i for i, r in enumerate(raw) if r[0] == "monotone" and r[3] == "increasing"]
    if not inc:
        raise DecompositionError("boundary not decomposable: no increasing arc")
    first = min(inc, key=lambda i: raw[i][1] % 1.0)
    arcs = []
    for n in range(len(raw)):
        kind, a0, a1, direction, lev = raw[(first + n) % len(raw)]
        arcs.append(Arc(n + 1, a0, a1, kind, direction, lev))
    return BoundaryDecomposition(shape, tuple(arcs), tol_level, tuple(failures))


def _refine_extremum(field: ScalarField, s0: float, ds: float, maximize: bool) -> tuple[float, float]:
    shape = field.shape
    sgn = -1.0 if maximize else 1.0

    def obj(s):
        return sgn * field.eval(shape.boundary_point(s), check=False)

    res = minimize_scalar(obj, bounds=(s0 - ds, s0 + ds), method="bounded", options={"xatol": 1e-12})
    s_best, v_best = s0, obj(s0)
    if res.fun < v_best and abs(res.x - s0) > 1e-9:
        s_best, v_best = float(res.x), float(res.fun)
    return s_best % 1.0, sgn * v_best


def _check_monotone(field, a, b, direction, failures, n=256) -> None:
    s = np.linspace(a, b, n)
    vals = field.eval(field.shape.boundary_point(s), check=False)
    d = np.diff(vals)
    bad = d < 0 if direction == "increasing" else d > 0
    if bad.any():
        k = int(np.flatnonzero(bad)[0])
        failures.append({"where": float(s[k] % 1.0), "condition": "monotone arc not strictly monotone", "value": float(d[k])})


# -- classification --------------------------------------------------------------


@dataclass(frozen=True)
class RegularityVerdict:
    status: str
    n_f: int
    failures: tuple[dict, ...]
    extremum_points: tuple[tuple[float, float], ...]
    decomposition: BoundaryDecomposition = field(repr=False, compare=False)

    def as_dict(self) -> dict[str, Any]:
        return {
            "status": self.status,
            "n_f": self.n_f,
            "arcs": [a.as_dict() for a in self.decomposition.arcs],
            "failures": list(self.failures),
            "extremum_points": [list(p) for p in self.extremum_points],
        }


_MAX_REPORTED = 20


def interior_failures(field: ScalarField, g_min: float | None = None) -> list[dict]:
    """Interior nodes failing the regular-point proxy ``|grad f| >= g_min``."""
    if g_min is None:
        g_min = field.g_min
    m = field.mask
    inner = m.copy()
    inner[1:-1, 1:-1] &= m[2:, 1:-1] & m[:-2, 1:-1] & m[1:-1, 2:] & m[1:-1, :-2]
    inner[0, :] = inner[-1, :] = False
    inner[:, 0] = inner[:, -1] = False
    gx, gy = field.node_gradients()
    bad = inner & (np.hypot(gx, gy) < g_min)
    nodes = field.nodes()
    out = []
    for i, j in np.argwhere(bad):
        out.append({"where": [float(nodes[i, j, 0]), float(nodes[i, j, 1])], "condition": "interior point not regular (|grad f| < g_min)", "value": float(np.hypot(gx[i, j], gy[i, j]))})
    return out


def is_full_component(field: ScalarField, arc: Arc, radius: float | None = None) -> bool:
    """Level arc is a whole level-set component: f stays on one side of its level nearby.

    A level component that continues into the interior through a regular
    point forces samples on both sides of the level within a few cells.
    """
    r = 2.0 * field.h if radius is None else radius
    pts = arc.polyline(field.shape, field.h / 2).vertices
    nodes = field.nodes()[field.mask]
    vals = field.values[field.mask]
    lo, hi = pts.min(0) - r, pts.max(0) + r
    sel = np.all((nodes >= lo) & (nodes <= hi), axis=1)
    nodes, vals = nodes[sel], vals[sel]
    if len(nodes) == 0:
        return True
    d, _ = cKDTree(pts).query(nodes)
    near = vals[d <= r] - arc.level
    tol = 1e-9 * max(abs(field.fmax), abs(field.fmin), field.fmax - field.fmin)
    return bool(np.all(near >= -tol) or np.all(near <= tol))


def classify(field: ScalarField, decomposition: BoundaryDecomposition | None = None, g_min: float | None = None) -> RegularityVerdict:
    if decomposition is None:
        decomposition = decompose_boundary(field)
    failures = list(decomposition.failures)
    interior = interior_failures(field, g_min)
    cond_a = not interior
    if interior:
        failures.append({"condition": "interior point not regular (|grad f| < g_min)", "count": len(interior)})
        failures.extend(interior[:_MAX_REPORTED])
    cond_b = not any(f.get("condition", "").startswith("level arc") for f in decomposition.failures)
    mono_ok = not any(f.get("condition", "").startswith("monotone") for f in decomposition.failures)
    cond_c = True
    for arc in decomposition.level_arcs:
        if not is_full_component(field, arc):
            cond_c = False
            failures.append({"where": arc.s_mid, "condition": f"gamma_{arc.index} is not a full level component", "value": arc.level})
    n_f = decomposition.n_f
    if n_f < 2 or not (cond_a and cond_b and mono_ok):
        status = "not_regular"
    elif cond_c and n_f == 2:
        status = "weakly_regular"
    else:
        status = "almost_weakly_regular"
        if cond_c:
            failures.append({"condition": f"n_f = {n_f} with full level components", "value": n_f})
    extrema = tuple(tuple(map(float, field.shape.boundary_point(a.s_begin))) for a in decomposition.level_arcs if a.degenerate)
    return RegularityVerdict(status, n_f, tuple(failures), extrema, decomposition)


# -- U-trajectories ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class UTrajectory:
    curve: Polyline
    values: np.ndarray

    @property
    def vertices(self) -> np.ndarray:
        return self.curve.vertices


def trace_u_trajectory(
    field: ScalarField,
    start,
    direction: int = 1,
    step: float | None = None,
    max_len: float = 10.0,
    g_min: float | None = None,
) -> UTrajectory:
    """Normalized gradient ascent (``direction=+1``) or descent with a monotonicity guard."""
    shape = field.shape
    if step is None:
        step = field.h
    if g_min is None:
        g_min = field.g_min
    sgn = 1.0 if direction > 0 else -1.0
    p = np.asarray(start, dtype=float)
    g = field.gradient(p)
    if np.hypot(*g) < g_min:
        raise TrajectoryError("start point lies in a gradient-degenerate zone")
    fp = field.eval(p)
    pts, vals = [p], [fp]
    target = field.fmax if sgn > 0 else field.fmin
    length = 0.0
    while length < max_len:
        g = field.gradient(p, check=False)
        gn = float(np.hypot(*g))
        if gn < g_min:
            break
        d = sgn * g / gn
        st = min(step, max_len - length)
        for _ in range(9):
            q = p + st * d
            hit = not shape.contains(q)
            if hit:
                q = shape.exit_point(p, q)[0]
            fq = field.eval(q, check=False)
            if sgn * (fq - fp) > 0:
                break
            if hit and np.hypot(*(q - p)) < 1e-14:
                return UTrajectory(Polyline(pts), np.array(vals))
            st /= 2.0
        else:
            raise TrajectoryError("cannot keep f strictly monotone; step too large")
        length += float(np.hypot(*(q - p)))
        p, fp = q, fq
        pts.append(p)
        vals.append(fp)
        if hit or sgn * (target - fp) <= 1e-12 * max(1.0, abs(target)):
            break
    return UTrajectory(Polyline(pts), np.array(vals))


# -- ELC diagnostic ---------------------------------------------------------------


def check_elc(field: ScalarField, v, eps: float, level_count: int = 25, decomposition=None, rungs: int = 10) -> float:
    """Largest delta in ``eps * 2**-k`` for which level arcs entering ``U_delta(v)`` twice stay in ``U_eps(v)``."""
    from .levelsets import extract_level

    if decomposition is None:
        decomposition = decompose_boundary(field)
    v = np.asarray(v, dtype=float)
    levels = field.fmin + (field.fmax - field.fmin) * np.arange(1, level_count + 1) / (level_count + 1)
    curves = []
    for c in levels:
        try:
            curves.extend(lc.curve for lc in extract_level(field, decomposition, float(c), check=False))
        except ValueError:
            return 0.0
    for k in range(rungs + 1):
        delta = eps / 2**k
        if all(_elc_holds(cv, v, delta, eps) for cv in curves):
            return delta
    return 0.0


def _elc_holds(curve: Polyline, v: np.ndarray, delta: float, eps: float) -> bool:
    verts = curve.vertices
    d0 = np.hypot(*(verts - v).T)
    if d0.min() > delta + curve_spacing(verts):
        return True
    dense = curve.densify(delta / 4).vertices
    d = np.hypot(*(dense - v).T)
    inside = np.flatnonzero(d < delta)
    if len(inside) < 2:
        return True
    return bool(np.all(d[inside[0] : inside[-1] + 1] < eps))


def curve_spacing(verts: np.ndarray) -> float:
    if len(verts) < 2:
        return 0.0
    return float(np.hypot(*np.diff(verts, axis=0).T).max())
