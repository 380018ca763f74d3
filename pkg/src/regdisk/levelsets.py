"""Level curves as oriented simple polylines, and ordered level families.

Marching squares runs on the extended grid values (a node counts as above
the level when ``v >= c``); segments are chained through shared grid edges
and clipped to the domain.  Curves are oriented so that ``grad f`` points to
the left of the direction of travel, which makes every curve start on the
monotone arc along which ``f`` decreases in CCW order.
"""

from __future__ import annotations

from dataclasses import dataclass
from collections import defaultdict

import numpy as np

from .curves import Polyline, frechet
from .domain import ScalarField
from .errors import ClosedLevelError, LevelStructureError
from .regularity import Arc, BoundaryDecomposition


@dataclass(frozen=True, eq=False)
class LevelCurve:
    c: float
    curve: Polyline
    start_arc: int
    end_arc: int

    @property
    def is_point(self) -> bool:
        return self.curve.is_point


@dataclass(frozen=True, eq=False)
class LevelFamily:
    levels: np.ndarray
    curves: tuple[LevelCurve, ...]
    spacing: float

    def __len__(self) -> int:
        return len(self.curves)


def tol_iso(field: ScalarField) -> float:
    return 2.0 * field.h * field.max_grad


def arc_curve(field: ScalarField, deco: BoundaryDecomposition, arc: Arc, spacing: float | None = None) -> Polyline:
    """Boundary level arc oriented like interior level curves."""
    poly = arc.polyline(field.shape, spacing or field.h)
    prev = deco.arcs[arc.index - 2]
    return poly if prev.direction == "decreasing" else poly.reversed()


def _segments(field: ScalarField, c: float):
    """Marching-squares segments as ``(key_a, key_b, p_a, p_b)``."""
    E = field.extended
    nx, ny = E.shape
    h = field.h
    x0, y0 = field.origin
    m = field.mask
    above = E >= c
    code = (above[:-1, :-1].astype(np.int8) | (above[1:, :-1] << 1) | (above[1:, 1:] << 2) | (above[:-1, 1:] << 3))
    active = m[:-1, :-1] | m[1:, :-1] | m[1:, 1:] | m[:-1, 1:]
    cells = np.argwhere(active & (code != 0) & (code != 15))

    def edge_point(i0, j0, i1, j1):
        va, vb = E[i0, j0], E[i1, j1]
        t = (c - va) / (vb - va)
        return np.array([x0 + h * (i0 + t * (i1 - i0)), y0 + h * (j0 + t * (j1 - j0))])

    # cell edges: 0 bottom, 1 right, 2 top, 3 left
    def edge(i, j, e):
        if e == 0:
            return 2 * (i * ny + j), (i, j, i + 1, j)
        if e == 1:
            return 2 * ((i + 1) * ny + j) + 1, (i + 1, j, i + 1, j + 1)
        if e == 2:
            return 2 * (i * ny + j + 1), (i, j + 1, i + 1, j + 1)
        return 2 * (i * ny + j) + 1, (i, j, i, j + 1)

    pairs = {
        1: [(3, 0)], 2: [(0, 1)], 3: [(3, 1)], 4: [(1, 2)], 6: [(0, 2)], 7: [(3, 2)],
        8: [(2, 3)], 9: [(2, 0)], 11: [(2, 1)], 12: [(1, 3)], 13: [(1, 0)], 14: [(0, 3)],
    }
    segs = []
    for i, j in cells:
        k = int(code[i, j])
        if k in (5, 10):
            centre = 0.25 * (E[i, j] + E[i + 1, j] + E[i + 1, j + 1] + E[i, j + 1]) >= c
            if k == 5:
                plist = [(3, 2), (1, 0)] if centre else [(3, 0), (1, 2)]
            else:
                plist = [(0, 3), (2, 1)] if centre else [(0, 1), (2, 3)]
        else:
            plist = pairs[k]
        for ea, eb in plist:
            ka, ia = edge(i, j, ea)
            kb, ib = edge(i, j, eb)
            segs.append((ka, kb, edge_point(*ia), edge_point(*ib)))
    return segs


def _clip(field: ScalarField, segs):
    shape = field.shape
    if shape.kind == "square" or not segs:
        return segs
    pa = np.array([s[2] for s in segs])
    pb = np.array([s[3] for s in segs])
    ina, inb = shape.contains(pa), shape.contains(pb)
    out = []
    fresh = -1
    need = [n for n in range(len(segs)) if ina[n] != inb[n]]
    ex = {}
    if need:
        src = np.array([pa[n] if ina[n] else pb[n] for n in need])
        dst = np.array([pb[n] if ina[n] else pa[n] for n in need])
        for n, q in zip(need, shape.exit_point(src, dst)):
            ex[n] = q
    for n, (ka, kb, a, b) in enumerate(segs):
        if ina[n] and inb[n]:
            out.append((ka, kb, a, b))
        elif ina[n]:
            out.append((ka, fresh, a, ex[n]))
            fresh -= 1
        elif inb[n]:
            out.append((fresh, kb, ex[n], b))
            fresh -= 1
    return out


def _chain(segs) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Chain segments through shared keys into (open chains, closed loops)."""
    adj: dict[int, list[int]] = defaultdict(list)
    for n, (ka, kb, _, _) in enumerate(segs):
        adj[ka].append(n)
        adj[kb].append(n)
    used = np.zeros(len(segs), dtype=bool)
    point_of = {}
    for ka, kb, a, b in segs:
        point_of[ka], point_of[kb] = a, b

    def walk(key):
        pts = [point_of[key]]
        while True:
            nxt = [n for n in adj[key] if not used[n]]
            if not nxt:
                return pts, key
            n = nxt[0]
            used[n] = True
            ka, kb, _, _ = segs[n]
            key = kb if ka == key else ka
            pts.append(point_of[key])

    open_chains, loops = [], []
    for key, lst in adj.items():
        if len(lst) == 1 and not used[lst[0]]:
            pts, _ = walk(key)
            open_chains.append(np.array(pts))
    for n in range(len(segs)):
        if not used[n]:
            pts, _ = walk(segs[n][0])
            loops.append(np.array(pts))
    return open_chains, loops


def extract_level(field: ScalarField, decomposition: BoundaryDecomposition, c: float, check: bool = True) -> list[LevelCurve]:
    """Components of ``{f = c}`` as oriented level curves."""
    fmin = min(a.level for a in decomposition.level_arcs)
    fmax = max(a.level for a in decomposition.level_arcs)
    lo, hi = min(fmin, field.fmin), max(fmax, field.fmax)
    span = max(hi - lo, 1e-300)
    if c < lo - 1e-12 * span or c > hi + 1e-12 * span:
        raise ValueError(f"level {c} outside [{lo}, {hi}]")
    tiny = 1e-9 * span
    on_arcs = [a for a in decomposition.level_arcs if abs(a.level - c) <= tiny]
    if on_arcs and (abs(c - fmin) <= tiny or abs(c - fmax) <= tiny):
        return [LevelCurve(c, arc_curve(field, decomposition, a), a.index, a.index) for a in on_arcs]

    segs = _clip(field, _segments(field, c))
    chains, loops = _chain(segs)
    if loops and check:
        raise ClosedLevelError(f"level {c} contains a closed loop: the field is not weakly regular")
    shape = field.shape
    out = []
    for pts in chains:
        poly = Polyline(pts)
        ends = np.array([poly.start, poly.end])
        if np.any(np.abs(shape.implicit(ends)) > 1e-9):
            if check:
                raise LevelStructureError(f"level {c} has a chain ending inside the domain")
            continue
        s = shape.project(ends)
        arcs = [decomposition.arc_at(float(t), prefer="monotone") for t in s]
        if check and any(a.kind != "monotone" for a in arcs):
            raise LevelStructureError(f"level {c}: chain endpoint not on a monotone arc")
        if arcs[0].direction == "increasing" and arcs[1].direction == "decreasing":
            poly, arcs = poly.reversed(), arcs[::-1]
        if check and arcs[0].index == arcs[1].index:
            raise LevelStructureError(f"level {c}: both endpoints on gamma_{arcs[0].index}")
        out.append(LevelCurve(c, poly, arcs[0].index, arcs[1].index))
    if not check:
        out.extend(LevelCurve(c, Polyline(p), 0, 0) for p in loops)
    return out


def level_family(field: ScalarField, decomposition: BoundaryDecomposition, count: int) -> LevelFamily:
    """``count`` equally spaced levels with exactly one curve each."""
    if count < 2:
        raise ValueError("count must be >= 2")
    amin, amax = decomposition.extreme_arcs()
    levels = np.linspace(amin.level, amax.level, count)
    curves = [LevelCurve(amin.level, arc_curve(field, decomposition, amin), amin.index, amin.index)]
    for c in levels[1:-1]:
        comps = extract_level(field, decomposition, float(c))
        if len(comps) != 1:
            raise LevelStructureError(f"level {c} has {len(comps)} components")
        curves.append(comps[0])
    curves.append(LevelCurve(amax.level, arc_curve(field, decomposition, amax), amax.index, amax.index))
    return LevelFamily(levels, tuple(curves), field.h)


def frechet_continuity_profile(family: LevelFamily) -> list[tuple[float, float]]:
    """``(|dc|, Frechet distance)`` for consecutive curves of the family."""
    if len(family) < 3:
        raise ValueError("family needs at least 3 levels")
    out = []
    for a, b in zip(family.curves[:-1], family.curves[1:]):
        out.append((abs(b.c - a.c), frechet(a.curve, b.curve, spacing=family.spacing)))
    return out
