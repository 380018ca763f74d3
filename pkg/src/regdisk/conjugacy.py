"""Extension of a level-compatible boundary homeomorphism to a conjugacy ``g o phi = f``.

Both fields are rectified onto the same model.  The boundary map, moved to
the model, preserves levels, so it acts on the two end rows of the model
chart by homeomorphisms ``u_lo`` and ``u_hi`` of ``[0, 1]``.  Blending them
along each fiber, ``Psi(tau, row) = ((1 - l) u_lo(tau) + l u_hi(tau), row)``,
gives a level-preserving extension and ``phi = H_g o Psi o H_f^-1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .domain import DomainShape, ScalarField
from .errors import ConjugacyError
from .rectify import DiscreteHomeomorphism, locate, quad_areas, rectify_auto
from .regularity import default_tol_level


@dataclass(frozen=True, eq=False)
class BoundaryMap:
    """Sampled boundary homeomorphism as ``(s_source, s_target)`` parameter pairs."""

    s_source: np.ndarray
    s_target: np.ndarray

    def __post_init__(self):
        src = np.mod(np.asarray(self.s_source, dtype=float), 1.0)
        tgt = np.mod(np.asarray(self.s_target, dtype=float), 1.0)
        if src.shape != tgt.shape or src.ndim != 1 or len(src) < 3:
            raise ConjugacyError("boundary map needs at least 3 parameter pairs")
        order = np.argsort(src, kind="stable")
        src, tgt = src[order], tgt[order]
        if np.any(np.diff(src) <= 0):
            raise ConjugacyError("boundary map source parameters must be distinct")
        unwrapped = _unwrap(tgt)
        d = np.diff(unwrapped)
        if not (np.all(d > 0) or np.all(d < 0)) or abs(unwrapped[-1] - unwrapped[0]) >= 1.0:
            raise ConjugacyError("boundary map is not strictly monotone modulo 1")
        object.__setattr__(self, "s_source", src)
        object.__setattr__(self, "s_target", tgt)

    @property
    def preserving(self) -> bool:
        u = _unwrap(self.s_target)
        return bool(u[-1] > u[0])

    @property
    def orientation(self) -> str:
        return "preserving" if self.preserving else "reversing"

    def __call__(self, s) -> np.ndarray:
        src, tgt = self.s_source, _unwrap(self.s_target)
        step = 1.0 if self.preserving else -1.0
        xs = np.concatenate([src[-1:] - 1.0, src, src[:1] + 1.0])
        ys = np.concatenate([tgt[-1:] - step, tgt, tgt[:1] + step])
        return np.mod(np.interp(np.mod(np.asarray(s, dtype=float), 1.0), xs, ys), 1.0)

    def inverse(self) -> "BoundaryMap":
        return BoundaryMap(self.s_target, self.s_source)

    def as_pairs(self) -> list[list[float]]:
        return [[float(a), float(b)] for a, b in zip(self.s_source, self.s_target)]

    @classmethod
    def from_pairs(cls, pairs) -> "BoundaryMap":
        arr = np.asarray(pairs, dtype=float).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1])

    @classmethod
    def from_point_map(cls, shape: DomainShape, func: Callable, n: int = 512, target_shape: DomainShape | None = None) -> "BoundaryMap":
        """Sample a map of boundary points ``func(p) -> q`` at ``n`` parameters."""
        target_shape = target_shape or shape
        s = np.arange(n) / n
        q = np.asarray(func(shape.boundary_point(s)), dtype=float)
        return cls(s, target_shape.project(q))


def _unwrap(t: np.ndarray) -> np.ndarray:
    return np.unwrap(np.asarray(t, dtype=float), period=1.0)


def level_mismatch(f: ScalarField, g: ScalarField, phi0: BoundaryMap) -> float:
    """``max |g(phi0(b(s))) - f(b(s))|`` over the sampled pairs."""
    pf = f.shape.boundary_point(phi0.s_source)
    pg = g.shape.boundary_point(phi0.s_target)
    return float(np.max(np.abs(g.eval(pg, check=False) - f.eval(pf, check=False))))


def _row_param(H: DiscreteHomeomorphism, j: int, q: np.ndarray) -> np.ndarray:
    """``tau`` of the nearest point to each ``q`` on the image polyline of row ``j``."""
    row = H.grid[:, j]
    a, b = row[:-1], row[1:]
    d = b - a
    L2 = np.einsum("ij,ij->i", d, d)
    out = np.empty(len(q))
    for n, p in enumerate(q):
        t = np.clip(np.einsum("ij,ij->i", p - a, d) / np.where(L2 > 0, L2, 1.0), 0.0, 1.0)
        dist = np.hypot(*(a + t[:, None] * d - p).T)
        i = int(np.argmin(dist))
        out[n] = H.tau[i] + t[i] * (H.tau[i + 1] - H.tau[i])
    return out


def _end_map(Hf, Hg, phi0: BoundaryMap, f_shape, g_shape, j: int) -> np.ndarray:
    """Values of ``u`` on lattice ``tau`` for end row ``j`` of the model."""
    row_pts = Hf.grid[:, j]
    if np.ptp(row_pts, axis=0).max() <= 1e-12:
        return Hf.tau.copy() if phi0.preserving else 1.0 - Hf.tau
    s = f_shape.project(row_pts)
    q = g_shape.boundary_point(phi0(s))
    u = _row_param(Hg, j, q)
    return np.maximum.accumulate(u) if u[-1] >= u[0] else np.minimum.accumulate(u)


def at_chart(H: DiscreteHomeomorphism, tau, row) -> np.ndarray:
    """Evaluate ``H`` at chart coordinates of its lattice shape."""
    return H(H.target_shape.from_chart(tau, row))


@dataclass(frozen=True)
class ConjugacyReport:
    residual: float
    boundary_deviation: float
    orientation_ok: bool
    orientation: str
    tol: float
    spacing: float

    @property
    def ok(self) -> bool:
        return self.residual <= self.tol and self.boundary_deviation <= 2.0 * self.spacing and self.orientation_ok

    def as_dict(self) -> dict[str, Any]:
        d = {
            "residual": self.residual,
            "boundary_deviation": self.boundary_deviation,
            "orientation_ok": self.orientation_ok,
            "orientation": self.orientation,
            "tol": self.tol,
            "spacing": self.spacing,
            "ok": self.ok,
            "failures": [],
        }
        if self.residual > self.tol:
            d["failures"].append("g o phi != f beyond tolerance")
        if self.boundary_deviation > 2.0 * self.spacing:
            d["failures"].append("phi does not extend phi0 on the boundary")
        if not self.orientation_ok:
            d["failures"].append("mapped lattice has inverted cells")
        return d


def conjugate(
    f: ScalarField,
    g: ScalarField,
    phi0: BoundaryMap,
    m: int = 65,
    k: int = 65,
    eps_cap: float | None = None,
    tol_conj: float | None = None,
    Hf: DiscreteHomeomorphism | None = None,
    Hg: DiscreteHomeomorphism | None = None,
) -> DiscreteHomeomorphism:
    """Homeomorphism ``phi`` of the lattice of ``f``'s domain with ``g o phi = f``, extending ``phi0``."""
    if f.shape.kind != g.shape.kind:
        raise ConjugacyError("f and g live on different domain shapes")
    if tol_conj is None:
        tol_conj = 3.0 * max(f.h, g.h)
    tol_lvl = max(default_tol_level(f), default_tol_level(g))
    mis = level_mismatch(f, g, phi0)
    if mis > max(tol_conj, tol_lvl):
        raise ConjugacyError(f"phi0 is not level compatible: max |g o phi0 - f| = {mis:.3g}")
    Hf = Hf or rectify_auto(f, m=m, k=k, eps_cap=eps_cap)
    Hg = Hg or rectify_auto(g, m=m, k=k, eps_cap=eps_cap)
    if Hf.target_shape.kind != Hg.target_shape.kind:
        raise ConjugacyError(f"models differ: {Hf.target_shape.kind} vs {Hg.target_shape.kind}")
    if abs(Hf.a - Hg.a) + abs(Hf.b - Hg.b) > 2.0 * tol_lvl:
        raise ConjugacyError(f"(a, b) mismatch: ({Hf.a:.6g}, {Hf.b:.6g}) vs ({Hg.a:.6g}, {Hg.b:.6g})")
    if not np.array_equal(Hf.rows, Hg.rows) or not np.array_equal(Hf.tau, Hg.tau):
        raise ConjugacyError("rectifications use different lattices")

    u_lo = _end_map(Hf, Hg, phi0, f.shape, g.shape, 0)
    u_hi = _end_map(Hf, Hg, phi0, f.shape, g.shape, Hf.m - 1)
    lo, hi = Hf.target_shape.row_range

    shape = f.shape
    tau = np.linspace(0.0, 1.0, k)
    rows = np.linspace(*shape.row_range, m)
    T, R = np.meshgrid(tau, rows, indexing="ij")
    P = shape.from_chart(T, R).reshape(-1, 2)
    t_model, r_model = locate(Hf, P)[:2]
    lam = (r_model - lo) / (hi - lo)
    u = (1.0 - lam) * np.interp(t_model, Hf.tau, u_lo) + lam * np.interp(t_model, Hf.tau, u_hi)
    grid = at_chart(Hg, u, r_model).reshape(k, m, 2)
    areas = quad_areas(grid)
    ok = bool(np.all(areas > 0)) if phi0.preserving else bool(np.all(areas < 0))
    vals = g.eval(grid, check=False) - f.eval(P.reshape(k, m, 2), check=False)
    return DiscreteHomeomorphism(
        g.shape,
        shape,
        tau,
        rows,
        grid,
        float(np.abs(vals).max()),
        ok,
        Hf.a,
        Hf.b,
        info={"orientation": phi0.orientation, "tol_conj": tol_conj, "model": Hf.target_shape.kind},
    )


def verify_conjugacy(f: ScalarField, g: ScalarField, phi: DiscreteHomeomorphism, phi0: BoundaryMap, tol: float | None = None) -> ConjugacyReport:
    """Check ``g o phi = f`` on the lattice and ``phi = phi0`` on the boundary."""
    if tol is None:
        tol = 3.0 * max(f.h, g.h)
    P = phi.model_points
    residual = float(np.abs(g.eval(phi.grid, check=False) - f.eval(P, check=False)).max())
    src = f.shape.boundary_point(phi0.s_source)
    dev = float(np.hypot(*(phi(src) - g.shape.boundary_point(phi0.s_target)).T).max())
    areas = quad_areas(phi.grid)
    ok = bool(np.all(areas > 0)) if phi0.preserving else bool(np.all(areas < 0))
    return ConjugacyReport(residual, dev, ok, phi0.orientation, float(tol), phi.spacing)
