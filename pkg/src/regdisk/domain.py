"""Domain shapes, grid-sampled scalar fields and their reconstruction.

A field is stored as ``values[i, j]`` with ``i`` the x index and ``j`` the y
index, on a uniform grid of spacing ``h`` covering the bounding box of the
shape.  Nodes outside the mask are never trusted: they are refilled by linear
extrapolation from the inside so bilinear evaluation works in boundary cells.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np
from scipy import ndimage

from .errors import FieldError, OutsideDomainError

SHAPES = ("square", "half_disk", "disk")

_BBOX = {
    "square": (0.0, 1.0, 0.0, 1.0),
    "half_disk": (-1.0, 1.0, 0.0, 1.0),
    "disk": (-1.0, 1.0, -1.0, 1.0),
}


@dataclass(frozen=True)
class DomainShape:
    """One of the three model regions, with a CCW boundary parameterization.

    The boundary map ``b(s)``, ``s`` in ``[0, 1)``, starts at the base point
    (square: (1, 0); half-disk: (1, 0); disk: (0, -1)) and winds
    counter-clockwise.  Square and half-disk use normalized arclength; the
    disk uses the angle.
    """

    kind: str

    def __post_init__(self):
        if self.kind not in SHAPES:
            raise FieldError(f"unknown shape {self.kind!r}; expected one of {SHAPES}")

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        return _BBOX[self.kind]

    @property
    def perimeter(self) -> float:
        return {"square": 4.0, "half_disk": math.pi + 2.0, "disk": 2.0 * math.pi}[self.kind]

    @property
    def row_range(self) -> tuple[float, float]:
        """Range of the height coordinate in the fiber chart."""
        return (-1.0, 1.0) if self.kind == "disk" else (0.0, 1.0)

    # -- implicit description -------------------------------------------------

    def implicit(self, p) -> np.ndarray:
        """Signed function, negative inside, zero on the boundary."""
        p = np.asarray(p, dtype=float)
        x, y = p[..., 0], p[..., 1]
        if self.kind == "square":
            return np.maximum(np.maximum(-x, x - 1.0), np.maximum(-y, y - 1.0))
        r = np.hypot(x, y) - 1.0
        if self.kind == "disk":
            return r
        return np.maximum(r, -y)

    def contains(self, p, tol: float = 0.0) -> np.ndarray:
        return self.implicit(p) <= tol

    def exit_point(self, p_in, p_out, iters: int = 60) -> np.ndarray:
        """Boundary crossing on the segments ``p_in -> p_out`` (vectorized bisection)."""
        a = np.array(p_in, dtype=float, ndmin=2)
        b = np.array(p_out, dtype=float, ndmin=2)
        lo = np.zeros(len(a))
        hi = np.ones(len(a))
        d = b - a
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            inside = self.implicit(a + mid[:, None] * d) <= 0.0
            lo = np.where(inside, mid, lo)
            hi = np.where(inside, hi, mid)
        return a + lo[:, None] * d

    # -- boundary parameterization ------------------------------------------

    def boundary_point(self, s) -> np.ndarray:
        s = np.mod(np.asarray(s, dtype=float), 1.0)
        out = np.empty(s.shape + (2,))
        if self.kind == "square":
            q = 4.0 * s
            seg = np.minimum(np.floor(q), 3).astype(int)
            t = q - seg
            xs = np.choose(seg, [np.ones_like(t), 1.0 - t, np.zeros_like(t), t])
            ys = np.choose(seg, [t, np.ones_like(t), 1.0 - t, np.zeros_like(t)])
            out[..., 0], out[..., 1] = xs, ys
        elif self.kind == "disk":
            th = 2.0 * math.pi * s
            out[..., 0], out[..., 1] = np.sin(th), -np.cos(th)
        else:
            arc = math.pi / self.perimeter
            on_arc = s < arc
            th = math.pi * s / arc
            t = (s - arc) / (1.0 - arc)
            out[..., 0] = np.where(on_arc, np.cos(th), -1.0 + 2.0 * t)
            out[..., 1] = np.where(on_arc, np.sin(th), 0.0)
        return out

    def project(self, p) -> np.ndarray:
        """Boundary parameter of the boundary point nearest to ``p``."""
        p = np.asarray(p, dtype=float)
        x, y = p[..., 0], p[..., 1]
        if self.kind == "disk":
            return np.mod(np.arctan2(x, -y) / (2.0 * math.pi), 1.0)
        if self.kind == "square":
            xc, yc = np.clip(x, 0.0, 1.0), np.clip(y, 0.0, 1.0)
            dist = np.stack([np.abs(x - 1.0), np.abs(y - 1.0), np.abs(x), np.abs(y)])
            seg = np.argmin(dist, axis=0)
            s = np.choose(seg, [yc, 1.0 + (1.0 - xc), 2.0 + (1.0 - yc), 3.0 + xc]) / 4.0
            return np.mod(s, 1.0)
        arc = math.pi / self.perimeter
        th = np.clip(np.arctan2(np.maximum(y, 0.0), x), 0.0, math.pi)
        d_arc = np.where(y >= 0.0, np.abs(np.hypot(x, y) - 1.0), np.minimum(np.hypot(x - 1, y), np.hypot(x + 1, y)))
        d_dia = np.where(np.abs(x) <= 1.0, np.abs(y), np.inf)
        s_arc = th / math.pi * arc
        s_dia = arc + (np.clip(x, -1.0, 1.0) + 1.0) / 2.0 * (1.0 - arc)
        return np.mod(np.where(d_arc <= d_dia, s_arc, s_dia), 1.0)

    def boundary_length(self, s0: float, s1: float) -> float:
        """Euclidean length of the CCW boundary piece from ``s0`` to ``s1 >= s0``."""
        return (s1 - s0) * self.perimeter

    # -- fiber chart ----------------------------------------------------------

    def half_width(self, row) -> np.ndarray:
        row = np.asarray(row, dtype=float)
        if self.kind == "square":
            return np.full(row.shape, 0.5)
        return np.sqrt(np.clip(1.0 - row * row, 0.0, None))

    def from_chart(self, tau, row) -> np.ndarray:
        """Map fiber coordinates (tau in [0,1] along a horizontal fiber, row) to a point."""
        tau, row = np.broadcast_arrays(np.asarray(tau, float), np.asarray(row, float))
        out = np.empty(tau.shape + (2,))
        if self.kind == "square":
            out[..., 0] = tau
        else:
            out[..., 0] = (2.0 * tau - 1.0) * self.half_width(row)
        out[..., 1] = row
        return out

    def to_chart(self, p) -> tuple[np.ndarray, np.ndarray]:
        p = np.asarray(p, dtype=float)
        x, y = p[..., 0], p[..., 1]
        lo, hi = self.row_range
        row = np.clip(y, lo, hi)
        if self.kind == "square":
            return np.clip(x, 0.0, 1.0), row
        w = self.half_width(row)
        with np.errstate(divide="ignore", invalid="ignore"):
            tau = np.where(w > 1e-15, (x / np.where(w > 1e-15, w, 1.0) + 1.0) / 2.0, 0.5)
        return np.clip(tau, 0.0, 1.0), row

    def lattice(self, k: int, m: int) -> np.ndarray:
        """``(k, m, 2)`` lattice regular in the fiber chart."""
        tau = np.linspace(0.0, 1.0, k)
        rows = np.linspace(*self.row_range, m)
        T, R = np.meshgrid(tau, rows, indexing="ij")
        return self.from_chart(T, R)


def _extend(values: np.ndarray, mask: np.ndarray, layers: int = 3) -> np.ndarray:
    """Refill unmasked nodes by linear extrapolation from masked ones."""
    ext = np.where(mask, values, np.nan)
    nx, ny = ext.shape
    for _ in range(layers):
        pending = np.isnan(ext)
        if not pending.any():
            break
        pad = np.pad(ext, 2, constant_values=np.nan)
        lin_sum = np.zeros_like(ext)
        lin_cnt = np.zeros_like(ext)
        c_sum = np.zeros_like(ext)
        c_cnt = np.zeros_like(ext)
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            v1 = pad[2 + dx : 2 + dx + nx, 2 + dy : 2 + dy + ny]
            v2 = pad[2 + 2 * dx : 2 + 2 * dx + nx, 2 + 2 * dy : 2 + 2 * dy + ny]
            ok1 = ~np.isnan(v1)
            ok2 = ok1 & ~np.isnan(v2)
            lin_sum += np.where(ok2, 2.0 * v1 - np.where(ok2, v2, 0.0), 0.0)
            lin_cnt += ok2
            c_sum += np.where(ok1, v1, 0.0)
            c_cnt += ok1
        new = np.where(lin_cnt > 0, lin_sum / np.maximum(lin_cnt, 1), np.where(c_cnt > 0, c_sum / np.maximum(c_cnt, 1), np.nan))
        ext = np.where(pending, new, ext)
    if np.isnan(ext).any():
        idx = ndimage.distance_transform_edt(np.isnan(ext), return_distances=False, return_indices=True)
        ext = ext[tuple(idx)]
    return ext


def _node_gradients(ext: np.ndarray, mask: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    grads = []
    for axis in (0, 1):
        g = np.gradient(ext, h, axis=axis)
        fwd = np.roll(mask, -1, axis=axis)
        bwd = np.roll(mask, 1, axis=axis)
        idx = [slice(None)] * 2
        idx[axis] = -1
        fwd[tuple(idx)] = False
        idx[axis] = 0
        bwd[tuple(idx)] = False
        diff_f = (np.roll(ext, -1, axis=axis) - ext) / h
        diff_b = (ext - np.roll(ext, 1, axis=axis)) / h
        g = np.where(mask & fwd & ~bwd, diff_f, g)
        g = np.where(mask & bwd & ~fwd, diff_b, g)
        g = np.where(mask & ~fwd & ~bwd, 0.0, g)
        grads.append(g)
    return grads[0], grads[1]


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Samples of a function on a masked grid over a :class:`DomainShape`."""

    shape: DomainShape
    values: np.ndarray
    mask: np.ndarray
    _ext: np.ndarray = field(init=False, repr=False)
    _gx: np.ndarray = field(init=False, repr=False)
    _gy: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        mask = np.array(self.mask, dtype=bool)
        if values.ndim != 2 or values.shape != mask.shape:
            raise FieldError("values and mask must be 2-D arrays of equal shape")
        nx, ny = values.shape
        if nx < 3 or ny < 2:
            raise FieldError("grid too small")
        x0, x1, y0, y1 = self.shape.bbox
        hx, hy = (x1 - x0) / (nx - 1), (y1 - y0) / (ny - 1)
        if not math.isclose(hx, hy, rel_tol=1e-9):
            raise FieldError(f"grid {nx}x{ny} is not uniform for shape {self.shape.kind}")
        if not mask.any():
            raise FieldError("empty mask")
        if not np.isfinite(values[mask]).all():
            raise FieldError("non-finite sample inside mask")
        _check_topology(mask)
        ext = _extend(values, mask)
        gx, gy = _node_gradients(ext, mask, hx)
        for name, arr in (("values", values), ("mask", mask), ("_ext", ext), ("_gx", gx), ("_gy", gy)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    # -- grid geometry --------------------------------------------------------

    @property
    def nx(self) -> int:
        return self.values.shape[0]

    @property
    def ny(self) -> int:
        return self.values.shape[1]

    @property
    def h(self) -> float:
        x0, x1, _, _ = self.shape.bbox
        return (x1 - x0) / (self.nx - 1)

    @property
    def origin(self) -> tuple[float, float]:
        x0, _, y0, _ = self.shape.bbox
        return x0, y0

    def nodes(self) -> np.ndarray:
        x0, y0 = self.origin
        xs = x0 + self.h * np.arange(self.nx)
        ys = y0 + self.h * np.arange(self.ny)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        return np.stack([X, Y], axis=-1)

    @property
    def extended(self) -> np.ndarray:
        """Node values with outside-mask nodes refilled by extrapolation."""
        return self._ext

    @property
    def fmin(self) -> float:
        return float(self.values[self.mask].min())

    @property
    def fmax(self) -> float:
        return float(self.values[self.mask].max())

    @property
    def max_grad(self) -> float:
        return float(np.hypot(self._gx, self._gy)[self.mask].max())

    @property
    def g_min(self) -> float:
        """Default threshold of the regular-point proxy."""
        scale = max(float(np.abs(self.values[self.mask]).max()), 1e-300)
        return 10.0 * np.finfo(float).eps * scale / self.h

    def node_gradients(self) -> tuple[np.ndarray, np.ndarray]:
        return self._gx, self._gy

    # -- reconstruction -------------------------------------------------------

    def _cell(self, p, tol: float | None):
        p = np.asarray(p, dtype=float)
        if tol is not None:
            inside = self.shape.contains(p, tol)
            if not np.all(inside):
                bad = np.asarray(p)[~np.asarray(inside)].reshape(-1, 2)[0]
                raise OutsideDomainError(f"point ({bad[0]:.6g}, {bad[1]:.6g}) is outside the {self.shape.kind}")
        x0, y0 = self.origin
        u = (p[..., 0] - x0) / self.h
        v = (p[..., 1] - y0) / self.h
        i = np.clip(np.floor(u).astype(int), 0, self.nx - 2)
        j = np.clip(np.floor(v).astype(int), 0, self.ny - 2)
        return i, j, u - i, v - j

    @staticmethod
    def _blend(a, i, j, t, s):
        return (
            (1 - t) * (1 - s) * a[i, j]
            + t * (1 - s) * a[i + 1, j]
            + (1 - t) * s * a[i, j + 1]
            + t * s * a[i + 1, j + 1]
        )

    def eval(self, p, check: bool = True):
        """Bilinear reconstruction at ``p`` (any leading shape, last axis 2)."""
        i, j, t, s = self._cell(p, 0.5 * self.h if check else None)
        out = self._blend(self._ext, i, j, t, s)
        return float(out) if np.ndim(out) == 0 else out

    def gradient(self, p, check: bool = True) -> np.ndarray:
        """Node gradients (central inside, one-sided at the mask edge) blended bilinearly."""
        i, j, t, s = self._cell(p, 0.5 * self.h if check else None)
        return np.stack([self._blend(self._gx, i, j, t, s), self._blend(self._gy, i, j, t, s)], axis=-1)


def _check_topology(mask: np.ndarray) -> None:
    _, n = ndimage.label(mask)
    if n != 1:
        raise FieldError(f"disconnected mask ({n} components)")
    outside = np.pad(~mask, 1, constant_values=True)
    _, holes = ndimage.label(outside, structure=np.ones((3, 3)))
    if holes != 1:
        raise FieldError("mask is not simply connected")


def default_mask(shape: DomainShape, nx: int, ny: int) -> np.ndarray:
    x0, x1, y0, y1 = shape.bbox
    X, Y = np.meshgrid(np.linspace(x0, x1, nx), np.linspace(y0, y1, ny), indexing="ij")
    return shape.contains(np.stack([X, Y], axis=-1), tol=1e-9)


def grid_size(kind: str, n: int) -> tuple[int, int]:
    """Grid dimensions giving ``n`` nodes across the shape's width."""
    if kind == "half_disk":
        if n % 2 == 0:
            raise FieldError("half-disk grids need an odd width")
        return n, (n - 1) // 2 + 1
    return n, n


def make_field(kind: str, func: Callable[[np.ndarray, np.ndarray], np.ndarray], n: int = 129) -> ScalarField:
    """Sample ``func(x, y)`` on an ``n``-wide grid of the given shape."""
    shape = DomainShape(kind)
    nx, ny = grid_size(kind, n)
    mask = default_mask(shape, nx, ny)
    x0, x1, y0, y1 = shape.bbox
    X, Y = np.meshgrid(np.linspace(x0, x1, nx), np.linspace(y0, y1, ny), indexing="ij")
    with np.errstate(all="ignore"):
        vals = np.asarray(func(X, Y), dtype=float) * np.ones_like(X)
    vals = np.where(mask, vals, np.nan)
    return ScalarField(shape, vals, mask)


def evaluate(field: ScalarField, p) -> float:
    return field.eval(p)


def gradient(field: ScalarField, p) -> np.ndarray:
    return field.gradient(p)


class BoundarySamples(NamedTuple):
    s: np.ndarray
    points: np.ndarray
    values: np.ndarray


def boundary_samples(field: ScalarField, m: int) -> BoundarySamples:
    """``m`` equally spaced boundary samples in CCW order from the base point."""
    if m < 4:
        raise ValueError("need at least 4 boundary samples")
    s = np.arange(m) / m
    pts = field.shape.boundary_point(s)
    return BoundarySamples(s, pts, field.eval(pts))


# -- manifests -----------------------------------------------------------------


def load_field(manifest: str | Path) -> ScalarField:
    """Read a JSON field manifest and the CSV tables it references.

    CSV rows are successive y values; columns successive x values.
    """
    path = Path(manifest)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FieldError(f"cannot read manifest {path}: {exc}") from exc
    try:
        kind, nx, ny, vpath = doc["shape"], int(doc["nx"]), int(doc["ny"]), doc["values"]
    except (KeyError, TypeError, ValueError) as exc:
        raise FieldError(f"malformed manifest: {exc}") from exc
    shape = DomainShape(kind)
    values = _read_table(path.parent / vpath, nx, ny)
    if doc.get("mask"):
        mask = _read_table(path.parent / doc["mask"], nx, ny) != 0
    else:
        mask = default_mask(shape, nx, ny)
    return ScalarField(shape, values, mask)


def _read_table(path: Path, nx: int, ny: int) -> np.ndarray:
    try:
        table = np.loadtxt(path, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise FieldError(f"cannot read table {path}: {exc}") from exc
    if table.shape != (ny, nx):
        raise FieldError(f"table {path} has shape {table.shape}, expected {(ny, nx)}")
    return table.T.copy()


def save_field(field: ScalarField, manifest: str | Path) -> Path:
    """Write ``field`` as a manifest plus values/mask CSVs next to it."""
    path = Path(manifest)
    stem = path.with_suffix("")
    vpath, mpath = stem.with_name(stem.name + "_values.csv"), stem.with_name(stem.name + "_mask.csv")
    np.savetxt(vpath, np.where(field.mask, field.values, np.nan).T, delimiter=",", fmt="%.17g")
    np.savetxt(mpath, field.mask.T.astype(int), delimiter=",", fmt="%d")
    doc = {"shape": field.shape.kind, "nx": field.nx, "ny": field.ny, "values": vpath.name, "mask": mpath.name}
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path
