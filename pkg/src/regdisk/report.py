"""Deterministic JSON and SVG output."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .domain import DomainShape

VIEW = 1024
MARGIN = 32


def _enc(obj: Any) -> str:
    if obj is None or obj is True or obj is False:
        return json.dumps(obj)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return format(x, ".17g") if math.isfinite(x) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _enc(obj.tolist())
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(f"{json.dumps(k)}:{_enc(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_enc(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    """JSON with sorted keys and 17-significant-digit floats; NaN becomes null."""
    return _enc(obj) + "\n"


def write_json(obj: Any, path: str | Path | None) -> str:
    text = dumps(obj)
    if path is not None:
        Path(path).write_text(text)
    return text


# -- SVG ----------------------------------------------------------------------


class _Frame:
    def __init__(self, shape: DomainShape):
        x0, x1, y0, y1 = shape.bbox
        self.scale = (VIEW - 2 * MARGIN) / max(x1 - x0, y1 - y0)
        self.x0, self.y0 = x0, y0
        self.ox = MARGIN + ((VIEW - 2 * MARGIN) - self.scale * (x1 - x0)) / 2
        self.oy = MARGIN + ((VIEW - 2 * MARGIN) - self.scale * (y1 - y0)) / 2
        self.height = y1 - y0

    def pts(self, p) -> str:
        p = np.asarray(p, dtype=float).reshape(-1, 2)
        X = self.ox + self.scale * (p[:, 0] - self.x0)
        Y = VIEW - (self.oy + self.scale * (p[:, 1] - self.y0))
        return " ".join(f"{x:.3f},{y:.3f}" for x, y in zip(X, Y))


def _color(t: float) -> str:
    t = min(max(t, 0.0), 1.0)
    r, g, b = int(round(40 + 200 * t)), int(round(60 + 60 * (1 - abs(2 * t - 1)))), int(round(240 - 200 * t))
    return f"#{r:02x}{g:02x}{b:02x}"


def _outline(shape: DomainShape, frame: _Frame) -> str:
    s = np.linspace(0.0, 1.0, 513)
    return f'<polygon points="{frame.pts(shape.boundary_point(s))}" fill="none" stroke="#000000" stroke-width="2"/>'


def _doc(body: list[str]) -> str:
    head = f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {VIEW} {VIEW}" width="{VIEW}" height="{VIEW}">'
    return "\n".join([head, f'<rect x="0" y="0" width="{VIEW}" height="{VIEW}" fill="#ffffff"/>', *body, "</svg>"]) + "\n"


def svg_levels(shape: DomainShape, curves: list[tuple[float, np.ndarray]]) -> str:
    """Level curves as polylines colored by level; single points as dots."""
    frame = _Frame(shape)
    body = [_outline(shape, frame)]
    cs = [c for c, _ in curves]
    lo, hi = (min(cs), max(cs)) if cs else (0.0, 1.0)
    for c, pts in curves:
        col = _color((c - lo) / (hi - lo) if hi > lo else 0.5)
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        if len(pts) == 1:
            x, y = frame.pts(pts).split(",")
            body.append(f'<circle cx="{x}" cy="{y}" r="4" fill="{col}"/>')
        else:
            body.append(f'<polyline points="{frame.pts(pts)}" fill="none" stroke="{col}" stroke-width="1.5"/>')
    return _doc(body)


def svg_mesh(shape: DomainShape, grid: np.ndarray) -> str:
    """Warped lattice: images of lattice rows and columns."""
    frame = _Frame(shape)
    grid = np.asarray(grid, dtype=float)
    body = [_outline(shape, frame)]
    for j in range(grid.shape[1]):
        body.append(f'<polyline points="{frame.pts(grid[:, j])}" fill="none" stroke="#1f4e9c" stroke-width="1"/>')
    for i in range(grid.shape[0]):
        body.append(f'<polyline points="{frame.pts(grid[i, :])}" fill="none" stroke="#9c1f1f" stroke-width="1"/>')
    return _doc(body)


def write_text(text: str, path: str | Path) -> None:
    Path(path).write_text(text)
