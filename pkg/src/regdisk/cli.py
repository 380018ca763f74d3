"""Command-line interface: ``regdisk <command> ...``.

Exit codes: 0 success, 1 analysis failure (for example a field that is not
weakly regular), 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any

import numpy as np

from . import errors
from .conjugacy import BoundaryMap, conjugate, verify_conjugacy
from .curves import Polyline, frechet, mu_length, mu_parameterize, resample_by_mu
from .domain import DomainShape, load_field
from .levelsets import level_family, tol_iso
from .rectify import DiscreteHomeomorphism, rectify_auto, tol_rect
from .regularity import classify, decompose_boundary
from .report import svg_levels, svg_mesh, write_json, write_text

EXIT_OK, EXIT_ANALYSIS, EXIT_IO = 0, 1, 2

_ANALYSIS_ERRORS = (
    errors.DecompositionError,
    errors.ClosedLevelError,
    errors.LevelStructureError,
    errors.TrajectoryError,
    errors.RectifyError,
    errors.ConjugacyError,
)


@dataclass(frozen=True)
class RunConfig:
    """Tolerances and resolutions; ``None`` selects the field-dependent default."""

    tol_level: float | None = None
    tol_mono: float = 0.0
    tol_iso: float | None = None
    tol_rect: float | None = None
    tol_conj: float | None = None
    eps_cap: float | None = None
    g_min: float | None = None
    m: int = 65
    k: int = 65
    boundary_samples: int = 1024

    def __post_init__(self):
        for name in ("tol_level", "tol_iso", "tol_rect", "tol_conj", "eps_cap", "g_min"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")
        if self.tol_mono < 0:
            raise ValueError("tol_mono must be non-negative")
        if self.m < 3 or self.k < 2:
            raise ValueError("need m >= 3 and k >= 2")
        if self.boundary_samples < 8:
            raise ValueError("boundary_samples must be >= 8")

    @classmethod
    def load(cls, path: str | None, overrides: dict[str, Any]) -> "RunConfig":
        data: dict[str, Any] = {}
        if path:
            data = json.loads(Path(path).read_text())
            unknown = set(data) - {f.name for f in fields(cls)}
            if unknown:
                raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**data)
        return replace(cfg, **{k: v for k, v in overrides.items() if v is not None})


class _Fail(Exception):
    """Analysis-level failure carrying a report."""

    def __init__(self, report: dict):
        super().__init__(report.get("error", "analysis failure"))
        self.report = report


def _read_json(path: str) -> Any:
    return json.loads(Path(path).read_text())


def _curve(path: str) -> Polyline:
    data = _read_json(path)
    if isinstance(data, dict):
        data = data.get("points", data.get("curve"))
    return Polyline(np.asarray(data, dtype=float))


def _emit(obj: dict, out: str | None) -> None:
    text = write_json(obj, out)
    if out is None:
        sys.stdout.write(text)


# -- commands -----------------------------------------------------------------


def cmd_classify(args, cfg: RunConfig) -> int:
    field = load_field(args.field)
    deco = decompose_boundary(field, cfg.boundary_samples, cfg.tol_level, cfg.tol_mono)
    verdict = classify(field, deco, cfg.g_min)
    _emit(verdict.as_dict(), args.out)
    return EXIT_OK if verdict.status == "weakly_regular" else EXIT_ANALYSIS


def cmd_levels(args, cfg: RunConfig) -> int:
    field = load_field(args.field)
    deco = decompose_boundary(field, cfg.boundary_samples, cfg.tol_level, cfg.tol_mono)
    fam = level_family(field, deco, args.count)
    tol = cfg.tol_iso or tol_iso(field)
    out = {
        "shape": field.shape.kind,
        "levels": fam.levels,
        "tol_iso": tol,
        "curves": [{"c": c.c, "start_arc": c.start_arc, "end_arc": c.end_arc, "points": c.curve.vertices} for c in fam.curves],
    }
    _emit(out, args.out)
    if args.svg:
        write_text(svg_levels(field.shape, [(c.c, c.curve.vertices) for c in fam.curves]), args.svg)
    return EXIT_OK


def cmd_mu(args, cfg: RunConfig) -> int:
    curve = _curve(args.curve)
    out: dict[str, Any] = {"mu_length": mu_length(curve, args.eps), "diameter": curve.diameter, "length": curve.length}
    if args.cumulative or args.resample:
        mp = mu_parameterize(curve, args.eps)
        out["mu_cumulative"] = mp.mu_cumulative
        if args.resample:
            out["resampled"] = resample_by_mu(mp, args.resample).vertices
    _emit(out, args.out)
    return EXIT_OK


def cmd_frechet(args, cfg: RunConfig) -> int:
    d = frechet(_curve(args.a), _curve(args.b), spacing=args.spacing)
    _emit({"frechet": d}, args.out)
    return EXIT_OK


def cmd_rectify(args, cfg: RunConfig) -> int:
    field = load_field(args.field)
    deco = decompose_boundary(field, cfg.boundary_samples, cfg.tol_level, cfg.tol_mono)
    H = rectify_auto(field, m=cfg.m, k=cfg.k, eps_cap=cfg.eps_cap, decomposition=deco, model=args.model)
    tol = cfg.tol_rect or tol_rect(field)
    out = H.as_dict()
    out["tol_rect"] = tol
    _emit(out, args.out)
    if args.svg:
        write_text(svg_mesh(field.shape, H.grid), args.svg)
    return EXIT_OK if H.residual <= tol and H.orientation_ok else EXIT_ANALYSIS


def cmd_conjugate(args, cfg: RunConfig) -> int:
    f, g = load_field(args.f), load_field(args.g)
    phi0 = BoundaryMap.from_pairs(_read_json(args.phi0))
    phi = conjugate(f, g, phi0, m=cfg.m, k=cfg.k, eps_cap=cfg.eps_cap, tol_conj=cfg.tol_conj)
    rep = verify_conjugacy(f, g, phi, phi0, phi.info["tol_conj"])
    out = phi.as_dict()
    out["report"] = rep.as_dict()
    _emit(out, args.out)
    if args.svg:
        write_text(svg_mesh(g.shape, phi.grid), args.svg)
    return EXIT_OK if rep.ok else EXIT_ANALYSIS


def cmd_render(args, cfg: RunConfig) -> int:
    data = _read_json(args.input)
    if "curves" in data:
        shape = DomainShape(data["shape"])
        svg = svg_levels(shape, [(float(c["c"]), np.asarray(c["points"], dtype=float)) for c in data["curves"]])
    elif "grid" in data:
        H = DiscreteHomeomorphism.from_dict(data)
        svg = svg_mesh(H.source_shape, H.grid)
    else:
        raise ValueError("input is neither a level family nor a homeomorphism")
    write_text(svg, args.out)
    return EXIT_OK


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="regdisk", description="Level-set analysis and rectification of fields on a disk.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig values")
    for name in ("tol-level", "tol-mono", "tol-iso", "tol-rect", "tol-conj", "eps-cap", "g-min"):
        common.add_argument(f"--{name}", type=float, default=None)
    common.add_argument("--boundary-samples", type=int, default=None)
    common.add_argument("--out", help="output path (default: stdout)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("classify", parents=[common], help="boundary decomposition and regularity verdict")
    s.add_argument("--field", required=True)
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("levels", parents=[common], help="ordered level family")
    s.add_argument("--field", required=True)
    s.add_argument("--count", "-n", type=int, default=11)
    s.add_argument("--svg")
    s.set_defaults(func=cmd_levels)

    s = sub.add_parser("mu", parents=[common], help="mu-length of a polyline")
    s.add_argument("--curve", required=True, help="JSON array of [x, y] pairs")
    s.add_argument("--eps", type=float, default=1e-4)
    s.add_argument("--cumulative", action="store_true")
    s.add_argument("--resample", type=int, default=0)
    s.set_defaults(func=cmd_mu)

    s = sub.add_parser("frechet", parents=[common], help="discrete Frechet distance of two polylines")
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.add_argument("--spacing", type=float, default=None)
    s.set_defaults(func=cmd_frechet)

    s = sub.add_parser("rectify", parents=[common], help="rectifying homeomorphism")
    s.add_argument("--field", required=True)
    s.add_argument("--model", choices=["auto", "square", "half_disk", "disk"], default="auto")
    s.add_argument("--levels", type=int, default=None)
    s.add_argument("--samples", type=int, default=None)
    s.add_argument("--svg")
    s.set_defaults(func=cmd_rectify)

    s = sub.add_parser("conjugate", parents=[common], help="extend a boundary map to a conjugacy")
    s.add_argument("--f", required=True)
    s.add_argument("--g", required=True)
    s.add_argument("--phi0", required=True, help="JSON list of [s_source, s_target] pairs")
    s.add_argument("--levels", type=int, default=None)
    s.add_argument("--samples", type=int, default=None)
    s.add_argument("--svg")
    s.set_defaults(func=cmd_conjugate)

    s = sub.add_parser("render", help="SVG of a level family or homeomorphism JSON")
    s.add_argument("--input", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_render, config=None)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {
        name: getattr(args, name, None)
        for name in ("tol_level", "tol_mono", "tol_iso", "tol_rect", "tol_conj", "eps_cap", "g_min", "boundary_samples")
    }
    overrides["m"] = getattr(args, "levels", None)
    overrides["k"] = getattr(args, "samples", None)
    try:
        cfg = RunConfig.load(getattr(args, "config", None), overrides)
        return args.func(args, cfg)
    except _ANALYSIS_ERRORS as exc:
        sys.stderr.write(f"regdisk: {exc}\n")
        return EXIT_ANALYSIS
    except (OSError, ValueError, KeyError, TypeError) as exc:
        sys.stderr.write(f"regdisk: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
