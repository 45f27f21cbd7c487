"""Batch front end: file I/O plus the verbs that compose the library into
reproducible runs.

Verbs: flow | symmetrize | verify | detect | solve-radial |
check-overdetermined.  Every run is deterministic given its configuration
(the seed is part of it); reports carry a ``# meta:`` preamble with the tool
version and a hash of the effective config, and outputs are written
atomically.  Exit code 0 means every requested check passed at the
configured tolerances.  CSYM_THREADS caps worker parallelism.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, checks, detector, fileio, fixtures, radial
from .functionals import EquationSpec, HypothesisError
from .grids import GridFunction, csts
from .intervals import flow as interval_flow

__all__ = ["main"]


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("CSYM_THREADS", "1")))
    except ValueError:
        return 1


def _parse_t(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    return float(text)


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path) as handle:
        cfg = json.load(handle)
    if not isinstance(cfg, dict):
        raise ValueError("config must be a JSON object with kebab-case keys")
    return cfg


def _meta(config: dict, **extra) -> dict:
    meta = {"tool": f"csym {__version__}", "config-hash": fileio.config_hash(config)}
    meta.update(extra)
    return meta


def _refine(u: GridFunction, factor: int) -> GridFunction:
    if factor == 1:
        return u
    shape = tuple(n * factor for n in u.shape)
    axes = [
        a + (b - a) / n * (np.arange(n) + 0.5) for (a, b), n in zip(u.bbox, shape)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack(mesh, axis=-1).reshape(-1, u.ndim)
    vals = np.maximum(u.interp(pts), 0.0).reshape(shape)
    for axis in range(u.ndim):
        sl = np.moveaxis(vals, axis, 0)
        sl[0] = 0.0
        sl[-1] = 0.0
    return GridFunction(u.bbox, vals)


# -- verbs -------------------------------------------------------------------


def cmd_flow(args) -> int:
    S = fileio.read_intervals(args.input)
    t = _parse_t(args.t)
    out = interval_flow(S, t)
    print(f"measure before: {S.measure!r}")
    print(f"measure after:  {out.measure!r}")
    fileio.write_intervals(args.out, out, comment=f"flow t={args.t}")
    return 0


def cmd_symmetrize(args) -> int:
    u = fileio.read_grid(args.input)
    t = _parse_t(args.t)
    ut = csts(u, t, args.axis)
    fileio.write_grid(args.out, ut)
    values = np.unique(u.values[u.values > 0])
    if len(values) > 32:
        values = np.quantile(values, np.linspace(0.0, 1.0, 32))
    rows = [
        ("level", float(c), u.measure_above(c), ut.measure_above(c))
        for c in values
    ]
    lip = u.lipschitz_estimate()
    disp = float(np.abs(ut.values - u.values).max())
    rows.append(("displacement-max", t if math.isfinite(t) else -1.0, disp,
                 lip * u.radius * (t if math.isfinite(t) else 2.0) + 2 * lip * u.max_spacing))
    rows.append(("lipschitz", 0.0, lip, ut.lipschitz_estimate()))
    config = {"command": "symmetrize", "t": args.t, "axis": args.axis}
    fileio.write_report(
        str(args.out) + ".report.csv",
        ("kind", "key", "value-in", "value-out"),
        rows,
        _meta(config),
    )
    return 0


def cmd_verify(args) -> int:
    config = _load_config(args.config)
    props = [p.strip() for p in args.properties.split(",") if p.strip()]
    t_list = [_parse_t(s) for s in args.t_list.split(",")]
    refine_levels = [2**k for k in range(max(1, args.grid_refine))]
    if args.inputs:
        base = [fileio.read_grid(p) for p in args.inputs]
    else:
        base = [fixtures.random_bumps(args.seed + i) for i in range(args.random_suite)]
    if not base:
        print("verify: no inputs (give grid files or --random-suite N)", file=sys.stderr)
        return 2
    pairs = [(base[i], base[(i + 1) % len(base)]) for i in range(len(base))]

    def job(item):
        (u, v), factor = item
        uf, vf = _refine(u, factor), _refine(v, factor)
        recs = []
        for prop in props:
            recs.extend(
                (factor, rec)
                for rec in checks.run_property(prop, uf, v=vf, t_list=t_list)
            )
        return recs

    tasks = [(pair, factor) for factor in refine_levels for pair in pairs]
    workers = min(_threads(), len(tasks))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            all_recs = list(pool.map(job, tasks))
    else:
        all_recs = [job(task) for task in tasks]
    rows = []
    worst = 0.0
    for recs in all_recs:
        for factor, rec in recs:
            rows.append(
                (
                    rec.name,
                    factor,
                    rec.t,
                    rec.cell_width,
                    rec.lhs,
                    rec.rhs,
                    rec.margin,
                    rec.margin >= -args.tol,
                )
            )
            worst = max(worst, rec.violation)
    fileio.write_report(
        args.out,
        ("property", "refine", "t", "cell-width", "lhs", "rhs", "margin", "pass"),
        rows,
        _meta(config, seed=args.seed, properties=",".join(props)),
    )
    print(f"verify: {len(rows)} rows, worst violation {worst!r}")
    return 0 if worst <= args.tol else 1


def cmd_detect(args) -> int:
    config = _load_config(args.config)
    u = fileio.read_grid(args.input)
    t_list = [_parse_t(s) for s in args.t_list.split(",")]
    tol = args.tol if args.tol is not None else 5.0 * u.max_spacing * u.lipschitz_estimate()
    rows = []
    all_pass = True
    for d in detector.direction_set(u.ndim, args.directions):
        e = d.unit_vector(u.ndim)
        pts = detector.sample_points(u, d, n_samples=args.samples)
        res = detector.local_symmetry_check(u, d, pts, tol=tol)
        rows.append(
            (
                "local-symmetry",
                " ".join(f"{x:.6f}" for x in e),
                res.max_residual if res.pairs else math.nan,
                float(len(res.pairs)),
                float(res.n_not_found),
                res.passed,
            )
        )
        all_pass &= res.passed
    G = lambda z: z * z
    for axis in range(u.ndim):
        ed = detector.energy_derivative(u, G, axis, t_list=tuple(t_list))
        rows.append(
            (
                "energy-derivative",
                f"axis{axis}",
                ed.value,
                ed.uncertainty,
                ed.tolerance,
                ed.symmetric,
            )
        )
        all_pass &= ed.symmetric
    dec = detector.radial_decomposition(u)
    for k, ann in enumerate(dec.annuli):
        rows.append(
            (
                "annulus",
                f"{k}: center " + " ".join(f"{x:.6f}" for x in ann.center),
                ann.r_inner,
                ann.r_outer,
                ann.center_fit_residual,
                ann.radially_decreasing and ann.hole_condition,
            )
        )
    rows.append(
        (
            "classification",
            dec.classification,
            float(len(dec.annuli)),
            float(dec.critical_mask.sum()),
            float(dec.connected),
            dec.classification != "non-symmetric",
        )
    )
    all_pass &= dec.classification != "non-symmetric"
    fileio.write_report(
        args.out,
        ("kind", "which", "a", "b", "c", "pass"),
        rows,
        _meta(config, directions=args.directions, tol=tol),
    )
    print(f"detect: {dec.classification} ({len(dec.annuli)} annuli)")
    return 0 if all_pass else 1


def _spec_from_config(cfg: dict) -> EquationSpec:
    family = cfg.get("g-family", "power")
    if family != "power":
        raise ValueError(f"unsupported g-family {family!r}")
    p = float(cfg.get("p", 2.0))
    f_cfg = cfg.get("f-value", 1.0)
    lam_cfg = cfg.get("lambda-value", 1.0)
    lam_slope = float(cfg.get("lambda-slope", 0.0))
    lam_base = float(lam_cfg)
    if lam_slope:
        lam = lambda r: lam_base + lam_slope * np.asarray(r, dtype=float)
    else:
        lam = lam_base
    return EquationSpec.power_law(p, f=float(f_cfg), lam=lam)


def cmd_solve_radial(args) -> int:
    config = _load_config(args.config)
    try:
        spec = _spec_from_config(config)
        dim = int(config.get("dim", 2))
        steps = int(config.get("steps", 2048))
        if config.get("shoot", False):
            result = radial.shoot_for_boundary(spec, dim, steps=steps)
            profile, u0 = result.profile, result.u0
        else:
            u0 = float(config.get("u0", 1.0))
            profile = radial.solve_radial(spec, dim, u0, steps=steps)
    except (HypothesisError, radial.SolverError, ValueError) as exc:
        print(f"solve-radial: {exc}", file=sys.stderr)
        return 1
    rows = zip(profile.r, profile.u, profile.du, profile.flux)
    fileio.write_report(
        args.out,
        ("r", "u", "du", "flux"),
        ([float(a), float(b), float(c), float(d)] for a, b, c, d in rows),
        _meta(
            config,
            dim=dim,
            u0=repr(float(u0)),
            outer_radius=repr(profile.outer_radius),
            boundary_slope=repr(profile.boundary_slope),
        ),
    )
    if args.raster:
        n = int(config.get("raster-n", 256))
        half = float(config.get("raster-half-width", 1.2 * profile.outer_radius))
        bbox = tuple((-half, half) for _ in range(dim))
        grid = radial.rasterize(profile, (0.0,) * dim, bbox, (n,) * dim)
        fileio.write_grid(args.raster, grid)
    print(
        f"solve-radial: R={profile.outer_radius!r} "
        f"|u'(R)|={profile.boundary_slope!r} u0={float(u0)!r}"
    )
    return 0


def cmd_check_overdetermined(args) -> int:
    config = _load_config(args.config)
    try:
        spec = _spec_from_config(config)
        dim = int(config.get("dim", 2))
        result = radial.shoot_for_boundary(
            spec, dim, steps=int(config.get("steps", 2048)), tol=args.tol
        )
    except (HypothesisError, radial.SolverError, ValueError) as exc:
        print(f"check-overdetermined: {exc}", file=sys.stderr)
        return 1
    mono_min = radial.monotone_operator_check(spec, seed=args.seed)
    rows = [
        ("u0", result.u0, True),
        ("outer-radius", result.profile.outer_radius, True),
        ("boundary-residual", result.residual, abs(result.residual) <= args.tol),
        ("residual-monotone-in-u0", float(result.monotone), True),
        ("n-roots", float(len(result.roots)), True),
        ("flux-map-monotone-min", mono_min, mono_min >= -1e-12),
    ]
    fileio.write_report(
        args.out, ("check", "value", "pass"), rows, _meta(config, seed=args.seed)
    )
    ok = all(bool(row[2]) for row in rows)
    print(
        f"check-overdetermined: u0={result.u0!r} R={result.profile.outer_radius!r} "
        f"residual={result.residual!r}"
    )
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="csym",
        description="continuous Steiner symmetrization toolkit",
    )
    parser.add_argument("--version", action="version", version=f"csym {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("flow", help="flow an interval-set file")
    p.add_argument("input", type=Path)
    p.add_argument("--t", required=True, help="flow time (number or 'inf')")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(fn=cmd_flow)

    p = sub.add_parser("symmetrize", help="continuous symmetrization of a grid file")
    p.add_argument("input", type=Path)
    p.add_argument("--t", required=True)
    p.add_argument("--axis", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(fn=cmd_symmetrize)

    p = sub.add_parser("verify", help="run named inequality properties")
    p.add_argument("inputs", nargs="*", type=Path)
    p.add_argument("--properties", default="nonexp,cavalieri,hardy-littlewood,polyasz,weighted")
    p.add_argument("--t-list", default="0.1")
    p.add_argument("--grid-refine", type=int, default=1, help="number of dyadic refinements")
    p.add_argument("--random-suite", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--config", default=None)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("detect", help="symmetry detection report for a grid file")
    p.add_argument("input", type=Path)
    p.add_argument("--directions", type=int, default=16)
    p.add_argument("--samples", type=int, default=48)
    p.add_argument("--t-list", default="1e-1,1e-2,1e-3,1e-4")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(fn=cmd_detect)

    p = sub.add_parser("solve-radial", help="shoot a radial profile")
    p.add_argument("--config", required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--raster", type=Path, default=None)
    p.set_defaults(fn=cmd_solve_radial)

    p = sub.add_parser("check-overdetermined", help="match the boundary slope data")
    p.add_argument("--config", required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(fn=cmd_check_overdetermined)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError) as exc:
        print(f"csym {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
