"""Command-line entry point.

Every subcommand writes plot-ready CSV tables, a deterministic
``summary.json`` and a ``manifest.json`` (config echo, version, wall time)
into the output directory. Exit codes: 0 success, 1 invalid input or
unwritable output, 2 failed ``--check``.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import analytic, export, search, varrep
from .analytic import FunctionalKind, UnsupportedAnalyticError
from .model import InteractionParams, OneBodyParams, RealRdm, ground_state

OUT_ENV = "DIMER_RDMFT_OUT"
EXIT_OK, EXIT_INVALID, EXIT_CHECK = 0, 1, 2

DEFAULT_GRID = {"functional": 201, "vrep": 201, "envelope": 201, "energy": 801}


class ValidationError(ValueError):
    pass


@dataclass
class RunConfig:
    subcommand: str
    interaction: InteractionParams
    one_body: OneBodyParams
    kind: FunctionalKind
    grid: int
    out: Path
    seed: int = 0
    check: bool = False
    slice: tuple[str, float] | None = None
    phi: list[float] = field(default_factory=list)
    samples: int = 10_000
    r_min: float = 1e-4
    r_max: float = 1e-2
    points: int = 16
    tol: float = varrep.GAP_RTOL

    def echo(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        d["out"] = str(self.out)
        return d


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _triple(text: str, names: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected {names}, got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _slice(text: str) -> tuple[str, float]:
    key, _, val = text.partition("=")
    if key not in ("g11", "g12") or not val:
        raise argparse.ArgumentTypeError(f"slice must be g11=v or g12=v, got {text!r}")
    return key, float(val)


def _common(p: argparse.ArgumentParser, grid: int | None, kind: str):
    g = p.add_argument_group("model")
    g.add_argument("--interaction", type=lambda s: _triple(s, "U,V,X"), metavar="U,V,X")
    g.add_argument("-U", type=float, help="on-site coupling (default 1 when no interaction is given)")
    g.add_argument("-V", type=float, help="pair-transfer coupling (default 0)")
    g.add_argument("-X", type=float, help="single-hop coupling (default 0)")
    g.add_argument("--one-body", type=lambda s: _triple(s, "t,eps1,eps2"), metavar="t,eps1,eps2")
    g.add_argument("-t", type=float, help="hopping (default 0)")
    g.add_argument("--eps1", type=float, help="site-1 energy (default 0)")
    g.add_argument("--eps2", type=float, help="site-2 energy (default 0)")
    g.add_argument("--kind", default=kind, choices=[k.value for k in FunctionalKind], help=f"default {kind}")
    r = p.add_argument_group("run")
    if grid is not None:
        r.add_argument("--grid", type=int, default=grid, help=f"grid points per axis (default {grid})")
    r.add_argument("--out", type=Path, help=f"output directory (default ${OUT_ENV}/<cmd> or ./runs/<cmd>)")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--tol", type=float, default=varrep.GAP_RTOL, help="relative gap tolerance for verdicts")
    r.add_argument("--check", action="store_true", help="verify the defining oracle relation; exit 2 on failure")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="dimer-rdmft", description="1RDM functionals of the generalized Hubbard dimer")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("functional", help="evaluate a functional on the disk grid or a 1-D slice")
    _common(p, DEFAULT_GRID["functional"], "fr-pure")
    p.add_argument("--slice", type=_slice, metavar="g11=v|g12=v")

    p = sub.add_parser("vrep", help="map pure-state v-representability")
    _common(p, DEFAULT_GRID["vrep"], "fr-pure")

    p = sub.add_parser("force", help="fit the boundary divergence of dF/dR")
    _common(p, None, "fr-pure")
    p.add_argument("--phi", type=float, action="append", help="angle (repeatable; default 8 angles)")
    p.add_argument("--r-min", type=float, default=1e-4)
    p.add_argument("--r-max", type=float, default=1e-2)
    p.add_argument("--points", type=int, default=16)

    p = sub.add_parser("sweep", help="ground-state 1RDMs over a (t, eps1 - eps2) grid")
    _common(p, None, "fr-pure")
    p.add_argument("--samples", type=int, default=10_000)

    p = sub.add_parser("envelope", help="lower convex envelope of the real pure functional")
    _common(p, DEFAULT_GRID["envelope"], "fr-pure")

    p = sub.add_parser("energy", help="ground-state energy by Legendre-Fenchel minimization")
    _common(p, DEFAULT_GRID["energy"], "fr-ens")
    return ap


def _pick(explicit, triple, idx, default):
    if explicit is not None:
        return explicit
    if triple is not None:
        return triple[idx]
    return default


def config_from_args(args) -> RunConfig:
    tri = args.interaction
    w = InteractionParams(
        _pick(args.U, tri, 0, 1.0 if tri is None else 0.0), _pick(args.V, tri, 1, 0.0), _pick(args.X, tri, 2, 0.0)
    )
    ob = args.one_body
    h = OneBodyParams(_pick(args.t, ob, 0, 0.0), _pick(args.eps1, ob, 1, 0.0), _pick(args.eps2, ob, 2, 0.0))
    if args.out is not None:
        out = args.out
    elif os.environ.get(OUT_ENV):
        out = Path(os.environ[OUT_ENV]) / args.subcommand
    else:
        out = Path("runs") / args.subcommand
    cfg = RunConfig(
        subcommand=args.subcommand,
        interaction=w,
        one_body=h,
        kind=FunctionalKind.parse(args.kind),
        grid=getattr(args, "grid", None) or 0,
        out=out,
        seed=args.seed,
        check=args.check,
        slice=getattr(args, "slice", None),
        phi=list(getattr(args, "phi", None) or []),
        samples=getattr(args, "samples", 10_000),
        r_min=getattr(args, "r_min", 1e-4),
        r_max=getattr(args, "r_max", 1e-2),
        points=getattr(args, "points", 16),
        tol=args.tol,
    )
    validate(cfg)
    return cfg


def validate(cfg: RunConfig):
    if cfg.subcommand in DEFAULT_GRID and cfg.grid < 2:
        raise ValidationError("--grid must be >= 2")
    if cfg.subcommand == "vrep" and cfg.grid < 101:
        raise ValidationError("vrep needs --grid >= 101")
    if cfg.subcommand == "energy" and cfg.grid < 51:
        raise ValidationError("energy needs --grid >= 51")
    if cfg.subcommand == "vrep" and not cfg.kind.is_pure:
        raise ValidationError("vrep takes a pure --kind; its ensemble partner is implied")
    if cfg.slice is not None:
        key, v = cfg.slice
        lim = (0.0, 1.0) if key == "g11" else (-0.5, 0.5)
        if not lim[0] <= v <= lim[1]:
            raise ValidationError(f"slice {key}={v} misses the disk")
    if cfg.subcommand == "sweep" and cfg.samples < 1000:
        raise ValidationError("--samples must be >= 1000")
    if cfg.subcommand == "force" and not (0 < cfg.r_min < cfg.r_max <= 0.05 and cfg.points >= 8):
        raise ValidationError("force needs 0 < r-min < r-max <= 0.05 and points >= 8")
    if cfg.tol <= 0:
        raise ValidationError("--tol must be > 0")


# --------------------------------------------------------------------------
# subcommands; each returns (summary dict, written files, check passed)
# --------------------------------------------------------------------------


def _oracle(kind: FunctionalKind, w, r: RealRdm, opts):
    if kind is FunctionalKind.FR_pure:
        return search.min_pure_real(w, r, opts)[0]
    if kind.is_pure:
        return search.min_pure_complex_reduced(w, r, opts)
    return search.min_ensemble(w, r, opts)[0]


def cmd_functional(cfg: RunConfig):
    w, kind = cfg.interaction, cfg.kind
    opts = search.SearchOptions(seed=cfg.seed, restarts=16)
    files, summary = [], {"kind": kind.value}
    if cfg.slice is not None:
        key, v = cfg.slice
        half = np.sqrt(max(0.0, 0.25 - (v - 0.5) ** 2 if key == "g11" else 0.25 - v * v))
        lo, hi = (-half, half) if key == "g11" else (0.5 - half, 0.5 + half)
        coord = np.linspace(lo, hi, cfg.grid)
        pts = [RealRdm(v, c) if key == "g11" else RealRdm(c, v) for c in coord]
        vals = np.array([analytic.evaluate(kind, w, r, opts) for r in pts])
        other = "g12" if key == "g11" else "g11"
        files.append(export.write_csv(cfg.out / "slice.csv", (other, "value"), zip(coord, vals)))
        summary.update(slice={key: v}, min=float(vals.min()), argmin=float(coord[np.argmin(vals)]))
        sample = pts[:: max(1, len(pts) // 12)]
    else:
        fld = search.grid_functional(kind, w, cfg.grid)
        gx, gy, gv = fld.nodes()
        files.append(export.write_functional_table(cfg.out / "functional.csv", kind.value, w, gx, gy, gv))
        corner = np.isclose(gx, 0.0) & np.isclose(gy, 0.0)
        summary.update(nodes=int(gv.size), min=float(gv.min()), max=float(gv.max()))
        if corner.any():
            summary["value_at_0_0"] = float(gv[corner][0])
        rng = np.random.default_rng(cfg.seed)
        idx = rng.choice(gv.size, size=min(12, gv.size), replace=False)
        sample = [RealRdm(gx[i], gy[i]) for i in idx]
    ok = True
    if cfg.check:
        ref = np.array([_oracle(kind, w, r, opts) for r in sample])
        got = np.array([analytic.evaluate(kind, w, r, opts) for r in sample])
        err = float(np.max(np.abs(ref - got)))
        # grid surfaces of ensemble kinds for general W come from a discrete envelope
        limit = 2e-3 if (cfg.slice is None and not analytic.has_closed_form(kind, w) and not w.is_onsite) else 1e-6
        summary["check"] = {"max_abs_error_vs_oracle": err, "limit": limit}
        ok = err < limit
    return summary, files, ok


def _overlay(w):
    try:
        ells = analytic.ellipses_general(w) if w.V != 0.0 else analytic.ellipse_onsite(w.U)
    except UnsupportedAnalyticError:
        return None
    return ells


def cmd_vrep(cfg: RunConfig):
    w, kind = cfg.interaction, cfg.kind
    vm = varrep.vrep_map((kind, kind.ensemble_partner()), w, cfg.grid, cfg.tol)
    files = [export.write_verdicts(cfg.out / "verdicts.csv", vm)]
    summary = {"kinds": vm.status.meta["kinds"], "region_count": vm.region_count(), "counts": vm.counts()}
    ang = analytic.vanishing_angles(w)
    summary["vanishing_angles"] = "all" if ang is analytic.ALL_ANGLES else ang
    ells = _overlay(w) if kind is FunctionalKind.FR_pure else []
    ok = True
    if ells is not None:
        files.append(export.write_ellipses(cfg.out / "ellipses.csv", ells))
        G11, G12 = vm.status.mesh()
        inside = analytic.inside_mask(G11, G12, ells) & vm.status.mask
        bad = (inside != vm.not_representable()) & vm.status.mask
        cells = 0.0
        if bad.any():
            from scipy.spatial import cKDTree

            if not ells:
                cells = float("inf")
            else:
                tree = cKDTree(np.vstack([e.sample(8192) for e in ells]))
                d, _ = tree.query(np.column_stack([G11[bad], G12[bad]]))
                cells = float(d.max() / vm.status.spacing)
        summary["mismatch_nodes"] = int(bad.sum())
        summary["max_mismatch_cells"] = cells
        ok = cells <= 2.0
    if cfg.check and kind is not FunctionalKind.FR_pure:
        ok = vm.region_count() == 0
    return summary, files, (ok if cfg.check else True)


DEFAULT_ANGLES = list(np.linspace(0.0, 2 * np.pi, 8, endpoint=False) + np.pi / 16)


def cmd_force(cfg: RunConfig):
    w = cfg.interaction
    phis = cfg.phi or DEFAULT_ANGLES
    rows, ok = [], True
    scale = max(1.0, abs(w.U), abs(w.V))
    for phi in phis:
        fit = varrep.force_fit(w, phi, cfg.r_min, cfg.r_max, cfg.points)
        c = float(analytic.force_prefactor(w, phi))
        rows.append((phi, fit.prefactor, fit.exponent, fit.residual, c, int(fit.ok)))
        if c > 1e-3 * scale:
            ok &= abs(fit.exponent + 0.5) <= 0.02 and abs(fit.prefactor / c - 1.0) <= 0.01
        elif c < 1e-12:
            ok &= fit.prefactor < 1e-6
    files = [
        export.write_csv(
            cfg.out / "force.csv", ("phi", "prefactor", "exponent", "residual", "analytic_prefactor", "fit_ok"), rows
        )
    ]
    ang = analytic.vanishing_angles(w)
    summary = {
        "fits": [dict(zip(("phi", "prefactor", "exponent", "residual", "analytic_prefactor", "fit_ok"), r)) for r in rows],
        "vanishing_angles": "all" if ang is analytic.ALL_ANGLES else ang,
    }
    return summary, files, (ok if cfg.check else True)


def cmd_sweep(cfg: RunConfig):
    w = cfg.interaction
    sw = varrep.ground_state_sweep(w, samples=cfg.samples)
    files = [export.write_sweep(cfg.out / "sweep.csv", sw)]
    summary = {"rows": int(len(sw.rows))}
    ells = _overlay(w)
    ok = True
    if ells:
        files.append(export.write_ellipses(cfg.out / "ellipses.csv", ells))
        P = sw.points
        q = np.min([e.residual(P[:, 0], P[:, 1]) for e in ells], axis=0)
        summary["min_ellipse_residual"] = float(q.min())
        ok = bool(q.min() > -1e-9)
    return summary, files, (ok if cfg.check else True)


def cmd_envelope(cfg: RunConfig):
    w = cfg.interaction
    pure = search.sample_grid(lambda a, b: analytic.f_r_pure_general_cartesian(w, RealRdm(a, b)), cfg.grid)
    env = search.lower_convex_envelope(pure)
    files = [
        export.write_grid_field(cfg.out / "pure.csv", pure, "f_r_pure_general_cartesian"),
        export.write_grid_field(cfg.out / "envelope.csv", env, "lower_convex_envelope"),
    ]
    gx, gy, gv = env.nodes()
    summary = {"nodes": int(gv.size)}
    ok = True
    if w.is_onsite:
        err = float(np.max(np.abs(gv - analytic.f_c_pure_onsite(w.U, RealRdm(gx, gy)))))
        summary["max_abs_error_vs_piecewise"] = err
        ok = err < 2e-3
    else:
        rng = np.random.default_rng(cfg.seed)
        idx = rng.choice(gv.size, size=min(12, gv.size), replace=False)
        opts = search.SearchOptions(seed=cfg.seed, restarts=16)
        err = max(abs(gv[i] - search.min_ensemble(w, RealRdm(gx[i], gy[i]), opts)[0]) for i in idx)
        summary["max_abs_error_vs_ensemble_search"] = float(err)
        ok = err < 2e-3
    return summary, files, (ok if cfg.check else True)


def cmd_energy(cfg: RunConfig):
    w, h = cfg.interaction, cfg.one_body
    E, mins = search.legendre_fenchel_energy(h, cfg.kind, w, cfg.grid)
    E0 = ground_state(h, w)[0]
    summary = {
        "energy": E,
        "exact_energy": E0,
        "abs_error": abs(E - E0),
        "minimizers": [[float(r.g11), float(r.g12)] for r in mins[:64]],
        "minimizer_count": len(mins),
    }
    files = [export.write_csv(cfg.out / "minimizers.csv", ("g11", "g12"), ([r.g11, r.g12] for r in mins))]
    return summary, files, (abs(E - E0) < 1e-6 if cfg.check else True)


COMMANDS = {
    "functional": cmd_functional,
    "vrep": cmd_vrep,
    "force": cmd_force,
    "sweep": cmd_sweep,
    "envelope": cmd_envelope,
    "energy": cmd_energy,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = config_from_args(args)
    except ValueError as exc:
        print(f"dimer-rdmft: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    start = time.perf_counter()
    try:
        cfg.out.mkdir(parents=True, exist_ok=True)
        summary, files, ok = COMMANDS[cfg.subcommand](cfg)
        summary["check_passed"] = ok if cfg.check else None
        files.append(export.write_json(cfg.out / "summary.json", summary))
        export.write_json(
            cfg.out / "manifest.json",
            {
                "config": cfg.echo(),
                "version": __version__,
                "wall_time_s": time.perf_counter() - start,
                "outputs": [p.name for p in files],
            },
        )
    except OSError as exc:
        print(f"dimer-rdmft: cannot write output: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"dimer-rdmft: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print(f"{cfg.subcommand}: wrote {len(files)} files to {cfg.out}")
    if cfg.check and not ok:
        print(f"{cfg.subcommand}: check FAILED", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
