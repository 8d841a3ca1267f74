"""Command-line interface: generate / check / solve / rank / integrate /
sweep / field / mesh / limits, with JSON reports on stdout.

Artifacts (configuration documents, CSV, meshes, figures) go to paths given
by flags; every report is a single JSON object.  Domain errors exit 1 with a
machine-readable error object on stderr; usage errors exit 2.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from typing import Optional

import numpy as np

from . import __version__, balance, catalog, plotting, solver, surface
from .balance import BalanceReport, check_balance, default_tolerance
from .config import (
    Motion,
    SymmetryGroup,
    VortexConfig,
    detect_symmetries,
    normalize,
    parse_config,
    serialize_config,
)
from .errors import VclError
from .jacobian import RankReport, rank_report, restricted_rank_report
from .kernels import DoublyPeriodic
from .solver import SolveSettings
from .surface import LimitPeriods, MeshSettings


def _pair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _class_doc(cls) -> Optional[dict]:
    if cls is None:
        return None
    return {"kind": cls.kind, "n": cls.n, "n_plus": cls.n_plus, "n_minus": cls.n_minus, "m": cls.m}


def _balance_doc(report: BalanceReport) -> dict:
    doc = {
        "sup_norm": report.sup_norm,
        "balanced": report.balanced,
        "tol": report.tol,
        "residuals": [_pair(r) for r in report.residuals],
        "class": _class_doc(report.crystal_class),
    }
    doc["moment1_residual"] = None if report.moment1_residual is None else _pair(report.moment1_residual)
    doc["moment2_residual"] = None if report.moment2_residual is None else _pair(report.moment2_residual)
    return doc


def _rank_doc(report: RankReport, with_jacobian: bool = False) -> dict:
    doc = {
        "rank": report.rank,
        "null_dim": report.null_dim,
        "max_possible_rank": report.max_possible_rank,
        "nondegenerate": report.nondegenerate,
        "degenerate": not report.nondegenerate,
        "restricted": report.restricted,
        "subspace_dim": report.subspace_dim,
        "class": _class_doc(report.crystal_class),
        "singular_values": [float(s) for s in report.singular_values],
    }
    if with_jacobian:
        doc["jacobian"] = [[float(x) for x in row] for row in report.jacobian]
    return doc


def _limits_doc(lp: LimitPeriods) -> dict:
    return {
        "nu": _pair(lp.nu),
        "T0": list(lp.T0),
        "T1": None if lp.T1 is None else list(lp.T1),
        "T2": None if lp.T2 is None else list(lp.T2),
        "psi1_limit": lp.psi1_limit,
        "psi2_limit": lp.psi2_limit,
        "quotient_genus": lp.quotient_genus,
        "end_description": lp.end_description,
        "screw_angle": lp.screw_angle,
        "eps": lp.eps,
    }


def _load(path: str):
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise VclError(f"{path}: not valid JSON: {exc}") from None
    parsed = parse_config(doc)
    digest = hashlib.sha256(raw).hexdigest()
    return parsed, digest


def _motion_for(parsed) -> Motion:
    if parsed.motion is not None:
        return parsed.motion
    return balance.infer_motion(parsed.config)


def _write_config(path: str, config: VortexConfig, motion: Optional[Motion], symmetry=None) -> None:
    with open(path, "w") as fh:
        json.dump(serialize_config(config, motion, symmetry), fh, indent=2)
        fh.write("\n")


def _emit(report: dict) -> None:
    json.dump(report, sys.stdout, indent=2)
    sys.stdout.write("\n")


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------


def _build_family(args) -> tuple[VortexConfig, Motion]:
    fam = args.family
    if fam == "thomson":
        return catalog.thomson(args.n, args.sigma)
    if fam == "hermite":
        return catalog.hermite_config(args.n)
    if fam == "interlaced-hermite":
        return catalog.interlaced_hermite(args.m)
    if fam == "polygon-center":
        return catalog.polygon_with_center(args.n, args.center_sigma)
    if fam == "nested":
        return catalog.nested_polygons(args.k, args.root)
    if fam == "adler-moser":
        return catalog.adler_moser_config(args.j)
    if fam == "pair":
        return catalog.vortex_pair()
    if fam == "karman":
        return catalog.karman_street(args.b, not args.unstaggered)
    if fam == "dipole":
        tau = complex(args.tau_re, args.tau_im)
        offset = complex(args.offset_re, args.offset_im)
        return catalog.doubly_dipole(tau, offset)
    raise VclError(f"unknown family {fam!r}")


def _cmd_generate(args) -> dict:
    config, motion = _build_family(args)
    if args.normalize:
        config, motion = normalize(config, motion)
    report = check_balance(config, motion, tol=args.tol)
    doc = serialize_config(config, motion)
    out = {"family": args.family, "document": doc, "balance": _balance_doc(report)}
    if args.output:
        _write_config(args.output, config, motion)
        out["files"] = {"config": args.output}
    if args.plot:
        plotting.save_config_plot(args.plot, config, motion, title=args.family)
        out.setdefault("files", {})["plot"] = args.plot
    return out


def _cmd_check(args) -> dict:
    parsed, digest = _load(args.config)
    motion = _motion_for(parsed)
    report = check_balance(parsed.config, motion, tol=args.tol)
    out = {
        "input_digest": digest,
        "motion": {"v": _pair(motion.v), "omega": motion.omega, "inferred": parsed.motion is None},
        "balance": _balance_doc(report),
    }
    if args.plot:
        plotting.save_config_plot(args.plot, parsed.config, motion)
        out["files"] = {"plot": args.plot}
    return out


def _cmd_solve(args) -> dict:
    parsed, digest = _load(args.config)
    motion = _motion_for(parsed)
    settings = SolveSettings(tol=args.tol, max_iter=args.max_iter, damping=args.damping, gauge=args.gauge)
    symmetry = None
    if args.symmetry:
        symmetry = parsed.symmetry if parsed.symmetry is not None else detect_symmetries(parsed.config)
    config, motion, report = solver.refine(
        parsed.config, motion, settings, symmetry=symmetry, fit_motion=args.fit_motion
    )
    out = {
        "input_digest": digest,
        "iterationsettings": {"tol": settings.tol, "max_iter": settings.max_iter, "gauge": settings.gauge},
        "motion": {"v": _pair(motion.v), "omega": motion.omega},
        "balance": _balance_doc(report),
    }
    if args.output:
        _write_config(args.output, config, motion)
        out["files"] = {"config": args.output}
    return out


def _cmd_rank(args) -> dict:
    parsed, digest = _load(args.config)
    motion = _motion_for(parsed)
    out = {"input_digest": digest}
    if args.symmetry:
        group = parsed.symmetry if parsed.symmetry is not None else detect_symmetries(parsed.config)
        report = restricted_rank_report(
            parsed.config, motion, group, rel_tol=args.rank_tol, balance_tol=args.tol
        )
        out["symmetry_order"] = group.order
    else:
        report = rank_report(parsed.config, motion, rel_tol=args.rank_tol, balance_tol=args.tol)
    out["rank"] = _rank_doc(report, with_jacobian=args.with_jacobian)
    if args.require_nondegenerate and not report.nondegenerate:
        raise VclError(
            f"degenerate: rank {report.rank} < {report.max_possible_rank} (singular values {report.singular_values.tolist()})"
        )
    return out


def _cmd_integrate(args) -> dict:
    parsed, digest = _load(args.config)
    traj = solver.integrate(parsed.config, args.t_end, args.dt)
    drift = solver.rigidity_drift(traj)
    out = {
        "input_digest": digest,
        "samples": len(traj.times),
        "t_end": float(traj.times[-1]),
        "rigidity_drift": drift,
        "final_positions": [_pair(z) for z in traj.states[-1]],
        "final_motion_fit": {
            "v": _pair(traj.motion_fit[-1].v),
            "omega": traj.motion_fit[-1].omega,
        },
    }
    files = {}
    if args.output:
        with open(args.output, "w") as fh:
            cols = ",".join(f"p{k}_re,p{k}_im" for k in range(parsed.config.n))
            fh.write(f"t,{cols}\n")
            for t, state in zip(traj.times, traj.states):
                row = ",".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in state)
                fh.write(f"{float(t)!r},{row}\n")
        files["trajectory"] = args.output
    if args.plot:
        plotting.save_trajectory_plot(args.plot, traj.times, traj.states, parsed.config.circulations)
        files["plot"] = args.plot
    if files:
        out["files"] = files
    return out


_SWEEP_FAMILIES = ("karman", "dipole")


def _sweep_family(args):
    if args.family == "karman":
        if args.param != "b":
            raise VclError("karman sweeps support --param b")
        return lambda b: catalog.karman_street(b, not args.unstaggered)
    if args.family == "dipole":
        if args.param != "s":
            raise VclError("dipole sweeps support --param s (tau = i*s)")

        def make(s: float):
            tau = 1j * s
            offsets = {
                "center": (1.0 + tau) / 2.0,
                "half-x": 0.5 + 0j,
                "half-tau": tau / 2.0,
            }
            return catalog.doubly_dipole(tau, offsets[args.offset])

        return make
    raise VclError(f"sweep supports families {_SWEEP_FAMILIES}")


def _cmd_sweep(args) -> dict:
    family = _sweep_family(args)
    rows = solver.sweep(
        family,
        (getattr(args, "from"), args.to),
        args.steps,
        settings=SolveSettings(tol=args.tol),
        rank_rel_tol=args.rank_tol,
    )
    table = [
        {
            "param": par,
            "v": _pair(motion.v),
            "omega": motion.omega,
            "rank": rep.rank,
            "nondegenerate": rep.nondegenerate,
        }
        for par, cfg, motion, rep in rows
    ]
    transitions = [
        table[i]["param"] for i in range(1, len(table)) if table[i]["rank"] != table[i - 1]["rank"]
    ]
    out = {"family": args.family, "param": args.param, "steps": args.steps, "rows": table, "rank_transitions": transitions}
    files = {}
    if args.output:
        with open(args.output, "w") as fh:
            fh.write("param,v_re,v_im,omega,rank,nondegenerate\n")
            for r in table:
                fh.write(
                    f"{r['param']!r},{r['v'][0]!r},{r['v'][1]!r},{r['omega']!r},{r['rank']},{int(r['nondegenerate'])}\n"
                )
        files["csv"] = args.output
    if args.plot and table:
        plotting.save_sweep_plot(
            args.plot,
            np.array([r["param"] for r in table]),
            np.array([complex(*r["v"]) for r in table]),
            np.array([r["rank"] for r in table]),
            args.param,
        )
        files["plot"] = args.plot
    if files:
        out["files"] = files
    return out


def _cmd_field(args) -> dict:
    parsed, digest = _load(args.config)
    config = parsed.config
    if args.extent is None:
        if isinstance(config.geometry, DoublyPeriodic):
            extent = max(1.0, abs(config.geometry.tau)) * 0.75
        elif config.is_periodic:
            extent = 1.0
        else:
            spread = float(np.max(np.abs(config.positions - np.mean(config.positions))))
            extent = 1.5 * max(spread, 0.5)
        center = complex(np.mean(config.positions))
    else:
        extent = args.extent
        center = complex(args.center_re, args.center_im)
    pts, vel = surface.sample_flow_grid(config, extent, args.grid, center)
    out = {
        "input_digest": digest,
        "grid": args.grid,
        "extent": extent,
        "samples": int(len(pts)),
        "max_speed": float(np.max(np.abs(vel))) if len(pts) else 0.0,
    }
    files = {}
    if args.output:
        surface.write_field_csv(args.output, pts, vel)
        files["csv"] = args.output
    if args.plot:
        plotting.save_field_plot(args.plot, config, pts, vel)
        files["plot"] = args.plot
    if files:
        out["files"] = files
    return out


def _cmd_mesh(args) -> dict:
    parsed, digest = _load(args.config)
    settings = MeshSettings(
        outer_radius=args.outer_radius,
        rings=args.rings,
        sectors=args.sectors,
        background=args.background,
        turns=args.turns,
    )
    doc = surface.export_mesh(parsed.config, settings, eps=args.eps)
    lines_path = args.lines_output or (args.output.rsplit(".", 1)[0] + "_lines.obj")
    doc.write_obj(args.output)
    doc.write_lines_obj(lines_path)
    return {
        "input_digest": digest,
        "stats": doc.stats,
        "files": {"mesh": args.output, "lines": lines_path},
    }


def _cmd_limits(args) -> dict:
    parsed, digest = _load(args.config)
    motion = _motion_for(parsed)
    lp = surface.limit_periods(parsed.config, motion, args.eps, tol=args.tol)
    return {"input_digest": digest, "limits": _limits_doc(lp)}


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vcl",
        description="Binary point-vortex crystals: generate, verify, refine, classify, and export helicoid-limit geometry.",
    )
    parser.add_argument("--version", action="version", version=f"vcl {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_tol(p):
        p.add_argument("--tol", type=float, default=default_tolerance(), help="balance tolerance (env VCL_TOL)")

    gen = sub.add_parser("generate", help="emit a catalog crystal as a configuration document")
    gensub = gen.add_subparsers(dest="family", required=True)

    def gen_common(p):
        p.add_argument("--output", "-o", help="write the configuration document here")
        p.add_argument("--plot", help="write a PNG of the configuration here")
        p.add_argument("--normalize", action="store_true", help="apply the class normalization before writing")
        add_tol(p)
        p.set_defaults(handler=_cmd_generate)

    p = gensub.add_parser("thomson", help="regular polygon of identical vortices")
    p.add_argument("--n", type=int, required=True, help="number of vortices")
    p.add_argument("--sigma", type=int, default=1, choices=(1, -1), help="common circulation")
    gen_common(p)
    p = gensub.add_parser("hermite", help="co-rotating line at Hermite roots")
    p.add_argument("--n", type=int, required=True, help="Hermite degree")
    gen_common(p)
    p = gensub.add_parser("interlaced-hermite", help="interlaced Hermite roots of both signs")
    p.add_argument("--m", type=int, required=True, help="inner root count")
    gen_common(p)
    p = gensub.add_parser("polygon-center", help="polygon with an extra center vortex")
    p.add_argument("--n", type=int, required=True, help="polygon vertex count")
    p.add_argument("--center-sigma", type=int, default=1, choices=(1, -1), help="center circulation")
    gen_common(p)
    p = gensub.add_parser("nested", help="two staggered concentric polygons of opposite sign")
    p.add_argument("--k", type=int, required=True, help="family index; polygons have k+1 vertices")
    p.add_argument("--root", choices=("small", "large"), default="small", help="which ratio-equation root")
    gen_common(p)
    p = gensub.add_parser("adler-moser", help="mirror-symmetric translating polynomial crystal")
    p.add_argument("--j", type=int, required=True, help="ladder index (1..8)")
    gen_common(p)
    p = gensub.add_parser("pair", help="translating vortex pair")
    gen_common(p)
    p = gensub.add_parser("karman", help="singly periodic vortex street")
    p.add_argument("--b", type=float, required=True, help="row separation")
    p.add_argument("--unstaggered", action="store_true", help="aligned rows instead of staggered")
    gen_common(p)
    p = gensub.add_parser("dipole", help="doubly periodic opposite pair")
    p.add_argument("--tau-re", type=float, default=0.0, help="Re tau")
    p.add_argument("--tau-im", type=float, default=1.0, help="Im tau")
    p.add_argument("--offset-re", type=float, required=True, help="Re offset")
    p.add_argument("--offset-im", type=float, required=True, help="Im offset")
    gen_common(p)

    p = sub.add_parser("check", help="balance report for a configuration document")
    p.add_argument("config", help="configuration document path")
    p.add_argument("--plot", help="write a PNG of the configuration here")
    add_tol(p)
    p.set_defaults(handler=_cmd_check)

    p = sub.add_parser("solve", help="refine a near-crystal to a balanced one")
    p.add_argument("config")
    p.add_argument("--output", "-o", help="write the refined document here")
    p.add_argument("--max-iter", type=int, default=50)
    p.add_argument("--damping", type=float, default=1.0)
    p.add_argument("--gauge", choices=solver.GAUGES, default="auto")
    p.add_argument("--symmetry", action="store_true", help="refine inside the detected/declared symmetry class")
    p.add_argument("--fit-motion", action="store_true", help="solve for the rigid motion alongside positions")
    add_tol(p)
    p.set_defaults(handler=_cmd_solve)

    p = sub.add_parser("rank", help="Jacobian rank / nondegeneracy report")
    p.add_argument("config")
    p.add_argument("--symmetry", action="store_true", help="restrict to the symmetry-compatible subspace")
    p.add_argument("--rank-tol", type=float, default=None, help="relative singular-value threshold")
    p.add_argument("--require-nondegenerate", action="store_true", help="exit 1 when degenerate")
    p.add_argument("--with-jacobian", action="store_true", help="embed the Jacobian matrix in the report")
    add_tol(p)
    p.set_defaults(handler=_cmd_rank)

    p = sub.add_parser("integrate", help="RK4 trajectory of the vortex flow")
    p.add_argument("config")
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--output", "-o", help="write the trajectory CSV here")
    p.add_argument("--plot", help="write a PNG of the trajectories here")
    p.set_defaults(handler=_cmd_integrate)

    p = sub.add_parser("sweep", help="refine a family over a parameter range")
    famsub = p.add_subparsers(dest="family", required=True)
    for fam, extra in (("karman", "b"), ("dipole", "s")):
        q = famsub.add_parser(fam)
        q.add_argument("--param", required=True, help=f"swept parameter ({extra})")
        q.add_argument("--from", type=float, required=True, dest="from")
        q.add_argument("--to", type=float, required=True)
        q.add_argument("--steps", type=int, required=True)
        q.add_argument("--rank-tol", type=float, default=None)
        q.add_argument("--output", "-o", help="write the sweep CSV here")
        q.add_argument("--plot", help="write a PNG of the sweep here")
        if fam == "karman":
            q.add_argument("--unstaggered", action="store_true")
        else:
            q.add_argument("--offset", choices=("center", "half-x", "half-tau"), default="center")
        add_tol(q)
        q.set_defaults(handler=_cmd_sweep)

    p = sub.add_parser("field", help="sample the flow field on a grid")
    p.add_argument("config")
    p.add_argument("--grid", type=int, default=40, help="points per side")
    p.add_argument("--extent", type=float, default=None, help="half-width of the sampling square")
    p.add_argument("--center-re", type=float, default=0.0)
    p.add_argument("--center-im", type=float, default=0.0)
    p.add_argument("--output", "-o", help="write the field CSV here")
    p.add_argument("--plot", help="write a quiver PNG here")
    p.set_defaults(handler=_cmd_field)

    p = sub.add_parser("mesh", help="export the multigraph rendering as OBJ")
    p.add_argument("config")
    p.add_argument("--output", "-o", required=True, help="mesh OBJ path")
    p.add_argument("--lines-output", help="vortex-axis OBJ path (default: <mesh>_lines.obj)")
    p.add_argument("--eps", type=float, default=0.0, help="family parameter recorded in the report")
    p.add_argument("--turns", type=int, default=1)
    p.add_argument("--outer-radius", type=float, default=None)
    p.add_argument("--rings", type=int, default=8)
    p.add_argument("--sectors", type=int, default=48)
    p.add_argument("--background", type=int, default=24)
    p.set_defaults(handler=_cmd_mesh)

    p = sub.add_parser("limits", help="period vectors and genus of the limit surface family")
    p.add_argument("config")
    p.add_argument("--eps", type=float, required=True)
    add_tol(p)
    p.set_defaults(handler=_cmd_limits)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        body = args.handler(args)
    except VclError as exc:
        json.dump({"error": {"code": exc.code, "message": str(exc)}}, sys.stderr, indent=2)
        sys.stderr.write("\n")
        return 1
    except ValueError as exc:
        json.dump({"error": {"code": "invalid-argument", "message": str(exc)}}, sys.stderr, indent=2)
        sys.stderr.write("\n")
        return 1
    except OSError as exc:
        json.dump({"error": {"code": "io", "message": str(exc)}}, sys.stderr, indent=2)
        sys.stderr.write("\n")
        return 1
    report = {
        "command": (sys.argv[1:] if argv is None else list(argv)),
        "tool": {"name": "vcl", "version": __version__},
        "wall_time_s": round(time.perf_counter() - start, 6),
    }
    report.update(body)
    _emit(report)
    return 0


if __name__ == "__main__":
    sys.exit(main())
