"""Batch command line: deform, beta sweeps and operator comparison."""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import metrics
from .guidance import GuidanceError
from .mesh import MeshError, load_obj, save_obj, save_ply
from .metrics import DEFAULT_BETAS, beta_sweep
from .pipeline import DeformationPipeline
from .scenario import ScenarioError, dump_resolved, load_scenario, \
    resolve_handles, resolve_mesh_path
from .solver import SolverError

METRICS_CSV_HEADER = "triangle,energy,e_iso,e_conf"


def _load(args):
    scn = load_scenario(args.scenario)
    if args.beta is not None:
        if not 0.0 <= args.beta < 1.0:
            raise ScenarioError(f"beta must be in [0, 1), got {args.beta}")
        scn = type(scn)(scn.mesh_path, scn.handles, args.beta, scn.operator,
                        scn.base_dir)
    if getattr(args, "operator", None):
        scn = type(scn)(scn.mesh_path, scn.handles, scn.beta, args.operator,
                        scn.base_dir)
    mesh_path = resolve_mesh_path(scn)
    if not os.path.exists(mesh_path):
        raise FileNotFoundError(f"mesh file not found: {mesh_path}")
    mesh = load_obj(mesh_path)
    handles = resolve_handles(scn, mesh)
    return scn, mesh, handles


def _outdir(args) -> str:
    out = args.out_dir or "."
    os.makedirs(out, exist_ok=True)
    return out


def _metrics_csv(pipeline, X, handles) -> str:
    le = metrics.local_energy(pipeline.G, X, pipeline.guidance(handles).Z)
    sig = metrics.singular_values(pipeline.mesh, X)
    e_iso, e_conf, _, _ = metrics.iso_conf_errors(sig)
    lines = [METRICS_CSV_HEADER]
    for t in range(len(le)):
        lines.append(f"{t},{float(le[t])!r},{float(e_iso[t])!r},"
                     f"{float(e_conf[t])!r}")
    return "\n".join(lines) + "\n"


def cmd_deform(args) -> int:
    scn, mesh, handles = _load(args)
    if args.dump_resolved:
        sys.stdout.write(dump_resolved(scn, handles))
        return 0
    pipeline = DeformationPipeline(mesh)
    res = pipeline.deform(handles, scn.beta, scn.operator)
    out = _outdir(args)
    save_obj(mesh, os.path.join(out, "deformed.obj"), res.positions)
    vertex_rgb = metrics.triangle_colors_to_vertex(mesh, res.colors)
    save_ply(mesh, os.path.join(out, "energy.ply"), vertex_rgb, res.positions)
    with open(os.path.join(out, "metrics.csv"), "w") as f:
        f.write(_metrics_csv(pipeline, res.positions, handles))
    print(f"E_P={res.energies.e_p:.6g} E_R={res.energies.e_r:.6g} "
          f"E_beta={res.energies.e_beta:.6g}")
    print(f"max_iso={res.max_iso:.6g} max_conf={res.max_conf:.6g}")
    return 0


def _parse_betas(text: str) -> list[float]:
    try:
        betas = [float(b) for b in text.split(",") if b.strip()]
    except ValueError:
        raise ScenarioError(f"malformed beta list {text!r}") from None
    if not betas or betas != sorted(set(betas)) or \
            any(not 0.0 <= b < 1.0 for b in betas):
        raise ScenarioError("betas must be strictly increasing values in [0, 1)")
    return betas


def _write_sweep_svg(result, path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    betas = [r.beta for r in result.rows]
    floor = 1e-16  # log axis cannot show exact zeros
    iso = [max(r.max_iso, floor) for r in result.rows]
    conf = [max(r.max_conf, floor) for r in result.rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(betas, iso, "o-", label="max isometric error")
    ax.plot(betas, conf, "s-", label="max conformal error")
    ax.set_yscale("log")
    ax.set_xlabel("beta")
    ax.set_ylabel("max error")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def cmd_sweep(args) -> int:
    scn, mesh, handles = _load(args)
    if args.dump_resolved:
        sys.stdout.write(dump_resolved(scn, handles))
        return 0
    betas = _parse_betas(args.betas) if args.betas else list(DEFAULT_BETAS)
    pipeline = DeformationPipeline(mesh)
    result = beta_sweep(pipeline, handles, betas, scn.operator)
    out = _outdir(args)
    with open(os.path.join(out, "sweep.csv"), "w") as f:
        f.write(result.to_csv())
    _write_sweep_svg(result, os.path.join(out, "sweep.svg"))
    for r in result.rows:
        print(f"beta={r.beta:g} max_iso={r.max_iso:.6g} max_conf={r.max_conf:.6g}")
    return 0


def cmd_compare(args) -> int:
    scn, mesh, handles = _load(args)
    if args.dump_resolved:
        sys.stdout.write(dump_resolved(scn, handles))
        return 0
    if scn.beta == 0.0:
        print("warning: beta=0 makes the operators identical; "
              "comparison is vacuous", file=sys.stderr)
    pipeline = DeformationPipeline(mesh)
    res_flat = pipeline.deform(handles, scn.beta, "flat")
    res_curved = pipeline.deform(handles, scn.beta, "curved")
    out = _outdir(args)
    save_obj(mesh, os.path.join(out, "deformed_flat.obj"), res_flat.positions)
    save_obj(mesh, os.path.join(out, "deformed_curved.obj"), res_curved.positions)
    diff = res_curved.positions - res_flat.positions
    dist = np.linalg.norm(diff, axis=1)
    with open(os.path.join(out, "operator_diff.csv"), "w") as f:
        f.write("vertex,dx,dy,dz,distance\n")
        for v in range(len(diff)):
            f.write(f"{v},{float(diff[v, 0])!r},{float(diff[v, 1])!r},"
                    f"{float(diff[v, 2])!r},{float(dist[v])!r}\n")
    print(f"max_displacement_diff={dist.max():.6g}")
    print(f"flat: max_iso={res_flat.max_iso:.6g}  "
          f"curved: max_iso={res_curved.max_iso:.6g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="harmonica",
        description="Handle-based harmonic surface deformation with energy "
                    "regularization")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--scenario", required=True, help="scenario JSON path")
        sp.add_argument("--beta", type=float, default=None,
                        help="override scenario beta")
        sp.add_argument("--operator", choices=["flat", "curved"], default=None,
                        help="override scenario operator")
        sp.add_argument("--out-dir", default=None, help="output directory")
        sp.add_argument("--dump-resolved", action="store_true",
                        help="print the scenario with frozen vertex lists and exit")

    common(sub.add_parser("deform", help="run one deformation"))
    sp = sub.add_parser("sweep", help="run a beta sweep")
    common(sp)
    sp.add_argument("--betas", default=None,
                    help="comma-separated increasing beta values in [0, 1)")
    common(sub.add_parser("compare", help="compare flat vs curved operators"))
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    commands = {"deform": cmd_deform, "sweep": cmd_sweep, "compare": cmd_compare}
    try:
        return commands[args.command](args)
    except (ScenarioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (MeshError, GuidanceError, SolverError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
