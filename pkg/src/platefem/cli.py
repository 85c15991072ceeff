"""Command-line interface.

Subcommands: ``solve <config>``, ``converge <config>``,
``demo box --t <thickness>``, ``export <config>``.  Exit codes:
0 success, 1 user error (config, paths, unknown names), 2 numerical
failure.  Outputs are deterministic: identical configs produce
byte-identical reports and geometry files.

Set ``PLATEFEM_THREADS`` to bound the BLAS thread count used by the
linear algebra backend (best effort; must be set before numpy loads).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

if "PLATEFEM_THREADS" in os.environ and "platefem._threads_set" not in sys.modules:
    # honored only if numpy is not yet initialized in this process
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, os.environ["PLATEFEM_THREADS"])

import numpy as np

from .assembly import DofMap, coo_text
from .benchmarks import convergence_study
from .config import (
    DemoConfig,
    RunConfig,
    load_config,
    material_from_config,
    serialize_config,
    structure_from_config,
)
from .errors import ConfigError, PlateFemError, SolverError
from .mesh import dump_mesh, mark_and_refine, mesh_structure, refine_uniform
from .model import Load, Material, StructureModel
from .solver import energies, residual_indicators, solve_structure, trace_diagnostics
from .structures import box_fixed_nodes, box_open_top
from .vtk_io import write_vtk

logger = logging.getLogger("platefem")

EXIT_OK = 0
EXIT_USER_ERROR = 1
EXIT_NUMERICAL = 2


def _fmt(x: float) -> str:
    return f"{float(x):.12e}"


def _report_text(config_text: str, sol, energy, diag) -> str:
    lines = ["# platefem solve report", ""]
    lines.append("## energies")
    lines.append(f"{'membrane':24s} {_fmt(energy.membrane)}")
    lines.append(f"{'bending volume':24s} {_fmt(energy.bending_volume)}")
    lines.append(f"{'bending consistency':24s} {_fmt(energy.bending_consistency)}")
    lines.append(f"{'bending penalty':24s} {_fmt(energy.bending_penalty)}")
    lines.append(f"{'bending total':24s} {_fmt(energy.bending_total)}")
    lines.append(f"{'load work':24s} {_fmt(energy.load_work)}")
    lines.append("")
    lines.append("## solution")
    umax = float(np.abs(sol.displacements).max(initial=0.0))
    lines.append(f"{'nodes':24s} {sol.mesh.n_nodes}")
    lines.append(f"{'elements':24s} {sol.mesh.n_elements}")
    lines.append(f"{'mesh size h':24s} {_fmt(sol.mesh.mesh_size_h)}")
    lines.append(f"{'max |u|':24s} {_fmt(umax)}")
    lines.append(f"{'solver':24s} {sol.stats.method}")
    lines.append(f"{'algebraic residual':24s} {_fmt(sol.stats.residual)}")
    lines.append("")
    lines.append("## trace diagnostics (interior/junction edges)")
    junction_m = diag.junction_moment_l2()
    interior_m = diag.interior_moment_l2()
    max_corner = max(diag.corner_sums.values(), default=0.0)
    lines.append(f"{'junction |[M]| L2':24s} {_fmt(junction_m)}")
    lines.append(f"{'all-edge |[M]| L2':24s} {_fmt(interior_m)}")
    lines.append(f"{'max corner-force sum':24s} {_fmt(max_corner)}")
    lines.append("")
    lines.append("## machine-readable")
    kv = {
        "energy.membrane": energy.membrane,
        "energy.bending_volume": energy.bending_volume,
        "energy.bending_consistency": energy.bending_consistency,
        "energy.bending_penalty": energy.bending_penalty,
        "energy.bending_total": energy.bending_total,
        "energy.load_work": energy.load_work,
        "solution.max_abs_u": umax,
        "solution.residual": sol.stats.residual,
        "diagnostics.junction_moment_l2": junction_m,
        "diagnostics.interior_moment_l2": interior_m,
        "diagnostics.max_corner_force": max_corner,
    }
    for key in sorted(kv):
        lines.append(f"{key} = {_fmt(kv[key])}")
    lines.append("")
    lines.append("## config")
    lines.extend("# " + line for line in config_text.rstrip("\n").splitlines())
    return "\n".join(lines) + "\n"


def _solve_configured(cfg: RunConfig, fixed_nodes=()):
    model = structure_from_config(cfg)
    mesh = mesh_structure(model, cfg.subdivisions)
    for _ in range(cfg.refinements):
        mesh = refine_uniform(mesh)
    fixed = list(fixed_nodes)
    for pid in cfg.fixed_patches:
        on_patch = set()
        for e in range(mesh.n_elements):
            if int(mesh.element_patch[e]) == pid:
                on_patch.update(int(i) for i in mesh.elements[e])
        fixed.extend(sorted(on_patch))
    dm = DofMap.from_mesh(mesh, fixed_nodes=fixed)
    sol = solve_structure(model, mesh, dofmap=dm)
    if cfg.adaptivity.enabled:
        for _ in range(cfg.adaptivity.steps):
            eta = residual_indicators(sol)
            mesh = mark_and_refine(mesh, eta, cfg.adaptivity.theta)
            dm = DofMap.from_mesh(mesh, fixed_nodes=())
            sol = solve_structure(model, mesh, dofmap=dm)
    return sol


def _write_outputs(cfg: RunConfig, sol, config_text: str, out_dir: Path) -> list[str]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    energy = energies(sol)
    diag = trace_diagnostics(sol)
    report = _report_text(config_text, sol, energy, diag)
    (out_dir / "report.txt").write_text(report, encoding="utf-8")
    written.append("report.txt")
    if cfg.output.vtk:
        write_vtk(out_dir / "solution.vtk", sol.mesh, sol, scale=cfg.output.deform_scale)
        written.append("solution.vtk")
    if cfg.output.matrix:
        (out_dir / "system.coo.txt").write_text(coo_text(sol.system), encoding="ascii")
        written.append("system.coo.txt")
    if cfg.output.mesh_dump:
        (out_dir / "mesh.txt").write_text(dump_mesh(sol.mesh), encoding="ascii")
        written.append("mesh.txt")
    return written


def run_solve(cfg: RunConfig, config_text: str, out_dir=None) -> int:
    sol = _solve_configured(cfg)
    out = Path(out_dir) if out_dir else Path(cfg.output.directory)
    written = _write_outputs(cfg, sol, config_text, out)
    print(f"solved: {sol.mesh.n_nodes} nodes, {sol.mesh.n_elements} elements "
          f"({sol.stats.method}, residual {sol.stats.residual:.2e})")
    for name in written:
        print(f"wrote {out / name}")
    return EXIT_OK


def run_converge(cfg: RunConfig, out_dir=None) -> int:
    result = convergence_study(
        cfg.converge.benchmark,
        meshes=cfg.converge.meshes,
        base_subdivisions=cfg.converge.base_subdivisions,
    )
    out = Path(out_dir) if out_dir else Path(cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    table = result.to_table(
        provenance=f"regenerate: platefem converge (benchmark {result.name})"
    )
    path = out / f"convergence_{result.name}.txt"
    path.write_text(table, encoding="utf-8")
    print(table, end="")
    print(f"wrote {path}")
    return EXIT_OK


def demo_box_config(thickness: float, subdivisions: int, floor_fix: str, beta0: float) -> RunConfig:
    """The packaged box demo: unit box, lid missing, pushed at the x=0 wall.

    Material E = 1e9, nu = 0.5; load t^2 (4e7, 0, 0) on the x = 0 wall
    so the bending response stays O(1) as the thickness shrinks.
    """
    cfg = RunConfig()
    cfg.mode = "demo"
    cfg.material = {
        "youngs_modulus": 1.0e9,
        "poisson_ratio": 0.5,
        "thickness": thickness,
    }
    cfg.penalty_beta0 = beta0
    cfg.subdivisions = subdivisions
    cfg.demo = DemoConfig(
        name="box", thickness=thickness, subdivisions=subdivisions, floor_fix=floor_fix
    )
    return cfg.validate()


def run_demo(cfg: RunConfig, out_dir=None) -> int:
    if cfg.demo.name != "box":
        raise ConfigError(f"unknown demo {cfg.demo.name!r}; options: box")
    t = cfg.demo.thickness
    material = Material(
        youngs_modulus=float((cfg.material or {}).get("youngs_modulus", 1.0e9)),
        poisson_ratio=float((cfg.material or {}).get("poisson_ratio", 0.5)),
        thickness=t,
    )
    model = box_open_top(
        material, wall_load=(4.0e7 * t * t, 0.0, 0.0), beta0=cfg.penalty_beta0
    )
    mesh = mesh_structure(model, cfg.demo.subdivisions)
    fixed = box_fixed_nodes(mesh, cfg.demo.floor_fix)
    dm = DofMap.from_mesh(mesh, fixed_nodes=fixed)
    sol = solve_structure(model, mesh, dofmap=dm)
    out = Path(out_dir) if out_dir else Path(cfg.output.directory)
    config_text = serialize_config(cfg)
    written = _write_outputs(cfg, sol, config_text, out)
    energy = energies(sol)
    ratio = energy.membrane / energy.bending_total if energy.bending_total else float("nan")
    print(f"box demo t={t:g}: membrane/bending energy ratio {ratio:.6g} "
          f"({sol.stats.method}, residual {sol.stats.residual:.2e})")
    for name in written:
        print(f"wrote {out / name}")
    return EXIT_OK


def run_export(cfg: RunConfig, path, scale: float) -> int:
    sol = _solve_configured(cfg)
    write_vtk(path, sol.mesh, sol, scale=scale)
    print(f"wrote {path}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="platefem",
        description="Finite element solver for Kirchhoff plate structures in 3-D",
    )
    ap.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = ap.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve the structure described by a config")
    p_solve.add_argument("config", type=Path)
    p_solve.add_argument("--out", type=Path, default=None, help="output directory")

    p_conv = sub.add_parser("converge", help="run a convergence study benchmark")
    p_conv.add_argument("config", type=Path)
    p_conv.add_argument("--out", type=Path, default=None)

    p_demo = sub.add_parser("demo", help="run a packaged demo")
    p_demo.add_argument("name", choices=["box"])
    p_demo.add_argument("--t", type=float, default=0.01, help="plate thickness")
    p_demo.add_argument("--subdivisions", type=int, default=8)
    p_demo.add_argument("--floor-fix", choices=["edges", "face"], default="edges")
    p_demo.add_argument("--beta0", type=float, default=10.0)
    p_demo.add_argument("--out", type=Path, default=None)

    p_exp = sub.add_parser("export", help="solve and write only the VTK geometry")
    p_exp.add_argument("config", type=Path)
    p_exp.add_argument("--path", type=Path, required=True)
    p_exp.add_argument("--scale", type=float, default=1.0)
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        if args.command == "solve":
            text = args.config.read_text(encoding="utf-8")
            from .config import parse_config

            cfg = parse_config(text)
            if cfg.mode != "solve":
                raise ConfigError(f"config mode is {cfg.mode!r}, expected 'solve'")
            return run_solve(cfg, text, out_dir=args.out)
        if args.command == "converge":
            cfg = load_config(args.config)
            if cfg.mode != "converge":
                raise ConfigError(f"config mode is {cfg.mode!r}, expected 'converge'")
            return run_converge(cfg, out_dir=args.out)
        if args.command == "demo":
            cfg = demo_box_config(args.t, args.subdivisions, args.floor_fix, args.beta0)
            return run_demo(cfg, out_dir=args.out)
        if args.command == "export":
            cfg = load_config(args.config)
            if cfg.mode != "solve":
                raise ConfigError(f"config mode is {cfg.mode!r}, expected 'solve'")
            return run_export(cfg, args.path, args.scale)
        raise ConfigError(f"unknown command {args.command!r}")
    except SolverError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        if err.residual_history:
            tail = ", ".join(f"{r:.3e}" for r in err.residual_history[-5:])
            print(f"residual history (tail): {tail}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (PlateFemError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USER_ERROR


if __name__ == "__main__":
    sys.exit(main())
