"""Finite elements for Kirchhoff plate structures arbitrarily oriented in 3-D.

Displacements are approximated with continuous quadratic triangles in
full Cartesian coordinates; rotation continuity across element edges,
plate junctions, and clamped boundaries is enforced weakly by
symmetric interior-penalty terms whose jumps and averages respect the
parity of each trace's dependence on the edge conormal.
"""

from .errors import (
    AssemblyError,
    ConfigError,
    GeometryError,
    MeshError,
    PlateFemError,
    SolverError,
)
from .model import Load, Material, PlatePatch, StructureModel
from .mesh import (
    TriMesh6,
    build_patch_mesh,
    mark_and_refine,
    mesh_structure,
    refine_uniform,
    stitch_structure,
)
from .assembly import DofMap, SparseSystem, apply_constraints, build_system
from .solver import Solution, energies, residual_indicators, solve, solve_structure, trace_diagnostics
from .benchmarks import convergence_study, navier_deflection

__version__ = "0.1.0"

__all__ = [
    "AssemblyError",
    "ConfigError",
    "GeometryError",
    "MeshError",
    "PlateFemError",
    "SolverError",
    "Load",
    "Material",
    "PlatePatch",
    "StructureModel",
    "TriMesh6",
    "build_patch_mesh",
    "mark_and_refine",
    "mesh_structure",
    "refine_uniform",
    "stitch_structure",
    "DofMap",
    "SparseSystem",
    "apply_constraints",
    "build_system",
    "Solution",
    "energies",
    "residual_indicators",
    "solve",
    "solve_structure",
    "trace_diagnostics",
    "convergence_study",
    "navier_deflection",
]
