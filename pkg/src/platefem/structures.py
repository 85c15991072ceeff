"""Ready-made structures: benchmark plates, the L-fold, the open box.

Patch normals of folded structures are chosen consistently (outward
for the box): unfolding any plate onto its neighbour about their
common segment brings the two normals into agreement, which is what
the parity rule for junction traces assumes.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .mesh import TriMesh6
from .model import Load, Material, PlatePatch, StructureModel

__all__ = [
    "square_plate",
    "rectangle_plate",
    "l_structure",
    "box_open_top",
    "box_fixed_nodes",
]


def rectangle_plate(
    lx: float,
    ly: float,
    material: Material,
    tags: Sequence[str] = ("clamped",) * 4,
    load: Optional[Sequence[float]] = None,
    beta0: float = 10.0,
) -> StructureModel:
    """One rectangular patch in the z = 0 plane with normal +z.

    Sides in tag order: y=0, x=lx, y=ly, x=0.
    """
    patch = PlatePatch(
        id=0,
        vertices=np.array(
            [[0.0, 0.0, 0.0], [lx, 0.0, 0.0], [lx, ly, 0.0], [0.0, ly, 0.0]]
        ),
        normal=np.array([0.0, 0.0, 1.0]),
        boundary_tags=tuple(tags),
    )
    loads = (Load(force=np.asarray(load, float), patch_id=0),) if load is not None else ()
    return StructureModel(patches=(patch,), material=material, loads=loads, penalty_beta0=beta0)


def square_plate(
    side: float,
    material: Material,
    tags: Sequence[str] = ("clamped",) * 4,
    load: Optional[Sequence[float]] = None,
    beta0: float = 10.0,
) -> StructureModel:
    return rectangle_plate(side, side, material, tags=tags, load=load, beta0=beta0)


def l_structure(
    material: Material,
    load: Sequence[float] = (0.0, 0.0, 1.0),
    beta0: float = 10.0,
    cantilevered: bool = True,
) -> StructureModel:
    """Two unit plates meeting at a right angle along the x axis.

    Plate 0 lies in z = 0 (y in [-1, 0], normal +z), plate 1 in y = 0
    (z in [0, 1], normal -y); the load acts on plate 0 only.  The
    default configuration clamps only plate 0's far edge and leaves
    everything else (except the junction) free, so the fold transmits a
    moment field that is smooth up to the junction endpoints; with
    ``cantilevered=False`` every outer edge is clamped instead.
    """
    if cantilevered:
        tags0 = ("clamped", "free", "junction", "free")
        tags1 = ("junction", "free", "free", "free")
    else:
        tags0 = ("clamped", "clamped", "junction", "clamped")
        tags1 = ("junction", "clamped", "clamped", "clamped")
    p0 = PlatePatch(
        id=0,
        vertices=np.array(
            [[0.0, -1.0, 0.0], [1.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]
        ),
        normal=np.array([0.0, 0.0, 1.0]),
        boundary_tags=tags0,
    )
    p1 = PlatePatch(
        id=1,
        vertices=np.array(
            [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 0.0, 1.0], [0.0, 0.0, 1.0]]
        ),
        normal=np.array([0.0, -1.0, 0.0]),
        boundary_tags=tags1,
    )
    return StructureModel(
        patches=(p0, p1),
        material=material,
        loads=(Load(force=np.asarray(load, float), patch_id=0),),
        penalty_beta0=beta0,
    )


def box_open_top(
    material: Material,
    wall_load: Sequence[float] = (0.0, 0.0, 0.0),
    beta0: float = 10.0,
) -> StructureModel:
    """Unit box surface with the lid missing: floor plus four walls.

    All shared segments (four floor-wall, four wall-wall) are
    junctions; the top edges of the walls are free.  Normals point
    outward.  ``wall_load`` acts on the x = 0 wall (patch 1).
    """
    floor = PlatePatch(
        id=0,
        vertices=np.array(
            [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]]
        ),
        normal=np.array([0.0, 0.0, -1.0]),
        boundary_tags=("junction",) * 4,
    )
    wall_x0 = PlatePatch(
        id=1,
        vertices=np.array(
            [[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 1.0, 1.0], [0.0, 0.0, 1.0]]
        ),
        normal=np.array([-1.0, 0.0, 0.0]),
        boundary_tags=("junction", "junction", "free", "junction"),
    )
    wall_x1 = PlatePatch(
        id=2,
        vertices=np.array(
            [[1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [1.0, 1.0, 1.0], [1.0, 0.0, 1.0]]
        ),
        normal=np.array([1.0, 0.0, 0.0]),
        boundary_tags=("junction", "junction", "free", "junction"),
    )
    wall_y0 = PlatePatch(
        id=3,
        vertices=np.array(
            [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 0.0, 1.0], [0.0, 0.0, 1.0]]
        ),
        normal=np.array([0.0, -1.0, 0.0]),
        boundary_tags=("junction", "junction", "free", "junction"),
    )
    wall_y1 = PlatePatch(
        id=4,
        vertices=np.array(
            [[0.0, 1.0, 0.0], [1.0, 1.0, 0.0], [1.0, 1.0, 1.0], [0.0, 1.0, 1.0]]
        ),
        normal=np.array([0.0, 1.0, 0.0]),
        boundary_tags=("junction", "junction", "free", "junction"),
    )
    loads = ()
    if np.any(np.asarray(wall_load, float)):
        loads = (Load(force=np.asarray(wall_load, float), patch_id=1),)
    return StructureModel(
        patches=(floor, wall_x0, wall_x1, wall_y0, wall_y1),
        material=material,
        loads=loads,
        penalty_beta0=beta0,
    )


def box_fixed_nodes(mesh: TriMesh6, mode: str = "edges") -> list[int]:
    """Nodes pinned to the ground for the open-box structure.

    ``edges``: the nodes on the four floor-wall junction lines (the
    floor's outer boundary); ``face``: every node of the floor plane.
    """
    tol = 1e-9 * max(mesh.diameter(), 1e-300)
    z0 = np.abs(mesh.nodes[:, 2]) <= tol
    if mode == "face":
        return sorted(int(i) for i in np.flatnonzero(z0))
    if mode == "edges":
        x, y = mesh.nodes[:, 0], mesh.nodes[:, 1]
        ring = (
            (np.abs(x) <= tol)
            | (np.abs(x - 1.0) <= tol)
            | (np.abs(y) <= tol)
            | (np.abs(y - 1.0) <= tol)
        )
        return sorted(int(i) for i in np.flatnonzero(z0 & ring))
    raise ValueError(f"unknown floor fixing mode {mode!r} (use 'edges' or 'face')")
