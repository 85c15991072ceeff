"""Legacy ASCII VTK export of deformed plate structures.

Quadratic triangles map to VTK cell type 22 with the same node order
used internally (corners, then midsides 0-1, 1-2, 2-0).  Output is
byte-stable for fixed inputs: fixed float formatting, no timestamps.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .mesh import TriMesh6
from .solver import Solution, residual_indicators

__all__ = ["vtk_text", "write_vtk", "parse_vtk"]

VTK_QUADRATIC_TRIANGLE = 22


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _dominant_patch_normals(mesh: TriMesh6) -> np.ndarray:
    """Per-node normal of the patch owning most incident elements.

    Ties resolve to the lowest patch id, so junction nodes get a
    deterministic normal for the scalar normal-displacement field.
    """
    counts: list[dict] = [dict() for _ in range(mesh.n_nodes)]
    for e in range(mesh.n_elements):
        pid = int(mesh.element_patch[e])
        for node in mesh.elements[e]:
            counts[int(node)][pid] = counts[int(node)].get(pid, 0) + 1
    normals = np.zeros((mesh.n_nodes, 3))
    patch_normal: dict[int, np.ndarray] = {}
    for e in range(mesh.n_elements):
        patch_normal.setdefault(int(mesh.element_patch[e]), mesh.element_normal[e])
    for node, c in enumerate(counts):
        if not c:
            continue
        best = sorted(c.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]
        normals[node] = patch_normal[best]
    return normals


def vtk_text(
    mesh: TriMesh6,
    solution: Optional[Solution] = None,
    scale: float = 1.0,
    title: str = "platefem deformed plate structure",
) -> str:
    """Legacy unstructured-grid file content; points displaced by scale*u."""
    u = solution.displacements if solution is not None else np.zeros_like(mesh.nodes)
    pts = mesh.nodes + scale * u

    lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET UNSTRUCTURED_GRID"]
    lines.append(f"POINTS {mesh.n_nodes} double")
    for p in pts:
        lines.append(f"{_fmt(p[0])} {_fmt(p[1])} {_fmt(p[2])}")
    ne = mesh.n_elements
    lines.append(f"CELLS {ne} {7 * ne}")
    for e in range(ne):
        ids = " ".join(str(int(i)) for i in mesh.elements[e])
        lines.append(f"6 {ids}")
    lines.append(f"CELL_TYPES {ne}")
    lines.extend([str(VTK_QUADRATIC_TRIANGLE)] * ne)

    lines.append(f"POINT_DATA {mesh.n_nodes}")
    lines.append("VECTORS displacement double")
    for v in u:
        lines.append(f"{_fmt(v[0])} {_fmt(v[1])} {_fmt(v[2])}")
    normals = _dominant_patch_normals(mesh)
    un = np.einsum("na,na->n", u, normals)
    lines.append("SCALARS normal_displacement double 1")
    lines.append("LOOKUP_TABLE default")
    lines.extend(_fmt(x) for x in un)

    if solution is not None:
        eta = residual_indicators(solution)
        lines.append(f"CELL_DATA {ne}")
        lines.append("SCALARS indicator double 1")
        lines.append("LOOKUP_TABLE default")
        lines.extend(_fmt(x) for x in eta)
    return "\n".join(lines) + "\n"


def write_vtk(path, mesh, solution=None, scale: float = 1.0, title="platefem deformed plate structure"):
    text = vtk_text(mesh, solution, scale=scale, title=title)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(text)


def parse_vtk(text: str) -> dict:
    """Minimal re-parser for schema validation in tests."""
    lines = text.splitlines()
    if not lines[0].startswith("# vtk DataFile Version 3.0"):
        raise ValueError("missing VTK header")
    if lines[2] != "ASCII" or lines[3] != "DATASET UNSTRUCTURED_GRID":
        raise ValueError("not an ASCII unstructured grid")
    out: dict = {"title": lines[1]}
    i = 4
    while i < len(lines):
        tok = lines[i].split()
        if not tok:
            i += 1
            continue
        key = tok[0]
        if key == "POINTS":
            n = int(tok[1])
            out["points"] = np.array(
                [[float(v) for v in lines[i + 1 + k].split()] for k in range(n)]
            )
            i += 1 + n
        elif key == "CELLS":
            n = int(tok[1])
            cells = []
            for k in range(n):
                row = [int(v) for v in lines[i + 1 + k].split()]
                if row[0] != len(row) - 1:
                    raise ValueError("inconsistent cell connectivity count")
                cells.append(row[1:])
            out["cells"] = np.array(cells)
            i += 1 + n
        elif key == "CELL_TYPES":
            n = int(tok[1])
            out["cell_types"] = np.array([int(lines[i + 1 + k]) for k in range(n)])
            i += 1 + n
        elif key in ("POINT_DATA", "CELL_DATA"):
            out[f"{key.lower()}_count"] = int(tok[1])
            i += 1
        elif key == "VECTORS":
            n = out["point_data_count"]
            out[f"vectors_{tok[1]}"] = np.array(
                [[float(v) for v in lines[i + 1 + k].split()] for k in range(n)]
            )
            i += 1 + n
        elif key == "SCALARS":
            # SCALARS name type 1 / LOOKUP_TABLE default / values...
            count_key = "cell_data_count" if "cell_data_count" in out else "point_data_count"
            n = out[count_key]
            out[f"scalars_{tok[1]}"] = np.array(
                [float(lines[i + 2 + k]) for k in range(n)]
            )
            i += 2 + n
        else:
            raise ValueError(f"unexpected VTK section {key!r}")
    return out
