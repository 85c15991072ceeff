"""Global assembly of the symmetric plate-structure system.

Unknowns are the three Cartesian displacement components per node.
The bilinear form is the sum of a membrane part, a bending volume
part scaled by the squared effective thickness, and symmetric
interior-penalty edge terms that enforce rotation continuity weakly
across element edges, plate junctions, and clamped boundary edges.

The minus side of every edge trace enters jumps and averages with the
parity sign of its conormal degree (rotation trace: degree 1, moment:
degree 2), so junction edges are assembled by exactly the same code
path as coplanar interior edges.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np
import scipy.sparse as sp

from .errors import AssemblyError
from .forms import minus_side_sign
from .kernel import p2_shape, tri_quadrature, seg_quadrature
from .mesh import (
    DIRICHLET_CLAMPED,
    DIRICHLET_SS,
    FREE,
    INTERIOR_JUNCTION,
    INTERIOR_SAME_PLANE,
    TriMesh6,
)
from .model import Load, Material

__all__ = [
    "DofMap",
    "SparseSystem",
    "ReducedSystem",
    "ElementTables",
    "element_tables",
    "assemble_membrane",
    "assemble_bending_volume",
    "assemble_edge_terms",
    "assemble_load",
    "assemble_line_load",
    "build_system",
    "apply_constraints",
    "coo_text",
]


# ---------------------------------------------------------------------------
# Degrees of freedom
# ---------------------------------------------------------------------------


@dataclass
class DofMap:
    """Node -> 3 global indices plus the set of constrained values."""

    n_nodes: int
    constrained: dict = field(default_factory=dict)  # dof index -> prescribed value

    @property
    def dim(self) -> int:
        return 3 * self.n_nodes

    @staticmethod
    def dof(node: int, comp: int) -> int:
        return 3 * node + comp

    def constrain_node(self, node: int, value=(0.0, 0.0, 0.0)):
        for c in range(3):
            self.constrained[3 * node + c] = float(value[c])

    @classmethod
    def from_mesh(
        cls,
        mesh: TriMesh6,
        prescribe: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        fixed_nodes: Iterable[int] = (),
    ) -> "DofMap":
        """Constrain all three components on Dirichlet edges.

        Clamped and simply supported edges both pin the displacement;
        they differ only in the weak rotation terms added during edge
        assembly.  ``prescribe`` maps a point to a displacement vector
        for inhomogeneous data (defaults to zero); ``fixed_nodes`` adds
        explicit point constraints (e.g. a structure glued to ground).
        """
        dm = cls(n_nodes=mesh.n_nodes)
        nodes = set()
        for rec in mesh.edges:
            if rec.kind in (DIRICHLET_CLAMPED, DIRICHLET_SS):
                nodes.update((rec.nodes[0], rec.nodes[1], rec.midnode))
        nodes.update(int(n) for n in fixed_nodes)
        for n in sorted(nodes):
            value = prescribe(mesh.nodes[n]) if prescribe is not None else (0.0, 0.0, 0.0)
            dm.constrain_node(n, value)
        return dm


@dataclass
class SparseSystem:
    """Assembled symmetric system: matrix, load vector, dimension."""

    matrix: sp.csr_matrix
    rhs: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def symmetry_error(self) -> float:
        d = self.matrix - self.matrix.T
        denom = max(np.abs(self.matrix.data).max(initial=0.0), 1e-300)
        return float(np.abs(d.data).max(initial=0.0) / denom)


@dataclass
class ReducedSystem:
    """System after symmetric elimination of constrained DOFs."""

    matrix: sp.csr_matrix  # free x free block
    rhs: np.ndarray
    free: np.ndarray  # free dof indices
    full_values: np.ndarray  # prescribed values at constrained dofs, 0 elsewhere
    dim_full: int

    @property
    def dim(self) -> int:
        return len(self.free)

    def expand(self, x_free: np.ndarray) -> np.ndarray:
        u = self.full_values.copy()
        if len(self.free):
            u[self.free] = x_free
        return u


# ---------------------------------------------------------------------------
# Per-mesh element tables (vectorized kernel evaluation)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ElementTables:
    """Precomputed geometry and basis derivatives for every element."""

    quad_points: np.ndarray  # (nq, 2)
    phi: np.ndarray  # (nq, 6)
    weights: np.ndarray  # (ne, nq) physical quadrature weights
    areas: np.ndarray  # (ne,)
    normals: np.ndarray  # (ne, 3)
    projectors: np.ndarray  # (ne, 3, 3)
    tangent_basis: np.ndarray  # (ne, 3, 2)
    jac_inv: np.ndarray  # (ne, 3, 3)
    corner0: np.ndarray  # (ne, 3)
    grads: np.ndarray  # (ne, nq, 6, 3) tangential shape gradients
    hessians: np.ndarray  # (ne, 6, 3, 3) constant second tangential derivatives
    dofs: np.ndarray  # (ne, 18) global dof indices, node-major


def element_tables(mesh: TriMesh6, order: int = 4) -> ElementTables:
    qp, qw = tri_quadrature(order)
    shapes = [p2_shape(x) for x in qp]
    phi = np.array([s.values for s in shapes])  # (nq, 6)
    ref_grads = np.array([s.ref_gradients for s in shapes])  # (nq, 6, 2)
    ref_hess = shapes[0].ref_hessians  # (6, 2, 2)

    corners = mesh.nodes[mesh.elements[:, :3]]  # (ne, 3, 3)
    e1 = corners[:, 1] - corners[:, 0]
    e2 = corners[:, 2] - corners[:, 0]
    n = mesh.element_normal
    jac = np.stack([e1, e2, n], axis=1)  # rows
    jac_inv = np.linalg.inv(jac)
    b = jac_inv[:, :, :2]  # (ne, 3, 2)
    areas = 0.5 * np.linalg.norm(np.cross(e1, e2), axis=1)

    grads = np.einsum("qik,eck->eqic", ref_grads, b)
    hess = np.einsum("eck,ikl,edl->eicd", b, ref_hess, b)
    weights = 2.0 * areas[:, None] * qw[None, :]
    projectors = np.eye(3)[None, :, :] - np.einsum("ea,eb->eab", n, n)

    nodes6 = mesh.elements  # (ne, 6)
    dofs = (3 * nodes6[:, :, None] + np.arange(3)[None, None, :]).reshape(-1, 18)

    return ElementTables(
        quad_points=qp,
        phi=phi,
        weights=weights,
        areas=areas,
        normals=n,
        projectors=projectors,
        tangent_basis=b,
        jac_inv=jac_inv,
        corner0=corners[:, 0],
        grads=grads,
        hessians=hess,
        dofs=dofs,
    )


def _coalesce(rows, cols, vals, dim) -> sp.csr_matrix:
    # deterministic sort-and-reduce irrespective of insertion scheduling
    rows = np.concatenate(rows) if rows else np.empty(0, dtype=int)
    cols = np.concatenate(cols) if cols else np.empty(0, dtype=int)
    vals = np.concatenate(vals) if vals else np.empty(0, dtype=float)
    if len(rows) == 0:
        return sp.csr_matrix((dim, dim))
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    boundary = np.empty(len(rows), dtype=bool)
    boundary[0] = True
    boundary[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
    idx = np.flatnonzero(boundary)
    summed = np.add.reduceat(vals, idx)
    return sp.csr_matrix((summed, (rows[idx], cols[idx])), shape=(dim, dim))


def _scatter(blocks: np.ndarray, dofs: np.ndarray, dim: int) -> sp.csr_matrix:
    ne, nd, _ = blocks.shape
    rows = np.repeat(dofs, nd, axis=1).ravel()
    cols = np.tile(dofs, (1, nd)).ravel()
    return _coalesce([rows], [cols], [blocks.ravel()], dim)


# ---------------------------------------------------------------------------
# Volume terms
# ---------------------------------------------------------------------------


def assemble_membrane(
    mesh: TriMesh6, material: Material, dofmap: DofMap, tables: Optional[ElementTables] = None
) -> sp.csr_matrix:
    """Membrane stiffness: in-plane stress against in-plane strain.

    Per basis pair the integrand reduces to
    mu (P_ab g_i.g_j + g_j[a] g_i[b]) + lambda g_i[a] g_j[b],
    with g the tangential shape gradients and P the plane projector.
    """
    t = tables or element_tables(mesh)
    mu, lam = material.mu, material.lam
    gram = np.einsum("eqic,eqjc->eqij", t.grads, t.grads)
    k1 = np.einsum("eq,eab,eqij->eiajb", t.weights, t.projectors, gram)
    k2 = np.einsum("eq,eqja,eqib->eiajb", t.weights, t.grads, t.grads)
    k3 = np.einsum("eq,eqia,eqjb->eiajb", t.weights, t.grads, t.grads)
    blocks = (mu * (k1 + k2) + lam * k3).reshape(-1, 18, 18)
    return _scatter(blocks, t.dofs, dofmap.dim)


def assemble_bending_volume(
    mesh: TriMesh6, material: Material, dofmap: DofMap, tables: Optional[ElementTables] = None
) -> sp.csr_matrix:
    """Bending stiffness volume term, integrand constant per element.

    Couples all three displacement components through the element
    normal: basis (i, a) bends with curvature n_a H_i.
    """
    t = tables or element_tables(mesh)
    mu, lam = material.mu, material.lam
    hh = np.einsum("eicd,ejcd->eij", t.hessians, t.hessians)
    tr = np.einsum("eicc->ei", t.hessians)
    core = 2.0 * mu * hh + lam * np.einsum("ei,ej->eij", tr, tr)
    blocks = material.t_tilde_sq * np.einsum(
        "e,ea,eb,eij->eiajb", t.areas, t.normals, t.normals, core
    ).reshape(-1, 18, 18)
    return _scatter(blocks, t.dofs, dofmap.dim)


def assemble_load(
    mesh: TriMesh6,
    loads: Iterable[Load],
    dofmap: DofMap,
    tables: Optional[ElementTables] = None,
) -> np.ndarray:
    """Consistent load vector for constant per-patch/region body forces."""
    t = tables or element_tables(mesh)
    rhs = np.zeros(dofmap.dim)
    loads = list(loads)
    if not loads:
        return rhs
    centroids = mesh.nodes[mesh.elements[:, :3]].mean(axis=1)
    phi_int = np.einsum("eq,qi->ei", t.weights, t.phi)  # integral of each phi
    for e in range(mesh.n_elements):
        f = np.zeros(3)
        for load in loads:
            if load.applies_to(int(mesh.element_patch[e]), centroids[e]):
                f = f + load.force
        if not np.any(f):
            continue
        rhs[t.dofs[e]] += np.outer(phi_int[e], f).ravel()
    return rhs


def assemble_line_load(
    mesh: TriMesh6,
    predicate: Callable[[np.ndarray], bool],
    density: np.ndarray,
    dofmap: DofMap,
) -> np.ndarray:
    """Consistent load for a constant force per unit length on boundary
    edges whose midpoints satisfy ``predicate`` (benchmark plumbing)."""
    density = np.asarray(density, dtype=float)
    rhs = np.zeros(dofmap.dim)
    sq, sw = seg_quadrature(4)
    for rec in mesh.edges:
        if len(rec.sides) != 1:
            continue
        x0, x1 = mesh.nodes[rec.nodes[0]], mesh.nodes[rec.nodes[1]]
        if not predicate(0.5 * (x0 + x1)):
            continue
        e = rec.sides[0].element
        pts = x0[None, :] + sq[:, None] * (x1 - x0)[None, :]
        phi = _phi_at(mesh, e, pts)  # (nq, 6)
        nodes = mesh.elements[e]
        for i in range(6):
            coeff = rec.length * np.sum(sw * phi[:, i])
            rhs[3 * nodes[i] : 3 * nodes[i] + 3] += coeff * density
    return rhs


# ---------------------------------------------------------------------------
# Edge terms
# ---------------------------------------------------------------------------


def _reference_coords(mesh: TriMesh6, tables: ElementTables, e: int, pts: np.ndarray):
    rel = pts - tables.corner0[e][None, :]
    ref = rel @ tables.jac_inv[e]  # (nq, 3); third component ~ 0 in-plane
    return ref[:, :2]


def _phi_at(mesh: TriMesh6, e: int, pts: np.ndarray) -> np.ndarray:
    t = element_tables_cache(mesh)
    ref = _reference_coords(mesh, t, e, pts)
    return np.array([p2_shape(x).values for x in ref])


def _grads_at(mesh: TriMesh6, tables: ElementTables, e: int, pts: np.ndarray) -> np.ndarray:
    ref = _reference_coords(mesh, tables, e, pts)
    ref_grads = np.array([p2_shape(x).ref_gradients for x in ref])  # (nq, 6, 2)
    return np.einsum("qik,ck->qic", ref_grads, tables.tangent_basis[e])


_tables_cache: dict = {}


def element_tables_cache(mesh: TriMesh6) -> ElementTables:
    key = id(mesh)
    hit = _tables_cache.get(key)
    if hit is None or hit[0] is not mesh:
        hit = (mesh, element_tables(mesh))
        _tables_cache.clear()
        _tables_cache[key] = hit
    return hit[1]


@dataclass(frozen=True)
class EdgeSideData:
    """Everything one side contributes to the edge bilinear form."""

    dofs: np.ndarray  # (18,)
    moment_row: np.ndarray  # (18,) constant along the edge, degree 2
    rotation_rows: np.ndarray  # (nq, 18), degree 1


def _edge_side_data(
    mesh: TriMesh6, tables: ElementTables, material: Material, rec, side, pts
) -> EdgeSideData:
    e = side.element
    nu = side.conormal
    n = tables.normals[e]
    mu, lam = material.mu, material.lam
    hess = tables.hessians[e]  # (6, 3, 3)
    m_core = 2.0 * mu * np.einsum("c,icd,d->i", nu, hess, nu) + lam * np.einsum(
        "icc->i", hess
    )
    moment = material.t_tilde_sq * np.einsum("i,a->ia", m_core, n).ravel()
    grads = _grads_at(mesh, tables, e, pts)  # (nq, 6, 3)
    rot = np.einsum("qic,c,a->qia", grads, nu, n).reshape(len(pts), 18)
    return EdgeSideData(dofs=tables.dofs[e], moment_row=moment, rotation_rows=rot)


def _edge_matrices(
    mesh: TriMesh6,
    material: Material,
    beta0: float,
    dofmap: DofMap,
    tables: Optional[ElementTables] = None,
):
    """Consistency and penalty edge matrices, returned separately.

    Interior (same-plane and junction) edges combine the two sides with
    the parity signs of their conormal degrees; clamped boundary edges
    use the one-sided convention jump = average = trace.  Simply
    supported and free edges contribute nothing.
    """
    t = tables or element_tables(mesh)
    beta = beta0 * (2.0 * material.mu + 2.0 * material.lam)
    sq, sw = seg_quadrature(4)
    rows_c, cols_c, vals_c = [], [], []
    rows_p, cols_p, vals_p = [], [], []

    for rec in mesh.edges:
        if rec.kind in (FREE, DIRICHLET_SS):
            continue
        if rec.kind in (INTERIOR_SAME_PLANE, INTERIOR_JUNCTION) and len(rec.sides) != 2:
            raise AssemblyError(f"interior edge {rec.nodes} is missing a side")
        x0, x1 = mesh.nodes[rec.nodes[0]], mesh.nodes[rec.nodes[1]]
        pts = x0[None, :] + sq[:, None] * (x1 - x0)[None, :]
        data = [
            _edge_side_data(mesh, t, material, rec, side, pts) for side in rec.sides
        ]
        if len(data) == 2:
            s_jump = -minus_side_sign(1)  # minus-side factor in [nu . grad v_n]
            s_avg = 0.5 * minus_side_sign(2)  # minus-side factor in <M>
            dofs = np.concatenate([data[0].dofs, data[1].dofs])
            m_avg = np.concatenate([0.5 * data[0].moment_row, s_avg * data[1].moment_row])
            jumps = np.concatenate(
                [data[0].rotation_rows, s_jump * data[1].rotation_rows], axis=1
            )
        else:
            dofs = data[0].dofs
            m_avg = data[0].moment_row
            jumps = data[0].rotation_rows

        w = sw * rec.length
        jump_int = np.einsum("q,qk->k", w, jumps)
        consistency = -(np.outer(m_avg, jump_int) + np.outer(jump_int, m_avg))
        penalty = (beta * material.t_tilde_sq / rec.length) * np.einsum(
            "q,qk,ql->kl", w, jumps, jumps
        )

        nd = len(dofs)
        rr = np.repeat(dofs, nd)
        cc = np.tile(dofs, nd)
        rows_c.append(rr)
        cols_c.append(cc)
        vals_c.append(consistency.ravel())
        rows_p.append(rr)
        cols_p.append(cc)
        vals_p.append(penalty.ravel())

    dim = dofmap.dim
    return (
        _coalesce(rows_c, cols_c, vals_c, dim),
        _coalesce(rows_p, cols_p, vals_p, dim),
    )


def assemble_edge_terms(
    mesh: TriMesh6,
    material: Material,
    beta0: float,
    dofmap: DofMap,
    tables: Optional[ElementTables] = None,
) -> sp.csr_matrix:
    """Sum of the symmetrized consistency terms and the rotation penalty."""
    consistency, penalty = _edge_matrices(mesh, material, beta0, dofmap, tables)
    return (consistency + penalty).tocsr()


# ---------------------------------------------------------------------------
# Driver and constraints
# ---------------------------------------------------------------------------


def build_system(
    mesh: TriMesh6,
    material: Material,
    loads: Iterable[Load],
    beta0: float,
    dofmap: DofMap,
    extra_rhs: Optional[np.ndarray] = None,
) -> SparseSystem:
    tables = element_tables(mesh)
    a = assemble_membrane(mesh, material, dofmap, tables)
    a = a + assemble_bending_volume(mesh, material, dofmap, tables)
    a = a + assemble_edge_terms(mesh, material, beta0, dofmap, tables)
    rhs = assemble_load(mesh, loads, dofmap, tables)
    if extra_rhs is not None:
        rhs = rhs + extra_rhs
    return SparseSystem(matrix=a.tocsr(), rhs=rhs)


def apply_constraints(system: SparseSystem, dofmap: DofMap) -> ReducedSystem:
    """Symmetric elimination: condense constrained DOFs into the rhs."""
    dim = system.dim
    for dof in dofmap.constrained:
        if not 0 <= dof < dim:
            raise AssemblyError(f"constraint on nonexistent dof {dof}")
    cons = np.array(sorted(dofmap.constrained), dtype=int)
    values = np.array([dofmap.constrained[d] for d in cons])
    mask = np.ones(dim, dtype=bool)
    mask[cons] = False
    free = np.flatnonzero(mask)
    full_values = np.zeros(dim)
    full_values[cons] = values

    a = system.matrix.tocsc()
    a_ff = a[free][:, free].tocsr()
    rhs = system.rhs[free].copy()
    if len(cons):
        rhs -= a[free][:, cons] @ values
    return ReducedSystem(
        matrix=a_ff, rhs=rhs, free=free, full_values=full_values, dim_full=dim
    )


def coo_text(system: SparseSystem) -> str:
    """Matrix in coordinate text format for external cross-checks."""
    coo = system.matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    lines = [f"% symmetric sparse matrix, dim {system.dim}, nnz {coo.nnz}"]
    for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
        lines.append(f"{int(r)} {int(c)} {v:.17g}")
    return "\n".join(lines) + "\n"
