"""Input model: material, plate patches, and the assembled structure.

A structure is a collection of planar polygonal patches, each with a
unit normal and per-side boundary tags.  Sides tagged ``junction`` must
geometrically coincide with exactly one junction side of another patch;
at most two patches may share a line segment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import GeometryError

BOUNDARY_TAGS = ("clamped", "simply_supported", "free", "junction")


@dataclass(frozen=True)
class Material:
    """Isotropic plane-stress material of a plate with uniform thickness."""

    youngs_modulus: float
    poisson_ratio: float
    thickness: float

    def __post_init__(self):
        if self.youngs_modulus <= 0.0:
            raise ValueError(f"Young's modulus must be positive, got {self.youngs_modulus}")
        if not -1.0 < self.poisson_ratio < 1.0:
            raise ValueError(f"Poisson ratio must lie in (-1, 1), got {self.poisson_ratio}")
        if self.thickness <= 0.0:
            raise ValueError(f"thickness must be positive, got {self.thickness}")

    @property
    def mu(self) -> float:
        """Plane-stress shear modulus E / (2 (1 + nu))."""
        return self.youngs_modulus / (2.0 * (1.0 + self.poisson_ratio))

    @property
    def lam(self) -> float:
        """Plane-stress Lame parameter E nu / (1 - nu^2)."""
        nu = self.poisson_ratio
        return self.youngs_modulus * nu / (1.0 - nu * nu)

    @property
    def t_tilde_sq(self) -> float:
        """Squared effective bending thickness, t^2 / 12."""
        return self.thickness * self.thickness / 12.0

    @property
    def bending_stiffness(self) -> float:
        """Classical plate stiffness E t^3 / (12 (1 - nu^2))."""
        nu = self.poisson_ratio
        return self.youngs_modulus * self.thickness**3 / (12.0 * (1.0 - nu * nu))


def _polygon_is_simple(points2d: np.ndarray) -> bool:
    """Check a closed polygon (in-plane 2-D coordinates) for self-intersection."""

    def cross2(u, v):
        return u[0] * v[1] - u[1] * v[0]

    def segments_cross(p, q, r, s):
        d1 = cross2(q - p, r - p)
        d2 = cross2(q - p, s - p)
        d3 = cross2(s - r, p - r)
        d4 = cross2(s - r, q - r)
        return (d1 * d2 < 0.0) and (d3 * d4 < 0.0)

    n = len(points2d)
    for i in range(n):
        p, q = points2d[i], points2d[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue  # shared endpoint
            r, s = points2d[j], points2d[(j + 1) % n]
            if segments_cross(p, q, r, s):
                return False
    return True


@dataclass(frozen=True)
class PlatePatch:
    """One planar polygonal plate with a unit normal and per-side tags.

    Side ``i`` is the segment from ``vertices[i]`` to
    ``vertices[(i+1) % len(vertices)]``.  Normals of patches meeting in
    a junction must be oriented consistently: unfolding one plate onto
    the plane of the other about their common line has to bring the two
    normals into agreement.  (Outward normals of a closed surface have
    this property.)
    """

    id: int
    vertices: np.ndarray  # (nv, 3)
    normal: np.ndarray  # (3,)
    boundary_tags: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", np.asarray(self.vertices, dtype=float))
        object.__setattr__(self, "normal", np.asarray(self.normal, dtype=float))
        object.__setattr__(self, "boundary_tags", tuple(self.boundary_tags))
        v = self.vertices
        if v.ndim != 2 or v.shape[1] != 3 or len(v) < 3:
            raise GeometryError(f"patch {self.id}: need >= 3 vertices in R^3")
        if len(self.boundary_tags) != len(v):
            raise GeometryError(
                f"patch {self.id}: {len(self.boundary_tags)} tags for {len(v)} sides"
            )
        for tag in self.boundary_tags:
            if tag not in BOUNDARY_TAGS:
                raise GeometryError(f"patch {self.id}: unknown boundary tag {tag!r}")
        if abs(np.linalg.norm(self.normal) - 1.0) > 1e-14:
            raise GeometryError(f"patch {self.id}: normal is not a unit vector")
        diam = self.diameter()
        offsets = (v - v[0]) @ self.normal
        if np.max(np.abs(offsets)) > 1e-12 * max(diam, 1e-300):
            raise GeometryError(f"patch {self.id}: vertices are not coplanar with the normal")
        if not _polygon_is_simple(self._plane_coords()):
            raise GeometryError(f"patch {self.id}: polygon is self-intersecting")

    def diameter(self) -> float:
        v = self.vertices
        return float(
            max(np.linalg.norm(a - b) for i, a in enumerate(v) for b in v[i + 1 :])
        )

    def _plane_coords(self) -> np.ndarray:
        """Vertices in an orthonormal 2-D coordinate system of the patch plane."""
        v = self.vertices
        t1 = v[1] - v[0]
        t1 = t1 / np.linalg.norm(t1)
        t2 = np.cross(self.normal, t1)
        rel = v - v[0]
        return np.column_stack([rel @ t1, rel @ t2])

    def area(self) -> float:
        xy = self._plane_coords()
        x, y = xy[:, 0], xy[:, 1]
        return 0.5 * abs(float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)))

    def side(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        v = self.vertices
        return v[i], v[(i + 1) % len(v)]


@dataclass(frozen=True)
class Load:
    """Constant body force per unit area, restricted to one patch or a region.

    ``predicate``, if given, is evaluated at element centroids and
    further restricts where the force acts.  Either ``patch_id`` or
    ``predicate`` (or both) must be set.
    """

    force: np.ndarray  # (3,)
    patch_id: Optional[int] = None
    predicate: Optional[Callable[[np.ndarray], bool]] = None

    def __post_init__(self):
        object.__setattr__(self, "force", np.asarray(self.force, dtype=float))
        if self.force.shape != (3,):
            raise ValueError("load force must be a 3-vector")
        if self.patch_id is None and self.predicate is None:
            raise ValueError("load needs a patch id or a spatial predicate")

    def applies_to(self, patch_id: int, centroid: np.ndarray) -> bool:
        if self.patch_id is not None and patch_id != self.patch_id:
            return False
        if self.predicate is not None and not self.predicate(centroid):
            return False
        return True


def _sides_coincide(a0, a1, b0, b1, tol) -> bool:
    direct = np.linalg.norm(a0 - b0) <= tol and np.linalg.norm(a1 - b1) <= tol
    flipped = np.linalg.norm(a0 - b1) <= tol and np.linalg.norm(a1 - b0) <= tol
    return direct or flipped


@dataclass(frozen=True)
class StructureModel:
    """A plate structure: patches, loads, and the penalty constant."""

    patches: tuple[PlatePatch, ...]
    material: Material
    loads: tuple[Load, ...] = field(default_factory=tuple)
    penalty_beta0: float = 10.0

    def __post_init__(self):
        object.__setattr__(self, "patches", tuple(self.patches))
        object.__setattr__(self, "loads", tuple(self.loads))
        if self.penalty_beta0 <= 0.0:
            raise ValueError(f"penalty constant must be positive, got {self.penalty_beta0}")
        ids = [p.id for p in self.patches]
        if len(set(ids)) != len(ids):
            raise GeometryError("duplicate patch ids")
        for load in self.loads:
            if load.patch_id is not None and load.patch_id not in ids:
                raise GeometryError(f"load references unknown patch {load.patch_id}")
        self._check_junction_pairing()

    def diameter(self) -> float:
        pts = np.vstack([p.vertices for p in self.patches])
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        return float(np.linalg.norm(hi - lo))

    def patch(self, patch_id: int) -> PlatePatch:
        for p in self.patches:
            if p.id == patch_id:
                return p
        raise KeyError(f"no patch with id {patch_id}")

    def _check_junction_pairing(self):
        tol = 1e-9 * max(self.diameter(), 1e-300)
        junction_sides = []
        for p in self.patches:
            for i, tag in enumerate(p.boundary_tags):
                if tag == "junction":
                    a0, a1 = p.side(i)
                    junction_sides.append((p.id, i, a0, a1))
        for pid, i, a0, a1 in junction_sides:
            partners = [
                (qid, j)
                for qid, j, b0, b1 in junction_sides
                if (qid, j) != (pid, i) and _sides_coincide(a0, a1, b0, b1, tol)
            ]
            if len(partners) != 1:
                raise GeometryError(
                    f"junction side {i} of patch {pid} has {len(partners)} partners "
                    "(each junction segment must be shared by exactly two patches)"
                )
            qid, _ = partners[0]
            if qid == pid:
                raise GeometryError(f"patch {pid} pairs a junction side with itself")


def plate_diameter(points: np.ndarray) -> float:
    lo, hi = points.min(axis=0), points.max(axis=0)
    return float(np.linalg.norm(hi - lo))


def make_patch(
    patch_id: int,
    vertices: Sequence[Sequence[float]],
    normal: Optional[Sequence[float]] = None,
    tags: Optional[Sequence[str]] = None,
) -> PlatePatch:
    """Convenience constructor; derives the normal from the polygon if omitted."""
    verts = np.asarray(vertices, dtype=float)
    if normal is None:
        n = np.cross(verts[1] - verts[0], verts[2] - verts[0])
        norm = np.linalg.norm(n)
        if norm == 0.0:
            raise GeometryError("cannot derive a normal from collinear vertices")
        normal = n / norm
    if tags is None:
        tags = ["free"] * len(verts)
    return PlatePatch(id=patch_id, vertices=verts, normal=np.asarray(normal, float), boundary_tags=tuple(tags))
