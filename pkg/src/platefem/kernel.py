"""Differential-geometry kernel for planar triangles embedded in 3-D.

Everything is formulated in full 3-D Cartesian coordinates.  A planar
element with unit normal ``n`` carries the tangent-plane projector
``P = I - n (x) n``; first and second derivatives of the quadratic
shape functions are mapped to physical space through a 3x3 Jacobian
whose third row is the element normal, so that gradients come out
tangential by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError

__all__ = [
    "ShapeEval",
    "ElementFrame",
    "tangential_projector",
    "p2_shape",
    "element_frame",
    "physical_gradients",
    "physical_hessians",
    "tri_quadrature",
    "seg_quadrature",
]


def tangential_projector(n: np.ndarray) -> np.ndarray:
    """Projector onto the plane with unit normal ``n``: ``I - n (x) n``.

    Symmetric, idempotent, rank 2; maps ``n`` to zero.
    """
    n = np.asarray(n, dtype=float)
    if abs(np.linalg.norm(n) - 1.0) > 1e-12:
        raise GeometryError(f"normal must be a unit vector, got |n| = {np.linalg.norm(n)!r}")
    return np.eye(3) - np.outer(n, n)


# ---------------------------------------------------------------------------
# Quadratic Lagrange basis on the reference triangle
#
# Node order: corners (0,0), (1,0), (0,1), then edge midpoints
# (1/2,0), (1/2,1/2), (0,1/2)  -- midpoint k sits on edge (k, (k+1)%3).
# This matches the VTK quadratic-triangle convention.
# ---------------------------------------------------------------------------

REF_NODES = np.array(
    [
        [0.0, 0.0],
        [1.0, 0.0],
        [0.0, 1.0],
        [0.5, 0.0],
        [0.5, 0.5],
        [0.0, 0.5],
    ]
)


@dataclass(frozen=True)
class ShapeEval:
    """Values and reference-space derivatives of the 6 basis functions."""

    values: np.ndarray  # (6,)
    ref_gradients: np.ndarray  # (6, 2)
    ref_hessians: np.ndarray  # (6, 2, 2), constant over the element


# Reference Hessians are constant for quadratic polynomials.
_REF_HESSIANS = np.array(
    [
        [[4.0, 4.0], [4.0, 4.0]],
        [[4.0, 0.0], [0.0, 0.0]],
        [[0.0, 0.0], [0.0, 4.0]],
        [[-8.0, -4.0], [-4.0, 0.0]],
        [[0.0, 4.0], [4.0, 0.0]],
        [[0.0, -4.0], [-4.0, -8.0]],
    ]
)


def p2_shape(xi) -> ShapeEval:
    """Evaluate the 6-node quadratic Lagrange basis at reference point ``xi``."""
    x, y = float(xi[0]), float(xi[1])
    lam = 1.0 - x - y
    values = np.array(
        [
            lam * (2.0 * lam - 1.0),
            x * (2.0 * x - 1.0),
            y * (2.0 * y - 1.0),
            4.0 * x * lam,
            4.0 * x * y,
            4.0 * y * lam,
        ]
    )
    grads = np.array(
        [
            [1.0 - 4.0 * lam, 1.0 - 4.0 * lam],
            [4.0 * x - 1.0, 0.0],
            [0.0, 4.0 * y - 1.0],
            [4.0 * (lam - x), -4.0 * x],
            [4.0 * y, 4.0 * x],
            [-4.0 * y, 4.0 * (lam - y)],
        ]
    )
    return ShapeEval(values=values, ref_gradients=grads, ref_hessians=_REF_HESSIANS.copy())


@dataclass(frozen=True)
class ElementFrame:
    """Geometric data of one planar triangle.

    ``jacobian`` has rows (x2-x1, x3-x1, n); its inverse maps reference
    derivatives to physical, tangential ones.  ``tangent_basis`` is the
    3x2 block of the inverse that multiplies in-plane reference
    derivatives (its columns span the element plane).
    """

    corners: np.ndarray  # (3, 3)
    normal: np.ndarray  # (3,)
    jacobian: np.ndarray  # (3, 3)
    jacobian_inv: np.ndarray  # (3, 3)
    tangent_basis: np.ndarray  # (3, 2) = jacobian_inv[:, :2]
    projector: np.ndarray  # (3, 3)
    area: float


def element_frame(corners, n) -> ElementFrame:
    """Build the parametrization frame of a planar triangle.

    ``corners`` are the 3 corner points; ``n`` the (constant) unit
    normal of the patch the element belongs to.
    """
    corners = np.asarray(corners, dtype=float)
    n = np.asarray(n, dtype=float)
    e1 = corners[1] - corners[0]
    e2 = corners[2] - corners[0]
    cross = np.cross(e1, e2)
    area = 0.5 * np.linalg.norm(cross)
    scale = max(np.linalg.norm(e1), np.linalg.norm(e2))
    if area <= 1e-14 * scale * scale:
        raise GeometryError("degenerate triangle: corners are (nearly) collinear")
    jac = np.vstack([e1, e2, n])
    det = np.linalg.det(jac)
    if abs(det) <= 1e-14 * scale * scale:
        raise GeometryError("singular element Jacobian: normal lies in the element plane?")
    inv = np.linalg.inv(jac)
    return ElementFrame(
        corners=corners,
        normal=n,
        jacobian=jac,
        jacobian_inv=inv,
        tangent_basis=inv[:, :2].copy(),
        projector=np.eye(3) - np.outer(n, n),
        area=float(area),
    )


def physical_gradients(frame: ElementFrame, shape: ShapeEval) -> np.ndarray:
    """Tangential gradients of the 6 shape functions, shape (6, 3).

    The constant extension along the normal makes the third reference
    derivative zero, so each gradient satisfies n . grad = 0.
    """
    return shape.ref_gradients @ frame.tangent_basis.T


def physical_hessians(frame: ElementFrame, shape: ShapeEval) -> np.ndarray:
    """Second tangential derivatives of the 6 shape functions, (6, 3, 3).

    Constant per element (affine geometry) and automatically in-plane:
    P H P = H.
    """
    b = frame.tangent_basis  # (3, 2)
    return np.einsum("ck,ikl,dl->icd", b, shape.ref_hessians, b)


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

# 3-point rule, exact through degree 2 (weights in reference-triangle measure).
_TRI_ORDER2_POINTS = np.array([[0.5, 0.0], [0.5, 0.5], [0.0, 0.5]])
_TRI_ORDER2_WEIGHTS = np.full(3, 1.0 / 6.0)

# 6-point rule, exact through degree 4.
_A1 = 0.445948490915965
_W1 = 0.223381589678011
_A2 = 0.091576213509771
_W2 = 0.109951743655322
_TRI_ORDER4_POINTS = np.array(
    [
        [_A1, _A1],
        [1.0 - 2.0 * _A1, _A1],
        [_A1, 1.0 - 2.0 * _A1],
        [_A2, _A2],
        [1.0 - 2.0 * _A2, _A2],
        [_A2, 1.0 - 2.0 * _A2],
    ]
)
_TRI_ORDER4_WEIGHTS = 0.5 * np.array([_W1, _W1, _W1, _W2, _W2, _W2])


def tri_quadrature(order: int):
    """Reference-triangle rule (points (nq,2), weights (nq,)); weights sum to 1/2."""
    if order == 2:
        return _TRI_ORDER2_POINTS.copy(), _TRI_ORDER2_WEIGHTS.copy()
    if order == 4:
        return _TRI_ORDER4_POINTS.copy(), _TRI_ORDER4_WEIGHTS.copy()
    raise ValueError(f"unsupported triangle quadrature order {order} (use 2 or 4)")


def seg_quadrature(order: int):
    """Gauss rule on the unit segment [0, 1]; weights sum to 1."""
    if order == 2:
        c = 0.5 / np.sqrt(3.0)
        return np.array([0.5 - c, 0.5 + c]), np.array([0.5, 0.5])
    if order == 4:
        c = 0.5 * np.sqrt(3.0 / 5.0)
        return (
            np.array([0.5 - c, 0.5, 0.5 + c]),
            np.array([5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0]),
        )
    raise ValueError(f"unsupported segment quadrature order {order} (use 2 or 4)")
