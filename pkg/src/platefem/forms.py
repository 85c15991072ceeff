"""Pointwise strain/stress/trace quantities and the jump/average algebra.

Edge traces of the plate problem are homogeneous multilinear functions
of the edge conormal: the bending moment is 2-linear, the rotation
trace and the force traces are 1-linear.  Across a junction the two
sides carry *different* conormals (they live in different planes), and
jump and average must account for the parity of that dependence:

    [w] = w+ - (-1)^d w-        <w> = (w+ + (-1)^d w-) / 2

For coplanar neighbours (nu- = -nu+) this reduces to the classical
jump and average.  The product rule [w1 w2] = [w1]<w2> + <w1>[w2]
survives verbatim, with degrees adding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .model import Material

Value = Union[float, np.ndarray]

__all__ = [
    "MultilinearTrace",
    "jump",
    "average",
    "minus_side_sign",
    "product_identity_residual",
    "in_plane_strain",
    "in_plane_stress",
    "normal_gradient",
    "bending_curvature",
    "edge_moment",
    "edge_force_traces",
    "corner_force",
    "InPlaneState",
]


@dataclass(frozen=True)
class MultilinearTrace:
    """An edge trace value together with its conormal degree.

    ``degree`` is the homogeneity degree in the edge conormal (moment: 2,
    rotation trace and force: 1); it determines the sign the minus side
    picks up in jumps and averages.
    """

    value: Value
    degree: int
    side: str = "plus"

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("conormal degree must be non-negative")
        if self.side not in ("plus", "minus"):
            raise ValueError(f"side must be 'plus' or 'minus', got {self.side!r}")


def minus_side_sign(degree: int) -> float:
    """Factor (-1)^d applied to the minus side inside jumps/averages."""
    return -1.0 if degree % 2 else 1.0


def _check_pair(w_plus: MultilinearTrace, w_minus: MultilinearTrace):
    if w_plus.degree != w_minus.degree:
        raise ValueError(
            f"degree mismatch: {w_plus.degree} vs {w_minus.degree}"
        )
    scalar_p = np.isscalar(w_plus.value) or np.ndim(w_plus.value) == 0
    scalar_m = np.isscalar(w_minus.value) or np.ndim(w_minus.value) == 0
    if scalar_p != scalar_m:
        raise ValueError("cannot combine a scalar trace with a vector trace")


def jump(w_plus: MultilinearTrace, w_minus: Optional[MultilinearTrace] = None) -> Value:
    """[w] = w+ - (-1)^d w-; on a one-sided (Dirichlet) edge, [w] = w."""
    if w_minus is None:
        return w_plus.value
    _check_pair(w_plus, w_minus)
    return w_plus.value - minus_side_sign(w_plus.degree) * w_minus.value


def average(w_plus: MultilinearTrace, w_minus: Optional[MultilinearTrace] = None) -> Value:
    """<w> = (w+ + (-1)^d w-) / 2; on a one-sided (Dirichlet) edge, <w> = w."""
    if w_minus is None:
        return w_plus.value
    _check_pair(w_plus, w_minus)
    return 0.5 * (w_plus.value + minus_side_sign(w_plus.degree) * w_minus.value)


def _dot(a: Value, b: Value) -> float:
    return float(np.dot(np.ravel(a), np.ravel(b)))


def product_identity_residual(
    w1_plus: MultilinearTrace,
    w1_minus: MultilinearTrace,
    w2_plus: MultilinearTrace,
    w2_minus: MultilinearTrace,
) -> float:
    """Residual of [w1 . w2] = [w1] . <w2> + <w1> . [w2].

    The product trace has degree d1 + d2.  Returns the absolute
    difference of the two sides (zero in exact arithmetic).
    """
    d12 = w1_plus.degree + w2_plus.degree
    prod_plus = MultilinearTrace(_dot(w1_plus.value, w2_plus.value), d12)
    prod_minus = MultilinearTrace(_dot(w1_minus.value, w2_minus.value), d12, side="minus")
    lhs = jump(prod_plus, prod_minus)
    rhs = _dot(jump(w1_plus, w1_minus), average(w2_plus, w2_minus)) + _dot(
        average(w1_plus, w1_minus), jump(w2_plus, w2_minus)
    )
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# In-plane strain and stress
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InPlaneState:
    """In-plane strain/stress pair at a point of a planar element."""

    eps: np.ndarray  # (3, 3), symmetric, in-plane
    sigma: np.ndarray  # (3, 3), symmetric, in-plane
    trace_eps: float


def in_plane_strain(tangential_jacobian: np.ndarray, projector: np.ndarray) -> np.ndarray:
    """In-plane strain from a tangential Jacobian ``v (x) grad_T``.

    Uses the sandwich-free identity
    ``eps = e - (e n) (x) n - n (x) (e n)`` with ``e`` the symmetrized
    input, which equals ``P e P`` whenever the input has tangential
    columns (its contraction with the normal from both sides vanishes).
    """
    tj = np.asarray(tangential_jacobian, dtype=float)
    e = 0.5 * (tj + tj.T)
    # recover n from the projector: any unit kernel vector
    n = _projector_normal(projector)
    en = e @ n
    return e - np.outer(en, n) - np.outer(n, en)


def _projector_normal(projector: np.ndarray) -> np.ndarray:
    # kernel of a rank-2 projector I - n n^T; eigenvector of I - P
    m = np.eye(3) - projector
    # column of largest norm is proportional to n
    j = int(np.argmax(np.sum(m * m, axis=0)))
    n = m[:, j]
    return n / np.linalg.norm(n)


def in_plane_stress(
    eps: np.ndarray, material: Material, projector: np.ndarray
) -> np.ndarray:
    """Plane-stress law sigma = 2 mu eps + lambda tr(eps) P."""
    eps = np.asarray(eps, dtype=float)
    return 2.0 * material.mu * eps + material.lam * np.trace(eps) * projector


# ---------------------------------------------------------------------------
# Bending quantities
# ---------------------------------------------------------------------------


def normal_gradient(u_jacobian: np.ndarray, normal: np.ndarray) -> np.ndarray:
    """Tangential gradient of the normal displacement component.

    For a constant normal, grad_T (u . n) contracts the tangential
    Jacobian with the normal over the *component* index, i.e. J^T n.
    """
    return np.asarray(u_jacobian, dtype=float).T @ np.asarray(normal, dtype=float)


def bending_curvature(
    hessians: np.ndarray, nodal_u: np.ndarray, normal: np.ndarray
) -> np.ndarray:
    """Second-derivative matrix of the normal displacement component.

    ``hessians``: (6, 3, 3) per-basis second tangential derivatives,
    ``nodal_u``: (6, 3) nodal displacement vectors.  The result is the
    symmetrized tangential Jacobian of grad_T(u . n); for the planar,
    constant-Hessian case it is simply sum_i (u_i . n) H_i, already
    in-plane.
    """
    un = np.asarray(nodal_u, dtype=float) @ np.asarray(normal, dtype=float)  # (6,)
    return np.einsum("i,icd->cd", un, np.asarray(hessians, dtype=float))


def edge_moment(
    curvature: np.ndarray,
    material: Material,
    conormal: np.ndarray,
    projector: np.ndarray,
    side: str = "plus",
) -> MultilinearTrace:
    """Bending moment trace: t~^2 nu . sigma(curvature) . nu  (degree 2)."""
    sigma = in_plane_stress(curvature, material, projector)
    nu = np.asarray(conormal, dtype=float)
    value = material.t_tilde_sq * float(nu @ sigma @ nu)
    return MultilinearTrace(value=value, degree=2, side=side)


def edge_force_traces(
    membrane_stress: np.ndarray,
    conormal: np.ndarray,
    side: str = "plus",
) -> tuple[MultilinearTrace, MultilinearTrace]:
    """Normal-part and tangential-part force traces on an edge (degree 1 each).

    The normal part contains the divergence of the bending stress and
    the edge-tangential derivative of the twisting moment.  Both vanish
    identically for quadratic displacements on planar elements (the
    bending stress is constant per element and the twist is constant
    along a straight edge), so the normal part is returned as zero;
    the tangential part is the membrane traction -sigma(u_t) . nu.
    """
    nu = np.asarray(conormal, dtype=float)
    f_n = MultilinearTrace(value=np.zeros(3), degree=1, side=side)
    f_t = MultilinearTrace(value=-(np.asarray(membrane_stress, float) @ nu), degree=1, side=side)
    return f_n, f_t


def corner_force(
    bending_curvature_stress: np.ndarray,
    tau: np.ndarray,
    conormal: np.ndarray,
    normal: np.ndarray,
    material: Material,
) -> np.ndarray:
    """Concentrated corner force t~^2 (tau . sigma_b . nu) n.

    ``tau`` is the unit edge tangent directed into the corner,
    ``bending_curvature_stress`` the (element-constant) in-plane stress
    of the bending curvature.  The t~^2 scale matches the moment trace
    so corner forces of adjoining edges equilibrate in the same units.
    """
    twist = float(np.asarray(tau, float) @ bending_curvature_stress @ np.asarray(conormal, float))
    return material.t_tilde_sq * twist * np.asarray(normal, dtype=float)
