import numpy as np
import pytest

from platefem.errors import GeometryError
from platefem.kernel import (
    ElementFrame,
    element_frame,
    p2_shape,
    physical_gradients,
    physical_hessians,
    seg_quadrature,
    tangential_projector,
    tri_quadrature,
)


def random_rotation(seed):
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


class TestProjector:
    def test_z_normal(self):
        assert np.allclose(tangential_projector([0, 0, 1]), np.diag([1.0, 1.0, 0.0]))

    def test_x_normal(self):
        assert np.allclose(tangential_projector([1, 0, 0]), np.diag([0.0, 1.0, 1.0]))

    def test_annihilates_normal(self):
        n = np.array([1.0, 2.0, -0.5])
        n /= np.linalg.norm(n)
        p = tangential_projector(n)
        assert np.allclose(p @ n, 0.0, atol=1e-14)
        assert np.allclose(p @ p, p, atol=1e-14)
        assert np.allclose(p, p.T)

    def test_rejects_non_unit(self):
        with pytest.raises(GeometryError):
            tangential_projector([1.0, 1.0, 0.0])


class TestShapes:
    def test_corner_lagrange_property(self):
        s = p2_shape((0.0, 0.0))
        assert np.allclose(s.values, [1, 0, 0, 0, 0, 0])

    def test_midside_lagrange_property(self):
        s = p2_shape((0.5, 0.0))
        assert np.allclose(s.values, [0, 0, 0, 1, 0, 0])

    def test_partition_of_unity(self):
        s = p2_shape((0.25, 0.25))
        assert s.values.sum() == pytest.approx(1.0, abs=1e-14)

    @pytest.mark.parametrize("xi", [(0.1, 0.2), (0.3, 0.3), (0.0, 0.9)])
    def test_derivative_sums_vanish(self, xi):
        s = p2_shape(xi)
        assert np.allclose(s.ref_gradients.sum(axis=0), 0.0, atol=1e-13)
        assert np.allclose(s.ref_hessians.sum(axis=0), 0.0, atol=1e-13)

    def test_all_lagrange_nodes(self):
        from platefem.kernel import REF_NODES

        for i, node in enumerate(REF_NODES):
            values = p2_shape(node).values
            expected = np.zeros(6)
            expected[i] = 1.0
            assert np.allclose(values, expected, atol=1e-14)


class TestQuadrature:
    def test_tri_order2_weights(self):
        pts, w = tri_quadrature(2)
        assert len(w) == 3
        assert w.sum() == pytest.approx(0.5, abs=1e-15)

    def test_seg_order4_weights(self):
        x, w = seg_quadrature(4)
        assert len(w) == 3
        assert w.sum() == pytest.approx(1.0, abs=1e-15)

    def test_tri_order4_exactness(self):
        # independent oracle: int over ref triangle of x^a y^b = a! b! / (a+b+2)!
        import math

        pts, w = tri_quadrature(4)
        for a in range(5):
            for b in range(5 - a):
                exact = (
                    math.factorial(a)
                    * math.factorial(b)
                    / math.factorial(a + b + 2)
                )
                approx = np.sum(w * pts[:, 0] ** a * pts[:, 1] ** b)
                assert approx == pytest.approx(exact, rel=1e-13), (a, b)

    def test_tri_order4_xi_eta(self):
        pts, w = tri_quadrature(4)
        assert np.sum(w * pts[:, 0] * pts[:, 1]) == pytest.approx(1.0 / 24.0, rel=1e-13)

    def test_seg_exactness(self):
        for order, maxdeg in ((2, 3), (4, 5)):
            x, w = seg_quadrature(order)
            for k in range(maxdeg + 1):
                assert np.sum(w * x**k) == pytest.approx(1.0 / (k + 1), rel=1e-13)

    def test_unsupported_orders_rejected(self):
        with pytest.raises(ValueError):
            tri_quadrature(3)
        with pytest.raises(ValueError):
            seg_quadrature(6)


class TestElementFrame:
    def test_reference_aligned(self):
        fr = element_frame([(0, 0, 0), (1, 0, 0), (0, 1, 0)], (0, 0, 1))
        assert np.allclose(fr.jacobian, np.eye(3))
        assert fr.area == pytest.approx(0.5)

    def test_scaled_triangle(self):
        fr = element_frame([(0, 0, 0), (2, 0, 0), (0, 2, 0)], (0, 0, 1))
        assert np.linalg.det(fr.jacobian) == pytest.approx(4.0)
        assert fr.area == pytest.approx(2.0)

    def test_rotation_invariant_det(self):
        corners = np.array([(0, 0, 0), (2, 0, 0), (0, 2, 0)], dtype=float)
        r = random_rotation(3)
        fr = element_frame(corners @ r.T, r @ np.array([0.0, 0.0, 1.0]))
        assert abs(np.linalg.det(fr.jacobian)) == pytest.approx(4.0, rel=1e-12)

    def test_inverse_consistency(self):
        fr = element_frame([(0.3, 1.1, 0.0), (2.0, 0.1, 0.0), (0.5, 2.0, 0.0)], (0, 0, 1))
        assert np.allclose(fr.jacobian @ fr.jacobian_inv, np.eye(3), atol=1e-12)

    def test_degenerate_rejected(self):
        with pytest.raises(GeometryError):
            element_frame([(0, 0, 0), (1, 0, 0), (2, 0, 0)], (0, 0, 1))


class TestPhysicalDerivatives:
    def test_corner_gradient_reference_aligned(self):
        fr = element_frame([(0, 0, 0), (1, 0, 0), (0, 1, 0)], (0, 0, 1))
        g = physical_gradients(fr, p2_shape((0.0, 0.0)))
        assert np.allclose(g[0], [-3.0, -3.0, 0.0])

    def test_gradients_tangential(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            r = random_rotation(rng.integers(1 << 30))
            corners = (rng.normal(size=(3, 2)) @ np.eye(2, 3)) @ r.T
            n = r @ np.array([0.0, 0.0, 1.0])
            try:
                fr = element_frame(corners, n)
            except GeometryError:
                continue
            g = physical_gradients(fr, p2_shape((0.2, 0.3)))
            assert np.max(np.abs(g @ n)) < 1e-12

    def test_linear_field_reproduced(self):
        # gradients of an interpolated linear field equal its projected slope
        corners = np.array([(0.1, 0.0, 0.0), (1.3, 0.2, 0.0), (0.2, 1.1, 0.0)])
        fr = element_frame(corners, (0, 0, 1))
        a = np.array([0.7, -0.3, 0.9])
        nodes6 = np.vstack([corners, 0.5 * (corners + np.roll(corners, -1, axis=0))])
        vals = nodes6 @ a
        g = physical_gradients(fr, p2_shape((0.25, 0.4)))
        grad_u = vals @ g
        assert np.allclose(grad_u, fr.projector @ a, atol=1e-12)

    def test_quadratic_hessian_reproduced(self):
        # interpolant of u = x^2 on the z=0 plane has Hessian diag(2, 0, 0)
        corners = np.array([(0.0, 0.0, 0.0), (1.4, 0.1, 0.0), (0.3, 1.2, 0.0)])
        fr = element_frame(corners, (0, 0, 1))
        shape = p2_shape((0.3, 0.3))
        nodes6 = np.vstack([corners, 0.5 * (corners + np.roll(corners, -1, axis=0))])
        vals = nodes6[:, 0] ** 2
        hess = physical_hessians(fr, shape)
        h_u = np.einsum("i,icd->cd", vals, hess)
        expected = np.zeros((3, 3))
        expected[0, 0] = 2.0
        assert np.allclose(h_u, expected, atol=1e-10)

    def test_hessians_in_plane_and_conjugate_under_rotation(self):
        corners = np.array([(0.0, 0.0, 0.0), (1.0, 0.2, 0.0), (0.1, 0.9, 0.0)])
        fr = element_frame(corners, (0, 0, 1))
        shape = p2_shape((0.2, 0.2))
        h0 = physical_hessians(fr, shape)
        n = fr.normal
        assert np.max(np.abs(np.einsum("c,icd->id", n, h0))) < 1e-12
        r = random_rotation(11)
        fr_r = element_frame(corners @ r.T, r @ n)
        h1 = physical_hessians(fr_r, shape)
        assert np.allclose(h1, np.einsum("ac,icd,bd->iab", r, h0, r), atol=1e-10)

    def test_p2_exactness_of_global_quadratic(self):
        # physical derivatives of interpolated quadratics are exact
        rng = np.random.default_rng(23)
        r = random_rotation(5)
        corners2 = rng.normal(size=(3, 2))
        corners = np.column_stack([corners2, np.zeros(3)]) @ r.T + rng.normal(size=3)
        n = r @ np.array([0.0, 0.0, 1.0])
        fr = element_frame(corners, n)
        q_mat = rng.normal(size=(3, 3))
        q_mat = 0.5 * (q_mat + q_mat.T)
        b_vec = rng.normal(size=3)

        def q(x):
            return x @ q_mat @ x + b_vec @ x

        nodes6 = np.vstack([corners, 0.5 * (corners + np.roll(corners, -1, axis=0))])
        vals = np.array([q(x) for x in nodes6])
        xi = (0.27, 0.31)
        shape = p2_shape(xi)
        x_phys = shape.values @ nodes6
        g = vals @ physical_gradients(fr, shape)
        h = np.einsum("i,icd->cd", vals, physical_hessians(fr, shape))
        p = fr.projector
        grad_exact = p @ (2.0 * q_mat @ x_phys + b_vec)
        hess_exact = p @ (2.0 * q_mat) @ p
        scale = max(np.linalg.norm(grad_exact), 1.0)
        assert np.allclose(g, grad_exact, atol=1e-10 * scale)
        assert np.allclose(h, hess_exact, atol=1e-10 * max(np.linalg.norm(hess_exact), 1.0))
