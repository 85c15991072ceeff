import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from platefem.forms import (
    MultilinearTrace,
    average,
    bending_curvature,
    corner_force,
    edge_force_traces,
    edge_moment,
    in_plane_strain,
    in_plane_stress,
    jump,
    normal_gradient,
    product_identity_residual,
)
from platefem.kernel import element_frame, p2_shape, physical_gradients, physical_hessians, tangential_projector
from platefem.model import Material


def mat(mu=1.0, lam=1.0):
    # invert the plane-stress relations for given (mu, lambda)
    # mu = E/(2(1+nu)), lam = E nu/(1-nu^2)  =>  nu = lam/(lam+2 mu)
    nu = lam / (lam + 2.0 * mu)
    e = 2.0 * mu * (1.0 + nu)
    return Material(youngs_modulus=e, poisson_ratio=nu, thickness=np.sqrt(12.0))


class TestJumpAverage:
    def test_degree1_example(self):
        wp = MultilinearTrace(2.0, 1)
        wm = MultilinearTrace(3.0, 1, side="minus")
        assert jump(wp, wm) == pytest.approx(5.0)
        assert average(wp, wm) == pytest.approx(-0.5)

    def test_degree2_example(self):
        wp = MultilinearTrace(2.0, 2)
        wm = MultilinearTrace(3.0, 2, side="minus")
        assert jump(wp, wm) == pytest.approx(-1.0)
        assert average(wp, wm) == pytest.approx(2.5)

    def test_one_sided_convention(self):
        w = MultilinearTrace(4.2, 2)
        assert jump(w) == pytest.approx(4.2)
        assert average(w) == pytest.approx(4.2)

    def test_coplanar_reduction_degree1(self):
        # w(nu) = nu . a is 1-linear; coplanar means nu- = -nu+
        a = np.array([0.4, -1.2, 0.3])
        nu_p = np.array([1.0, 0.0, 0.0])
        nu_m = -nu_p
        wp = MultilinearTrace(float(nu_p @ a), 1)
        wm = MultilinearTrace(float(nu_m @ a), 1, side="minus")
        # same smooth field on both sides: jump must vanish
        assert jump(wp, wm) == pytest.approx(0.0, abs=1e-15)
        # and the average reduces to the classical one-sided value
        assert average(wp, wm) == pytest.approx(float(nu_p @ a))

    def test_degree_mismatch_rejected(self):
        with pytest.raises(ValueError):
            jump(MultilinearTrace(1.0, 1), MultilinearTrace(1.0, 2, side="minus"))

    def test_kind_mismatch_rejected(self):
        with pytest.raises(ValueError):
            jump(
                MultilinearTrace(1.0, 1),
                MultilinearTrace(np.ones(3), 1, side="minus"),
            )

    def test_product_identity_example(self):
        w1p, w1m = MultilinearTrace(2.0, 1), MultilinearTrace(3.0, 1, side="minus")
        w2p, w2m = MultilinearTrace(5.0, 1), MultilinearTrace(7.0, 1, side="minus")
        # [w1 w2] with degree 2: 10 - 21 = -11 = 5 * (-1) + (-0.5) * 12
        assert product_identity_residual(w1p, w1m, w2p, w2m) == pytest.approx(0.0, abs=1e-13)
        assert jump(MultilinearTrace(10.0, 2), MultilinearTrace(21.0, 2, side="minus")) == pytest.approx(-11.0)

    def test_zero_minus_side(self):
        w1p, w1m = MultilinearTrace(1.7, 1), MultilinearTrace(0.0, 1, side="minus")
        w2p, w2m = MultilinearTrace(-2.4, 2), MultilinearTrace(0.0, 2, side="minus")
        assert product_identity_residual(w1p, w1m, w2p, w2m) == pytest.approx(0.0, abs=1e-14)

    @given(
        st.integers(min_value=0, max_value=3),
        st.integers(min_value=0, max_value=3),
        st.floats(-1e3, 1e3),
        st.floats(-1e3, 1e3),
        st.floats(-1e3, 1e3),
        st.floats(-1e3, 1e3),
    )
    @settings(max_examples=200, deadline=None)
    def test_product_identity_property(self, d1, d2, a, b, c, d):
        w1p, w1m = MultilinearTrace(a, d1), MultilinearTrace(b, d1, side="minus")
        w2p, w2m = MultilinearTrace(c, d2), MultilinearTrace(d, d2, side="minus")
        # rounding scale is set by the largest cross product formed inside
        scale = max(abs(a * c), abs(b * d), abs(a * d), abs(b * c), 1.0)
        assert product_identity_residual(w1p, w1m, w2p, w2m) <= 1e-13 * scale

    @given(st.integers(min_value=0, max_value=4), st.floats(-10, 10), st.floats(-10, 10))
    @settings(max_examples=100, deadline=None)
    def test_jump_average_recombine(self, d, a, b):
        # w+ = <w> + [w]/2 and (-1)^d w- = <w> - [w]/2
        wp, wm = MultilinearTrace(a, d), MultilinearTrace(b, d, side="minus")
        j, m = jump(wp, wm), average(wp, wm)
        assert m + 0.5 * j == pytest.approx(a, abs=1e-12)
        sign = -1.0 if d % 2 else 1.0
        assert m - 0.5 * j == pytest.approx(sign * b, abs=1e-12)


class TestInPlane:
    def test_uniaxial_stretch_strain(self):
        # v = (x, -y, 0) on the z=0 plane
        p = tangential_projector([0, 0, 1])
        tj = np.diag([1.0, -1.0, 0.0])
        eps = in_plane_strain(tj, p)
        assert np.allclose(eps, np.diag([1.0, -1.0, 0.0]), atol=1e-14)

    def test_constant_field_zero_strain(self):
        p = tangential_projector([0, 0, 1])
        assert np.allclose(in_plane_strain(np.zeros((3, 3)), p), 0.0)

    def test_identity_matches_double_projection(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            n = rng.normal(size=3)
            n /= np.linalg.norm(n)
            p = tangential_projector(n)
            tj = rng.normal(size=(3, 3)) @ p  # tangential Jacobian form
            eps = in_plane_strain(tj, p)
            e = 0.5 * (tj + tj.T)
            assert np.allclose(eps, p @ e @ p, atol=1e-14)
            assert np.allclose(eps, eps.T, atol=1e-14)
            assert np.max(np.abs(eps @ n)) < 1e-13

    def test_stress_trace_free_shear(self):
        p = tangential_projector([0, 0, 1])
        eps = np.diag([1.0, -1.0, 0.0])
        sigma = in_plane_stress(eps, mat(mu=1.0, lam=1.0), p)
        assert np.allclose(sigma, 2.0 * eps, atol=1e-13)

    def test_stress_equibiaxial(self):
        p = tangential_projector([0, 0, 1])
        sigma = in_plane_stress(p, mat(mu=1.0, lam=1.0), p)
        assert np.allclose(sigma, 4.0 * p, atol=1e-13)

    def test_paper_material_constants(self):
        m = Material(youngs_modulus=1e9, poisson_ratio=0.5, thickness=1e-2)
        assert m.mu == pytest.approx(3.3333333333e8, rel=1e-9)
        assert m.lam == pytest.approx(6.6666666667e8, rel=1e-9)
        assert 2 * m.mu + 2 * m.lam == pytest.approx(2e9, rel=1e-12)
        assert m.t_tilde_sq == pytest.approx(1e-4 / 12.0, rel=1e-14)

    def test_stress_linear_in_strain(self):
        p = tangential_projector([0, 0, 1])
        m = mat(2.0, 0.7)
        rng = np.random.default_rng(3)
        e1 = p @ (lambda a: 0.5 * (a + a.T))(rng.normal(size=(3, 3))) @ p
        e2 = p @ (lambda a: 0.5 * (a + a.T))(rng.normal(size=(3, 3))) @ p
        s = in_plane_stress(e1 + 2.0 * e2, m, p)
        assert np.allclose(
            s, in_plane_stress(e1, m, p) + 2.0 * in_plane_stress(e2, m, p), atol=1e-12
        )


class TestBendingQuantities:
    def test_normal_gradient_of_transverse_field(self):
        # u = (0, 0, w(x, y)) with w = x on z=0: grad of u.n is (1, 0, 0)
        tj = np.zeros((3, 3))
        tj[2, 0] = 1.0
        assert np.allclose(normal_gradient(tj, [0, 0, 1]), [1.0, 0.0, 0.0])

    def test_normal_gradient_of_tangential_field(self):
        tj = np.diag([1.0, 1.0, 0.0])  # u = (x, y, 0)
        assert np.allclose(normal_gradient(tj, [0, 0, 1]), 0.0)

    def test_normal_gradient_fd_oracle(self):
        # central differences of u.n on a random quadratic field
        rng = np.random.default_rng(8)
        corners = np.array([(0.0, 0.0, 0.0), (1.0, 0.1, 0.0), (0.2, 0.9, 0.0)])
        n = np.array([0.0, 0.0, 1.0])
        fr = element_frame(corners, n)
        nodes6 = np.vstack([corners, 0.5 * (corners + np.roll(corners, -1, axis=0))])
        u_nodes = rng.normal(size=(6, 3))

        def ref_of(x):
            return (fr.jacobian_inv.T @ (x - corners[0]))[:2]

        def u_of(x):
            return p2_shape(ref_of(x)).values @ u_nodes

        x0 = nodes6.mean(axis=0)
        shape = p2_shape(ref_of(x0))
        g = physical_gradients(fr, shape)
        tj = np.einsum("ia,ic->ac", u_nodes, g)
        computed = normal_gradient(tj, n)
        eps = 1e-6
        t1 = fr.jacobian[0] / np.linalg.norm(fr.jacobian[0])
        t2 = np.cross(n, t1)
        for t in (t1, t2):
            fd = (u_of(x0 + eps * t) @ n - u_of(x0 - eps * t) @ n) / (2 * eps)
            assert computed @ t == pytest.approx(fd, abs=1e-6)

    def test_curvature_of_paraboloid(self):
        # u_n = (x^2 + y^2)/2 on z=0 has curvature diag(1, 1, 0)
        corners = np.array([(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0)])
        n = np.array([0.0, 0.0, 1.0])
        fr = element_frame(corners, n)
        nodes6 = np.vstack([corners, 0.5 * (corners + np.roll(corners, -1, axis=0))])
        u = np.zeros((6, 3))
        u[:, 2] = 0.5 * (nodes6[:, 0] ** 2 + nodes6[:, 1] ** 2)
        hess = physical_hessians(fr, p2_shape((0.3, 0.3)))
        curv = bending_curvature(hess, u, n)
        assert np.allclose(curv, np.diag([1.0, 1.0, 0.0]), atol=1e-12)

    def test_curvature_of_linear_field_vanishes(self):
        corners = np.array([(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0)])
        n = np.array([0.0, 0.0, 1.0])
        fr = element_frame(corners, n)
        nodes6 = np.vstack([corners, 0.5 * (corners + np.roll(corners, -1, axis=0))])
        u = np.zeros((6, 3))
        u[:, 2] = 1.0 + 2.0 * nodes6[:, 0] - nodes6[:, 1]
        curv = bending_curvature(physical_hessians(fr, p2_shape((0.2, 0.5))), u, n)
        assert np.allclose(curv, 0.0, atol=1e-12)

    def test_moment_of_paraboloid(self):
        # sigma(curvature) = 4 P for mu = lambda = 1; M = t~^2 nu.sigma.nu = 4
        p = tangential_projector([0, 0, 1])
        m = edge_moment(np.diag([1.0, 1.0, 0.0]), mat(1.0, 1.0), [1, 0, 0], p)
        assert m.degree == 2
        assert m.value == pytest.approx(4.0, rel=1e-13)

    def test_moment_even_in_conormal(self):
        p = tangential_projector([0, 0, 1])
        curv = np.array([[1.0, 0.3, 0.0], [0.3, -0.4, 0.0], [0.0, 0.0, 0.0]])
        nu = np.array([0.6, 0.8, 0.0])
        m1 = edge_moment(curv, mat(1.3, 0.6), nu, p)
        m2 = edge_moment(curv, mat(1.3, 0.6), -nu, p)
        assert m1.value == pytest.approx(m2.value, rel=1e-14)

    def test_moment_zero_for_linear(self):
        p = tangential_projector([0, 0, 1])
        m = edge_moment(np.zeros((3, 3)), mat(1.0, 1.0), [1, 0, 0], p)
        assert m.value == 0.0


class TestForceTraces:
    def test_membrane_traction(self):
        sigma0 = 2.5 * tangential_projector([0, 0, 1])
        f_n, f_t = edge_force_traces(sigma0, [1, 0, 0])
        assert f_t.degree == 1 and f_n.degree == 1
        assert np.allclose(f_t.value, [-2.5, 0.0, 0.0])
        assert np.allclose(f_n.value, 0.0)

    def test_coplanar_equilibrium(self):
        # equal membrane states on coplanar neighbours: [F] = 0 under d=1
        sigma0 = np.diag([1.2, -0.4, 0.0])
        _, f_p = edge_force_traces(sigma0, [1, 0, 0], side="plus")
        _, f_m = edge_force_traces(sigma0, [-1, 0, 0], side="minus")
        assert np.allclose(jump(f_p, f_m), 0.0, atol=1e-14)

    def test_corner_force_direction_and_scale(self):
        m = mat(1.0, 1.0)
        sigma_b = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
        f = corner_force(sigma_b, [1, 0, 0], [0, 1, 0], [0, 0, 1], m)
        # twist tau.sigma.nu = 1, scaled by t~^2 = 1, along the normal
        assert np.allclose(f, [0.0, 0.0, 1.0], atol=1e-14)
