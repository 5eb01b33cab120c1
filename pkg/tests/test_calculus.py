"""Connection and curvature tests against closed forms and a symbolic oracle."""

import math

import numpy as np
import numpy.testing as npt
import pytest
import sympy as sp

from lckgeo import zoo
from lckgeo.calculus import (christoffel, codifferential,
                             covariant_derivative, covariant_derivative_full,
                             exterior_derivative, lowered_riemann,
                             metric_compatibility_defect, ricci_scalar,
                             riemann)
from lckgeo.charts import Chart, form_norm
from lckgeo.errors import ChartDomainError
from lckgeo.hermitian import lee_field, lee_form_components


def _sphere_chart(radius=1.0, dim=2):
    if dim == 2:
        return zoo.round_s2_base(radius).chart()
    # round S^3 in hyperspherical angles
    R2 = radius * radius

    def g_fn(p):
        return np.diag([R2, R2 * np.sin(p[0]) ** 2,
                        R2 * np.sin(p[0]) ** 2 * np.sin(p[1]) ** 2])

    return Chart(dim=3, domain=((0.4, math.pi - 0.4), (0.4, math.pi - 0.4),
                                (0.0, 2 * math.pi)),
                 metric_fn=g_fn, label="round_S3")


class TestChristoffel:
    def test_euclidean_zero(self, euclid4):
        G = christoffel(euclid4.charts["flat"], np.zeros(4)).components
        npt.assert_allclose(G, 0.0, atol=1e-12)

    def test_sphere_closed_form(self):
        """Gamma^theta_{phi phi} = -sin(t)cos(t), Gamma^phi_{t phi} = cot(t)."""
        chart = _sphere_chart()
        p = np.array([math.pi / 4, 1.0])
        G = christoffel(chart, p, mode="fd").components
        assert abs(G[0, 1, 1] - (-0.5)) < 1e-8
        assert abs(G[1, 0, 1] - 1.0 / math.tan(p[0])) < 1e-7
        npt.assert_allclose(G, np.transpose(G, (0, 2, 1)), atol=1e-12)

    def test_flat_inversion_against_symbolic_oracle(self, flat_inv2, rng):
        """FD pipeline vs independent sympy differentiation of r^-4 delta."""
        chart = flat_inv2.charts["inverted"]
        xs = sp.symbols("x0 x1 x2 x3", real=True)
        r2 = sum(x * x for x in xs)
        g_sym = sp.eye(4) / r2 ** 2
        g_inv_sym = sp.eye(4) * r2 ** 2
        gamma_sym = [[[sp.simplify(sum(
            g_inv_sym[k, l] * (sp.diff(g_sym[i, l], xs[j])
                               + sp.diff(g_sym[j, l], xs[i])
                               - sp.diff(g_sym[i, j], xs[l])) / 2
            for l in range(4))) for j in range(4)] for i in range(4)]
            for k in range(4)]
        gamma_fn = sp.lambdify(xs, gamma_sym, "numpy")
        for p in chart.sample_points(rng, 5):
            G_num = christoffel(chart, p, mode="fd").components
            G_orc = np.asarray(gamma_fn(*p), dtype=float)
            assert np.max(np.abs(G_num - G_orc)) < 1e-5

    def test_halving_step_reduces_error(self):
        """2nd-order stencil: halving the step shrinks the defect ~4x."""
        chart = _sphere_chart()
        p = np.array([0.9, 2.0])
        exact = christoffel(chart, p, mode="analytic").components
        err = lambda h: np.max(np.abs(
            christoffel(chart, p, mode="fd", step=h).components - exact))
        assert err(5e-4) < err(1e-3) / 3.0

    def test_domain_error(self, flat_inv2):
        chart = flat_inv2.charts["inverted"]
        with pytest.raises(ChartDomainError):
            christoffel(chart, np.full(4, 0.34999), mode="fd")


class TestCurvature:
    def test_euclidean_riemann_zero(self, euclid4):
        R = riemann(euclid4.charts["flat"], np.zeros(4)).components
        npt.assert_allclose(R, 0.0, atol=1e-12)

    def test_round_s3_sectional_curvature_one(self, rng):
        """R(X, Y)Y = |Y|^2 X - <X, Y> Y on the unit S^3."""
        chart = _sphere_chart(1.0, dim=3)
        for p in chart.sample_points(rng, 5):
            g = chart.metric(p)
            R = riemann(chart, p, mode="fd").components
            x, y = rng.standard_normal(3), rng.standard_normal(3)
            lhs = np.einsum("abcd,b,c,d->a", R, y, x, y)
            rhs = float(y @ g @ y) * x - float(x @ g @ y) * y
            assert np.max(np.abs(lhs - rhs)) < 1e-6 * (1 + np.max(np.abs(rhs)))

    def test_flat_inversion_riemann_vanishes(self, flat_inv2, rng):
        chart = flat_inv2.charts["inverted"]
        for p in chart.sample_points(rng, 10):
            R = lowered_riemann(chart, p, mode="fd")
            assert form_norm(R, chart.metric(p)) < 1e-4

    @pytest.mark.parametrize("mode,tol", [("fd", 1e-4), ("analytic", 1e-8)])
    def test_riemann_symmetries_and_bianchi(self, mode, tol, hopf2, calabi_sin,
                                            warped_sin, rng):
        """Antisymmetries and the first Bianchi identity on zoo charts."""
        for entry in (hopf2, calabi_sin, warped_sin):
            chart = entry.main_structure.chart
            for p in chart.sample_points(rng, 4):
                g = chart.metric(p)
                R = lowered_riemann(chart, p, mode=mode)
                scale = 1.0 + np.max(np.abs(R))
                assert np.max(np.abs(R + np.transpose(R, (1, 0, 2, 3)))) < tol * scale
                assert np.max(np.abs(R + np.transpose(R, (0, 1, 3, 2)))) < tol * scale
                bianchi = (R + np.transpose(R, (0, 2, 3, 1))
                           + np.transpose(R, (0, 3, 1, 2)))
                assert np.max(np.abs(bianchi)) < tol * scale

    def test_metric_compatibility(self, hopf2, calabi_sin, rng):
        for entry in (hopf2, calabi_sin):
            chart = entry.main_structure.chart
            for p in chart.sample_points(rng, 5):
                assert metric_compatibility_defect(chart, p, mode="fd") < 1e-4
                assert metric_compatibility_defect(chart, p, mode="analytic") < 1e-12


class TestRicci:
    def test_euclidean(self, euclid4):
        ric, scal = ricci_scalar(euclid4.charts["flat"], np.zeros(4))
        npt.assert_allclose(ric.components, 0.0, atol=1e-12)
        assert abs(scal) < 1e-12

    @pytest.mark.parametrize("radius,dim", [(1.0, 2), (2.0, 2), (1.0, 3)])
    def test_round_sphere_scalar(self, radius, dim, rng):
        """scal(S^m(R)) = m(m-1)/R^2."""
        chart = _sphere_chart(radius, dim)
        p = chart.sample_points(rng, 1)[0]
        ric, scal = ricci_scalar(chart, p, mode="fd")
        expected = dim * (dim - 1) / radius ** 2
        assert abs(scal - expected) < 1e-5 * (1 + expected)
        npt.assert_allclose(ric.components, ric.components.T, atol=1e-7)

    def test_warped_fiber_curvature_rows(self, warped_sin, rng):
        """R(X, d_t) d_t = -(f''/f) X for fiber directions X."""
        chart = warped_sin.main_structure.chart
        for p in chart.sample_points(rng, 4):
            t = p[1]
            ratio = -math.sin(t) + math.cos(t) ** 2   # f''/f, f = e^(sin t)
            R = riemann(chart, p, mode="fd").components
            for k in (2, 3):
                x = np.zeros(4)
                x[k] = 1.0
                lhs = np.einsum("abcd,b,c,d->a", R, np.array([0, 1, 0, 0.0]),
                                x, np.array([0, 1, 0, 0.0]))
                npt.assert_allclose(lhs, -ratio * x,
                                    atol=1e-5 * (1 + abs(ratio)))

    def test_warped_radial_ricci(self, warped_sin, rng):
        """Ric(d_t, d_t) = (2 - 2n) f''/f with f = e^(sin t).

        The prefactor is the fiber dimension 2n - 2, i.e. the trace of the
        fiber curvature rows above (checked to 1e-8 numerically).
        """
        chart = warped_sin.main_structure.chart
        for p in chart.sample_points(rng, 5):
            t = p[1]
            ric, _ = ricci_scalar(chart, p, mode="fd")
            expected = -2.0 * (-math.sin(t) + math.cos(t) ** 2)
            assert abs(ric.components[1, 1] - expected) < 1e-5 * (1 + abs(expected))


class TestCovariantDerivative:
    def test_constant_field_flat(self, euclid4):
        chart = euclid4.charts["flat"]
        out = covariant_derivative(chart, lambda q: np.ones(4), np.zeros(4),
                                   x=np.ones(4), valence=(0, 1))
        npt.assert_allclose(out.components, 0.0, atol=1e-12)

    def test_hopf_lee_form_is_parallel(self, hopf2, rng):
        """nabla_X theta = 0 for the circle length element."""
        H = hopf2.main_structure
        for p in H.chart.sample_points(rng, 5):
            x = rng.standard_normal(4)
            out = covariant_derivative(H.chart, lee_field(H, "fd"), p, x,
                                       valence=(1, 0), mode="fd")
            assert out.norm() < 1e-6

    def test_calabi_radial_derivative_of_vertical_field(self, calabi_sin, rng):
        """nabla_{d_r} xi = (l'/l) xi on the bundle chart."""
        chart = calabi_sin.charts["g_ell"]
        c_w = calabi_sin.params["c_w"]
        xi = np.array([0.0, 0.0, 1.0 / c_w, 0.0])
        e_r = np.array([0.0, 0.0, 0.0, 1.0])
        for p in chart.sample_points(rng, 5):
            out = covariant_derivative(chart, lambda q: xi, p, e_r,
                                       valence=(0, 1), mode="fd").components
            expected = (math.cos(p[3]) / math.sin(p[3])) * xi
            npt.assert_allclose(out, expected, atol=1e-7)

    def test_leibniz_rule(self, rng):
        """nabla(alpha (x) beta) = nabla alpha (x) beta + alpha (x) nabla beta."""
        chart = _sphere_chart()
        alpha = lambda q: np.array([math.sin(q[0]), math.cos(q[1])])
        beta = lambda q: np.array([q[0] ** 2, math.sin(q[1]) * q[0]])
        tensor = lambda q: np.outer(alpha(q), beta(q))
        p = np.array([1.1, 2.3])
        lhs = covariant_derivative_full(chart, tensor, p, (2, 0), mode="fd")
        da = covariant_derivative_full(chart, alpha, p, (1, 0), mode="fd")
        db = covariant_derivative_full(chart, beta, p, (1, 0), mode="fd")
        rhs = (np.einsum("ci,j->cij", da, beta(p))
               + np.einsum("i,cj->cij", alpha(p), db))
        npt.assert_allclose(lhs, rhs, atol=1e-6)


class TestFormCalculus:
    def test_d_of_constant_form(self, euclid4):
        chart = euclid4.charts["flat"]
        out = exterior_derivative(chart, lambda q: np.ones(4), np.zeros(4), k=1)
        npt.assert_allclose(out.components, 0.0, atol=1e-12)

    def test_d_squared_zero(self):
        chart = _sphere_chart()
        field = lambda q: np.array([math.sin(q[0]) * q[1], math.cos(q[0])])
        p = np.array([1.2, 2.0])
        d1 = lambda q: exterior_derivative(chart, field, q, k=1).components
        d2 = exterior_derivative(chart, d1, p, k=2).components
        assert np.max(np.abs(d2)) < 1e-5

    def test_hopf_domega(self, hopf2, rng):
        """d Omega = 2 theta ^ Omega on the Hopf chart."""
        from lckgeo.charts import wedge
        H = hopf2.main_structure
        for p in H.chart.sample_points(rng, 5):
            d_om = exterior_derivative(H.chart, H.omega, p, k=2).components
            theta = lee_form_components(H, p, mode="fd")
            rhs = 2.0 * wedge(theta, H.omega(p))
            assert form_norm(d_om - rhs, H.chart.metric(p)) < 1e-6

    def test_calabi_bundle_curvature(self, calabi_sin, rng):
        """d omega = pullback(Omega_N) for the connection form."""
        chart = calabi_sin.charts["g_ell"]
        c_w = calabi_sin.params["c_w"]
        base = calabi_sin.base

        def omega_form(q):
            return np.array([0.0, c_w * math.cos(q[0]), c_w, 0.0])

        for p in chart.sample_points(rng, 5):
            d_om = exterior_derivative(chart, omega_form, p, k=1).components
            omega_n = base.omega_fn(np.array([p[0], 0.0]))
            pullback = np.zeros((4, 4))
            pullback[:2, :2] = omega_n
            assert np.max(np.abs(d_om - pullback)) < 1e-9

    def test_codifferential_constant_euclidean(self, euclid4):
        chart = euclid4.charts["flat"]
        out = codifferential(chart, lambda q: np.ones(4), np.zeros(4), k=1)
        assert abs(float(out.components)) < 1e-12

    def test_hopf_delta_omega(self, hopf2, rng):
        """delta Omega = (2 - 2n) J theta: the codifferential sign anchor."""
        H = hopf2.main_structure
        for p in H.chart.sample_points(rng, 5):
            delta_om = codifferential(H.chart, H.omega, p, k=2, mode="fd").components
            theta = lee_form_components(H, p, mode="fd")
            rhs = (2.0 - 2.0 * H.n) * H.j_form(p, theta)
            assert np.max(np.abs(delta_om - rhs)) < 1e-8

    def test_flat_inversion_delta_theta(self, flat_inv2):
        """At r = 1, n = 2: |theta|^2 = 4 and delta theta = (1-n)|theta|^2 = -4."""
        H = flat_inv2.main_structure
        p = np.full(4, 0.5)     # r = 1
        theta = lee_form_components(H, p, mode="fd")
        g_inv = np.linalg.inv(H.chart.metric(p))
        norm_sq = float(theta @ g_inv @ theta)
        assert abs(norm_sq - 4.0) < 1e-8
        delta_theta = codifferential(H.chart, lee_field(H, "fd"), p, k=1,
                                     mode="fd").components
        assert abs(float(delta_theta) - (-4.0)) < 1e-4


def test_christoffel_metric_error():
    from lckgeo.errors import MetricError
    bad = Chart(dim=2, domain=((-1, 1), (-1, 1)),
                metric_fn=lambda p: np.diag([1.0, -1.0]), label="bad")
    with pytest.raises(MetricError):
        christoffel(bad, np.zeros(2))
