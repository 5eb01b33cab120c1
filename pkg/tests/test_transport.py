"""Geodesic, parallel-transport, and line-integral tests."""

import math

import numpy as np
import numpy.testing as npt
import pytest

from lckgeo import zoo
from lckgeo.charts import polygon_loop, segment_loop
from lckgeo.errors import DomainExitError
from lckgeo.hermitian import lee_field
from lckgeo.transport import (geodesic, geodesic_with_velocity, loop_integral,
                              orthogonality_defect, parallel_transport,
                              transport_segment)


def _s2_chart(radius=1.0):
    return zoo.round_s2_base(radius, polar_margin=0.25).chart()


def _latitude_loop(theta0, steps=400):
    def curve(t):
        return np.array([theta0, 2.0 * math.pi * t])

    def velocity(t):
        return np.array([0.0, 2.0 * math.pi])

    return segment_loop(np.array([theta0, 0.0]),
                        np.array([0.0, 2.0 * math.pi]), steps=steps,
                        label=f"latitude_{theta0:g}")


class TestGeodesic:
    def test_euclidean_straight_line(self, euclid4):
        chart = euclid4.charts["flat"]
        p = np.array([0.1, -0.2, 0.0, 0.3])
        v = np.array([0.5, 0.1, -0.2, 0.0])
        end = geodesic(chart, p, v, time=1.0, steps=50)
        npt.assert_allclose(end, p + v, atol=1e-12)

    def test_equator_great_circle(self):
        """Start on the equator along the equator: stays there, arc length T."""
        chart = _s2_chart()
        p = np.array([math.pi / 2, 1.0])
        v = np.array([0.0, 1.0])      # |v| = 1 at the equator
        T = 0.8
        end = geodesic(chart, p, v, time=T, steps=400, mode="analytic")
        npt.assert_allclose(end, [math.pi / 2, 1.0 + T], atol=1e-9)

    def test_energy_conservation(self, calabi_sin):
        chart = calabi_sin.charts["g_ell"]
        p = chart.center()
        v = np.array([0.3, 0.2, 0.4, -0.1])
        end, vel = geodesic_with_velocity(chart, p, v, time=0.6, steps=400,
                                          mode="analytic")
        e0 = float(v @ chart.metric(p) @ v)
        e1 = float(vel @ chart.metric(end) @ vel)
        assert abs(e1 - e0) < 1e-6 * (1 + e0)

    def test_calabi_radial_ray(self, calabi_sin):
        """v = d_r is geodesic: r advances with unit speed, base fixed."""
        chart = calabi_sin.charts["g_ell"]
        p = chart.center()
        v = np.array([0.0, 0.0, 0.0, 1.0])
        T = 0.5
        end = geodesic(chart, p, v, time=T, steps=300, mode="analytic")
        npt.assert_allclose(end[:3], p[:3], atol=1e-9)
        assert abs(end[3] - (p[3] + T)) < 1e-9

    def test_domain_exit_reported(self, euclid4):
        chart = euclid4.charts["flat"]
        with pytest.raises(DomainExitError) as err:
            geodesic(chart, np.zeros(4), np.array([1.0, 0, 0, 0]),
                     time=3.0, steps=60)
        assert err.value.exit_time is not None
        assert 0.9 < err.value.exit_time < 1.2


class TestParallelTransport:
    def test_constant_loop_identity(self, euclid4):
        chart = euclid4.charts["flat"]
        p = np.zeros(4)
        loop = segment_loop(p, np.zeros(4), steps=10)
        M = parallel_transport(chart, loop, np.eye(4))
        npt.assert_allclose(M, np.eye(4), atol=1e-12)

    def test_flat_loop_identity(self, euclid4):
        chart = euclid4.charts["flat"]
        loop = polygon_loop([np.zeros(4), [0.5, 0, 0, 0], [0.5, 0.5, 0, 0]],
                            steps_per_edge=40)
        M = parallel_transport(chart, loop, np.eye(4))
        npt.assert_allclose(M, np.eye(4), atol=1e-12)

    @pytest.mark.parametrize("theta0", [math.pi / 3, 1.2, 2.0])
    def test_latitude_holonomy_cone_angle(self, theta0):
        """Transport around the latitude rotates by -2 pi cos(theta0).

        Classical cone holonomy, cross-checked at two ODE resolutions.
        """
        chart = _s2_chart()
        expected = 2.0 * math.pi * math.cos(theta0)
        rot = np.array([[math.cos(expected), math.sin(expected)],
                        [-math.sin(expected), math.cos(expected)]])
        results = []
        for steps in (200, 400):
            loop = _latitude_loop(theta0, steps=steps)
            M = parallel_transport(chart, loop, np.eye(2), mode="analytic")
            # to the orthonormal frame (e_theta, e_phi)
            E = np.diag([1.0, math.sin(theta0)])
            M_hat = E @ M @ np.linalg.inv(E)
            npt.assert_allclose(M_hat, rot, atol=1e-7)
            results.append(M_hat)
        npt.assert_allclose(results[0], results[1], atol=1e-7)

    def test_orthogonality_defect_and_convergence(self):
        """M^T G M = G to tol_ode; doubling steps cuts the defect >= 4x."""
        chart = _s2_chart()
        loop_c = _latitude_loop(1.1, steps=32)
        M_c = parallel_transport(chart, loop_c, np.eye(2), mode="analytic",
                                 steps=32)
        defect_c = orthogonality_defect(chart, loop_c, M_c)
        M_f = parallel_transport(chart, loop_c, np.eye(2), mode="analytic",
                                 steps=64)
        defect_f = orthogonality_defect(chart, loop_c, M_f)
        assert defect_f < 1e-6
        assert defect_c / defect_f >= 4.0

    def test_hopf_generator_transport_is_isometry(self, hopf2):
        """Transport around the deck generator respects the product metric."""
        H = hopf2.main_structure
        loop = hopf2.loops["s1_generator"]
        M = parallel_transport(H.chart, loop, np.eye(4), mode="analytic")
        assert orthogonality_defect(H.chart, loop, M) < 1e-8
        # the circle factor is flat: d_s returns to itself
        npt.assert_allclose(M[:, 0], [1, 0, 0, 0], atol=1e-8)


class TestLoopIntegral:
    def test_exact_form_integrates_to_zero(self, calabi_sin, rng):
        """d(phi) over random polygonal loops vanishes to tol_ode."""
        chart = calabi_sin.charts["g_ell"]
        H = calabi_sin.structures["g_ell,J+"]
        field = lee_field(H, "analytic")      # = d phi, exact
        for _ in range(20):
            pts = chart.sample_points(rng, 3, margin=0.4)
            loop = polygon_loop(list(pts), steps_per_edge=60)
            assert abs(loop_integral(chart, field, loop)) < 1e-6

    def test_hopf_generator_period(self, hopf2):
        """The circle generator period equals the circumference."""
        H = hopf2.main_structure
        value = loop_integral(H.chart, lee_field(H, "analytic"),
                              hopf2.loops["s1_generator"])
        assert abs(value - hopf2.params["circumference"]) < 1e-8

    def test_calabi_fiber_period_zero(self, calabi_sin):
        H = calabi_sin.structures["g_ell,J+"]
        value = loop_integral(H.chart, lee_field(H, "analytic"),
                              calabi_sin.loops["fiber"])
        assert abs(value) < 1e-9

    def test_additivity_under_concatenation(self, hopf2):
        """Two rectangles sharing an edge integrate like their union."""
        H = hopf2.main_structure
        field = lee_field(H, "analytic")
        c = H.chart.center()
        e1 = np.array([0.2, 0, 0, 0])
        e2 = np.array([0, 0.2, 0, 0])
        left = polygon_loop([c, c + e1, c + e1 + e2, c + e2], steps_per_edge=40)
        right = polygon_loop([c + e1, c + 2 * e1, c + 2 * e1 + e2, c + e1 + e2],
                             steps_per_edge=40)
        union = polygon_loop([c, c + 2 * e1, c + 2 * e1 + e2, c + e2],
                             steps_per_edge=40)
        total = (loop_integral(H.chart, field, left)
                 + loop_integral(H.chart, field, right))
        assert abs(total - loop_integral(H.chart, field, union)) < 1e-9

    def test_segment_transport_roundtrip(self, calabi_sin):
        chart = calabi_sin.charts["g_ell"]
        a = chart.center()
        b = a + np.array([0.2, -0.3, 0.4, 0.1])
        P = transport_segment(chart, a, b, np.eye(4), steps=200, mode="analytic")
        Q = transport_segment(chart, b, a, np.eye(4), steps=200, mode="analytic")
        npt.assert_allclose(Q @ P, np.eye(4), atol=1e-8)
