"""Holonomy estimation tests: trichotomy labels, agreement, error paths."""

import math

import numpy as np
import numpy.testing as npt
import pytest

from lckgeo import zoo
from lckgeo.charts import segment_loop
from lckgeo.errors import LoopTooLargeError, PreconditionError
from lckgeo.holonomy import (classify_algebra, common_fixed_vectors,
                             curvature_span, default_holonomy_loops,
                             default_probes, loop_holonomy)


def _span(entry, rng, key=None, mode="analytic"):
    H = entry.structures[key] if key else entry.holonomy_structure
    chart = H.chart
    base = chart.center()
    probes = default_probes(chart, base, rng)
    return H, curvature_span(chart, base, probes, n=entry.n,
                             J_candidates=[H.J_fn], mode=mode)


class TestCurvatureSpan:
    def test_euclidean_trivial(self, euclid4, rng):
        _, est = _span(euclid4, rng)
        assert est.algebra_dim == 0
        assert est.classification == "reducible/other"

    def test_flat_inversion_trivial(self, flat_inv2, rng):
        _, est = _span(flat_inv2, rng, mode="fd")
        assert est.algebra_dim == 0

    def test_hopf_so3_with_fixed_vector(self, hopf2, rng):
        H, est = _span(hopf2, rng)
        assert est.algebra_dim == 3
        assert est.classification == "SO(2n-1)"
        assert est.rank_gap >= 10
        fixed = common_fixed_vectors(est, H.chart.metric(est.base_point))
        assert fixed.shape[1] == 1
        direction = fixed[:, 0] / np.max(np.abs(fixed[:, 0]))
        npt.assert_allclose(np.abs(direction), [1, 0, 0, 0], atol=1e-6)

    def test_calabi_unitary(self, calabi_sin, rng):
        H, est = _span(calabi_sin, rng)
        assert est.algebra_dim <= 4
        assert est.classification == "U(n)"
        # every generator commutes with J_+
        J = H.J(est.base_point)
        for G in est.generators:
            assert np.max(np.abs(G @ J - J @ G)) < 1e-6 * (1 + np.max(np.abs(G)))

    def test_warped_so3_with_fixed_vector(self, warped_sin, rng):
        H, est = _span(warped_sin, rng)
        assert est.algebra_dim == 3
        assert est.classification == "SO(2n-1)"
        fixed = common_fixed_vectors(est, H.chart.metric(est.base_point))
        direction = fixed[:, 0] / np.max(np.abs(fixed[:, 0]))
        npt.assert_allclose(np.abs(direction), [1, 0, 0, 0], atol=1e-6)

    def test_generators_metric_skew(self, hopf2, rng):
        """G^T M + M G = 0 at the base point for every generator."""
        H, est = _span(hopf2, rng)
        M = H.chart.metric(est.base_point)
        for G in est.generators:
            assert np.max(np.abs(G.T @ M + M @ G)) < 1e-8

    def test_too_few_probes_rejected(self, hopf2, rng):
        H = hopf2.main_structure
        base = H.chart.center()
        probes = default_probes(H.chart, base, rng, count=5)
        with pytest.raises(PreconditionError):
            curvature_span(H.chart, base, probes, n=2)


class TestLoopHolonomy:
    def test_euclidean_trivial(self, euclid4):
        chart = euclid4.charts["flat"]
        base = chart.center()
        est = loop_holonomy(chart, default_holonomy_loops(chart, base), base,
                            n=2, mode="analytic")
        assert est.algebra_dim == 0

    def test_sphere_latitude_so2(self):
        """Latitude loops at varied colatitudes span so(2): dim 1.

        The loops are contractible on the sphere; their coordinate shift is
        the periodic phi-wrap.  Colatitudes are chosen so the wrapped cone
        angle 2 pi cos(theta0) stays inside the logarithm safety window.
        """
        chart = zoo.round_s2_base(1.0, polar_margin=0.25).chart()
        base = np.array([math.pi / 2, math.pi])
        loops = [segment_loop(np.array([theta0, 0.0]),
                              np.array([0.0, 2.0 * math.pi]),
                              steps=300, label=f"lat_{theta0}")
                 for theta0 in (1.52, 1.57, 1.62, 0.32)]
        est = loop_holonomy(chart, loops, base, n=1, mode="analytic",
                            allow_shifted=True)
        assert est.algebra_dim == 1
        assert est.rank_gap >= 10

    def test_agreement_on_zoo(self, hopf2, calabi_sin, warped_sin, rng):
        for entry in (hopf2, calabi_sin, warped_sin):
            H = entry.holonomy_structure
            chart = H.chart
            base = chart.center()
            est_s = curvature_span(chart, base,
                                   default_probes(chart, base, rng),
                                   n=entry.n, J_candidates=[H.J_fn],
                                   mode="analytic")
            est_l = loop_holonomy(chart, default_holonomy_loops(chart, base),
                                  base, n=entry.n, J_candidates=[H.J_fn],
                                  mode="analytic")
            assert est_s.classification == est_l.classification, entry.label
            assert est_s.algebra_dim == est_l.algebra_dim, entry.label

    def test_large_loop_rejected(self):
        """A latitude whose wrapped rotation exceeds 0.5 must not be logged."""
        chart = zoo.round_s2_base(1.0, polar_margin=0.25).chart()
        theta0 = 1.0          # cone angle 2 pi cos(1) ~ 3.39: far from Id
        lat = segment_loop(np.array([theta0, 0.0]),
                           np.array([0.0, 2.0 * math.pi]), steps=300)
        with pytest.raises(LoopTooLargeError):
            loop_holonomy(chart, [lat], np.array([theta0, 0.1]), n=1,
                          mode="analytic", allow_shifted=True)

    def test_shifted_loop_rejected(self, hopf2):
        H = hopf2.main_structure
        with pytest.raises(PreconditionError):
            loop_holonomy(H.chart, [hopf2.loops["s1_generator"]],
                          H.chart.center(), n=2)


class TestClassifyAlgebra:
    def _so4_basis(self):
        basis = []
        for i in range(4):
            for j in range(i + 1, 4):
                B = np.zeros((4, 4))
                B[i, j] = 1.0
                B[j, i] = -1.0
                basis.append(B)
        return basis

    def test_full_dimension_is_generic(self):
        basis = self._so4_basis()
        assert classify_algebra(basis, 6, np.inf, n=2) == "SO(2n)"

    def test_stabilizer_is_so3(self):
        basis = [B for B in self._so4_basis() if not B[0].any()]
        assert classify_algebra(basis, 3, np.inf, n=2) == "SO(2n-1)"

    def test_unitary_detected(self):
        J = zoo._standard_j(4)
        # u(2) = span of skew matrices commuting with J
        basis = []
        for B in self._so4_basis():
            C = B - J @ B @ J      # project onto the J-commutant
            if np.max(np.abs(C)) > 1e-12:
                basis.append(C / np.max(np.abs(C)))
        assert classify_algebra(basis, 4, np.inf, n=2,
                                hat_J_candidates=[J]) == "U(n)"

    def test_ambiguous_rank_is_inconclusive(self):
        basis = self._so4_basis()
        assert classify_algebra(basis, 6, 5.0, n=2) == "inconclusive"

    def test_dim_zero(self):
        assert classify_algebra([], 0, np.inf, n=2) == "reducible/other"


class TestOrthonormalFrame:
    def test_skew_defect_on_non_diagonal_base_metric(self, calabi_sin, rng):
        """The g_+ base metric has off-diagonal entries: the frame map must
        send g-skew curvature endomorphisms to Euclidean-skew matrices."""
        H = calabi_sin.holonomy_structure
        chart = H.chart
        base = chart.center()
        base[0] = 1.0            # away from theta = pi/2: g_(phi,psi) != 0
        est = curvature_span(chart, base, default_probes(chart, base, rng),
                             n=2, J_candidates=[H.J_fn], mode="analytic")
        assert est.skew_defect < 1e-6
        M = chart.metric(base)
        assert np.max(np.abs(M - np.diag(np.diag(M)))) > 1e-3  # really non-diagonal
        for G in est.generators:
            assert np.max(np.abs(G.T @ M + M @ G)) < 1e-6
