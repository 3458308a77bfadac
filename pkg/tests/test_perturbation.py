import math

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings, strategies as st

from jtpencil.errors import (ContourNotConverged, InvalidParameter, SeriesDivergent,
                             SupportBoundViolated, TruncationExceeded)
from jtpencil.inverse import model_representation
from jtpencil.measure import Measure, recurrence_coefficients
from jtpencil.operator import build_associated_operator, spectral_function
from jtpencil.pencil import JacobiMatrix, associated_polynomials
from jtpencil.perturbation import (ContourSpec, ahat_apply, build_special, empirical_norm_ratio,
                                   horner_ahat, moment_certificate, norm_bound,
                                   power_iteration_radius, resolvent_e0, resolvent_residual,
                                   riesz_apply, riesz_apply_logged, s_of_z, shift,
                                   spectral_function_special)

from conftest import special_example, special_semicircle

KAPPAS = [5, 6, 10]


def semicircle_integral(f, center, scale):
    """int f dsigma for the semicircle on [center - 2 scale, center + 2 scale] (x = c + 2s cos t)."""
    t, w = np.polynomial.legendre.leggauss(200)
    t = (t + 1) * math.pi / 2
    vals = np.array([f(center + 2 * scale * math.cos(tk)) for tk in t])
    return complex(np.sum(w * vals * np.sin(t) ** 2))


def ahat_matrix(sp, K):
    return np.column_stack([ahat_apply(sp, np.eye(K)[j][: K - 1], K) for j in range(K - 1)])


class TestConstruction:
    @pytest.mark.parametrize("kappa", KAPPAS)
    def test_example_parameters(self, kappa):
        sp, theta = special_example(kappa)
        assert sp.c_support == pytest.approx((2 + 2 * math.sqrt(2)) / kappa, rel=1e-14)
        assert sp.alpha == pytest.approx(math.sqrt(2), rel=1e-14)
        assert sp.beta == pytest.approx(math.sqrt(2), rel=1e-14)
        assert theta.alpha == sp.alpha and theta.beta == sp.beta

    def test_five_bands(self):
        sp, theta = special_example(5)
        J3 = sp.base.dense(8)
        want = sp.a * (sp.base.dense(10) @ sp.base.dense(10))[:8, :8] + sp.b * J3
        want[0, 0] += sp.d
        np.testing.assert_allclose(theta.J5.dense(8), want, atol=1e-14)

    def test_d_zero_is_polynomial_in_J3(self):
        J3 = JacobiMatrix.constant(0.3, 0.0)
        sp, theta = build_special(J3, Measure.chebyshev_u(0.0, 0.3), 1.5, -0.2, 0.0, 12)
        A = build_associated_operator(theta, 8).data
        want = 1.5 * J3.dense(10) - 0.2 * np.eye(10)
        np.testing.assert_allclose(A[:9, :9], want[:9, :9], atol=1e-13)

    def test_moment_certificate(self):
        sp, _ = special_example(5)
        assert np.all(moment_certificate(sp.measure, sp.c_support, 60) <= 1e-14)

    def test_support_bound_violations(self):
        J3 = JacobiMatrix.constant(math.sqrt(2) / 5, 2 / 5)
        m = Measure.chebyshev_u(2 / 5, math.sqrt(2) / 5)
        with pytest.raises(SupportBoundViolated):
            build_special(J3, m, 2.5, -2.0, 0.2, 10, c_support=0.5)
        J4 = JacobiMatrix.constant(math.sqrt(2) / 4, 2 / 4)
        with pytest.raises(SupportBoundViolated):
            build_special(J4, Measure.chebyshev_u(0.5, math.sqrt(2) / 4), 2.0, -2.0, 0.25, 10)

    def test_nonpositive_a(self):
        J3 = JacobiMatrix.constant(0.3, 0.0)
        with pytest.raises(InvalidParameter):
            build_special(J3, Measure.chebyshev_u(0.0, 0.3), 0.0, 0.0, 0.1, 10)


class TestAhat:
    def test_examples(self):
        sp, _ = special_semicircle()
        np.testing.assert_allclose(ahat_apply(sp, [1.0], 4), [sp.b, sp.a, 0, 0])
        s0 = sp.moments(0)[0]
        np.testing.assert_allclose(ahat_apply(sp, [0.0, 1.0], 4), [sp.d * s0, sp.b, sp.a, 0])

    def test_truncation(self):
        sp, _ = special_semicircle()
        with pytest.raises(TruncationExceeded):
            ahat_apply(sp, [0.0, 0.0, 1.0], 3)
        with pytest.raises(TruncationExceeded):
            ahat_apply(sp, np.ones(5), 4)

    @pytest.mark.parametrize("fixture", [lambda: special_example(5), lambda: special_example(10),
                                         special_semicircle])
    def test_matches_model_operator(self, fixture):
        sp, theta = fixture()
        xi = np.asarray(model_representation(theta, sp.measure, 10).xi.values, dtype=float)
        np.testing.assert_allclose(xi, ahat_matrix(sp, xi.shape[0])[:, : xi.shape[1]],
                                   atol=1e-13)

    def test_coordinate_identity(self, rng):
        """A[q] = (ax + b) q + d int (q(x) - q(0)) / x dsigma, checked for random q."""
        sp, _ = special_semicircle()
        x, w = sp.measure.rule(20)
        P = np.polynomial.polynomial
        for _ in range(30):
            q = rng.normal(size=rng.integers(1, 10))
            got = ahat_apply(sp, q, len(q) + 1)
            want = P.polyadd(P.polymul([sp.b, sp.a], q), [0.0])
            dq = np.dot(w, P.polyval(x, q[1:])) if len(q) > 1 else 0.0
            want = np.pad(want, (0, len(q) + 1 - len(want)))
            want[0] += sp.d * dq
            np.testing.assert_allclose(got, want, atol=1e-13)

    def test_shift_isometry(self, rng):
        for _ in range(20):
            w = np.append(rng.normal(size=9), 0.0)
            assert np.linalg.norm(shift(w, 10)) == pytest.approx(np.linalg.norm(w), rel=1e-15)


class TestNormBound:
    @pytest.mark.parametrize("kappa", KAPPAS)
    def test_upper_bound_dominates_partial_sums(self, kappa):
        sp, _ = special_example(kappa)
        s = sp.moments(199)
        assert math.sqrt(np.sum(s ** 2)) <= sp.norm_upper
        assert sp.norm_upper == pytest.approx(1 / math.sqrt(1 - sp.c_support ** 2), rel=1e-11)

    @pytest.mark.parametrize("kappa", KAPPAS)
    def test_empirical(self, kappa, rng):
        sp, _ = special_example(kappa)
        bound = norm_bound(sp)
        assert empirical_norm_ratio(sp, 40, 100, rng) <= bound
        assert power_iteration_radius(sp, 40) <= bound


class TestSeries:
    def test_leading_term(self):
        """The k = 0 term vanishes (s_{-1} = 0), so s(z) = -q^2 (1 + O(q c))."""
        sp, _ = special_semicircle()
        for z in [5.0, 50.0, 500.0j]:
            q = sp.a / (z - sp.b)
            r = abs(q) * sp.c_support
            assert abs(s_of_z(sp, z) / -(q ** 2) - 1) <= r / (1 - r)

    def test_real_on_real_axis(self):
        sp, _ = special_example(5)
        for z in [4.0, 7.5, -9.0]:
            assert abs(s_of_z(sp, z).imag) == 0.0

    @pytest.mark.parametrize("kappa", KAPPAS)
    def test_against_quadrature(self, kappa):
        sp, _ = special_example(kappa)
        rho = norm_bound(sp)
        for z in [2 * rho, 2j * rho, -2 * rho + 0.5j]:
            q = sp.a / (z - sp.b)
            want = -(q ** 2) * semicircle_integral(lambda x: 1 / (1 - q * x),
                                                   2 / kappa, math.sqrt(2) / kappa)
            assert abs(s_of_z(sp, z) - want) <= 1e-12 * max(1.0, abs(want))

    def test_divergent(self):
        sp, _ = special_semicircle()
        with pytest.raises(SeriesDivergent):
            s_of_z(sp, sp.b + 0.5 * sp.a)
        with pytest.raises(SeriesDivergent):
            resolvent_e0(sp, sp.b, 8)


class TestResolvent:
    def test_d_zero_against_dense_solve(self):
        J3 = JacobiMatrix.constant(0.3, 0.0)
        sp, _ = build_special(J3, Measure.chebyshev_u(0.0, 0.3), 1.0, 0.5, 0.0, 12)
        K = 30
        for z in [3.0, 2.0 + 2.0j, -4.0j]:
            L = ahat_matrix(sp, K + 1)[:K, :K] - z * np.eye(K)
            want = sla.solve_triangular(L, np.eye(K)[0], lower=True)
            np.testing.assert_allclose(resolvent_e0(sp, z, K), want, atol=1e-14)

    @pytest.mark.parametrize("kappa", KAPPAS)
    def test_residual(self, kappa):
        sp, _ = special_example(kappa)
        rho = 1.25 * norm_bound(sp)
        for t in np.linspace(0, 2 * np.pi, 20, endpoint=False):
            assert resolvent_residual(sp, rho * np.exp(1j * t), 60) <= 1e-10

    def test_long_window_oracle(self):
        sp, _ = special_example(6)
        z = 1.25 * norm_bound(sp) * np.exp(0.7j)
        f = resolvent_e0(sp, z, 300)
        r = ahat_apply(sp, f[:299], 300) - z * f
        r[0] -= 1.0
        assert np.linalg.norm(r[:60]) <= 1e-12

    def test_tau_identity(self):
        sp, _ = special_semicircle()
        z = 3.0 + 1.0j
        f = resolvent_e0(sp, z, 200)
        fs = np.dot(f[1:], sp.moments(198))
        assert f[0] * (sp.b - z) == pytest.approx(1 - sp.d * fs, abs=1e-14)


class TestRiesz:
    def test_constant(self):
        sp, _ = special_example(5)
        v = riesz_apply(sp, [1.0], ContourSpec.default(sp, 16), 6)
        np.testing.assert_allclose(v, np.eye(6)[0], atol=1e-9)

    def test_identity_poly(self):
        sp, _ = special_example(5)
        v = riesz_apply(sp, [0.0, 1.0], ContourSpec.default(sp, 16), 6)
        np.testing.assert_allclose(v, [sp.b, sp.a, 0, 0, 0, 0], atol=1e-8)

    @pytest.mark.parametrize("kappa", KAPPAS)
    def test_associated_polynomials_give_orthonormal_coefficients(self, kappa):
        sp, theta = special_example(kappa)
        R = recurrence_coefficients(sp.base.a_band(10), sp.base.b_band(11), 10)
        P = associated_polynomials(theta, 8)
        contour = ContourSpec.default(sp, 16)
        for n in range(9):
            np.testing.assert_allclose(horner_ahat(sp, P[n], 12)[: n + 1], R[n, : n + 1],
                                       atol=1e-9 * max(1.0, np.abs(R[n]).max()))
            got = riesz_apply(sp, P[n], contour, 12)
            want = np.pad(R[n, : n + 1], (0, 12 - n - 1))
            assert np.linalg.norm(got - want) <= 1e-7 * max(1.0, np.linalg.norm(want))

    @given(st.lists(st.floats(-1, 1), min_size=1, max_size=7))
    @settings(max_examples=20, deadline=None)
    def test_matches_horner(self, coeffs):
        sp, _ = special_semicircle()
        h = horner_ahat(sp, coeffs)
        r = riesz_apply(sp, coeffs, ContourSpec.default(sp, 16))
        assert np.linalg.norm(r - h) <= 1e-7 * max(1.0, np.linalg.norm(h))

    def test_log_decays(self):
        sp, _ = special_example(6)
        res = riesz_apply_logged(sp, np.arange(1.0, 8.0), ContourSpec.default(sp, 16))
        deltas = [d for _, d in res.log]
        assert deltas[-1] < deltas[0]
        assert res.nodes == res.log[-1][0]

    def test_not_converged(self):
        sp, _ = special_example(10)
        with pytest.raises(ContourNotConverged):
            riesz_apply(sp, np.ones(11), ContourSpec.default(sp, 16), tol=1e-30, max_nodes=64)

    def test_contour_validation(self):
        sp, _ = special_example(5)
        with pytest.raises(InvalidParameter):
            ContourSpec(1.0, 100)
        with pytest.raises(InvalidParameter):
            riesz_apply(sp, [1.0], ContourSpec(0.5 * norm_bound(sp), 16))


class TestSpectralFunction:
    def test_orthonormality(self):
        sp, theta = special_example(5)
        P = associated_polynomials(theta, 5)
        contour = ContourSpec.default(sp, 16)
        for n in range(6):
            for m in range(6):
                got = spectral_function_special(sp, P[n], P[m], contour)
                assert abs(got - (n == m)) <= 1e-7

    def test_agrees_with_generic_route(self, rng):
        sp, theta = special_semicircle()
        A = build_associated_operator(theta, 10)
        contour = ContourSpec.default(sp, 16)
        for _ in range(5):
            u, v = rng.normal(size=5), rng.normal(size=4)
            want = spectral_function(A, u, v)
            got = spectral_function_special(sp, u, v, contour)
            assert abs(got - want) <= 1e-8 * max(1.0, abs(want))
