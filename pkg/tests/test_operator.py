import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jtpencil.errors import TruncationExceeded
from jtpencil.measure import Measure
from jtpencil.operator import (apply_poly_at_e0, apply_polys_at_e0, associated_apply,
                               associated_images, build_associated_operator,
                               decompose_e0_u_basis, gram_matrix, power_e0_expansion,
                               spectral_function)
from jtpencil.pencil import (FiveDiagMatrix, JacobiMatrix, Pencil, associated_coefficients,
                             associated_polynomials)

from conftest import classical_pencil, example_pencil, pencils, random_jacobi, random_pencils


def dense_operator(theta, n):
    """A on e_0..e_{n-1} from A e0 and A (J3 e_k) = J5 e_k, solved as a dense system."""
    J3 = theta.J3.dense(n + 2)
    J5 = theta.J5.dense(n + 2)
    B = np.zeros((n, n))
    B[0, 0] = 1.0
    B[:, 1:] = J3[:n, : n - 1]
    rhs = np.zeros((n + 1, n))
    rhs[0, 0] = -theta.beta / theta.alpha
    rhs[1, 0] = 1 / theta.alpha
    rhs[:, 1:] = J5[: n + 1, : n - 1]
    return rhs @ np.linalg.inv(B)


class TestBuild:
    def test_classical_is_J3(self):
        for J in [JacobiMatrix.constant(1.0, 0.0), random_jacobi(np.random.default_rng(4), 30)]:
            F = build_associated_operator(classical_pencil(J), 14).values
            np.testing.assert_allclose(F, J.dense(16)[:, :15], atol=1e-12)

    def test_dense_oracle(self):
        for theta in random_pencils(10, seed=5):
            n = 10
            F = build_associated_operator(theta, n - 1).values
            np.testing.assert_allclose(F, dense_operator(theta, n), atol=1e-10)

    def test_column_zero(self):
        r2 = math.sqrt(2)
        theta = Pencil(JacobiMatrix.constant(1, 0), FiveDiagMatrix([0], [0], [1]), r2, r2)
        F = build_associated_operator(theta, 3)
        np.testing.assert_allclose(F.column(0), [-1.0, 1 / r2], atol=1e-15)

    def test_subdiagonal_positive(self):
        for theta in random_pencils(50, seed=6):
            F = build_associated_operator(theta, 15)
            assert F.structure_defects() == []

    def test_identity_A_J3_equals_J5(self):
        for theta in [example_pencil()] + random_pencils(10, seed=7):
            N = 12
            F = build_associated_operator(theta, N + 1).values
            J3 = theta.J3.dense(N + 3)
            J5 = theta.J5.dense(N + 3)
            for n in range(N):
                lhs = F[: n + 4, : n + 2] @ J3[: n + 2, n]
                assert np.max(np.abs(lhs - J5[: n + 4, n])) <= 1e-11 * max(1, np.abs(J5).max())

    def test_matches_defining_formula(self):
        theta = random_pencils(1, seed=8)[0]
        F = build_associated_operator(theta, 8).values
        for n in range(8):
            e = np.zeros(n + 1)
            e[n] = 1
            got = associated_apply(theta, e)
            np.testing.assert_allclose(got[: n + 2], F[: n + 2, n], atol=1e-11)
            assert np.all(np.abs(got[n + 2:]) < 1e-11)

    def test_exact_mode(self):
        F = build_associated_operator(example_pencil(), 5, exact=True)
        assert F.exact
        np.testing.assert_allclose(F.values, build_associated_operator(example_pencil(), 5).values,
                                   atol=1e-13)


class TestPolynomialCalculus:
    def test_pn_of_A_is_en_example_float(self):
        theta = example_pencil()
        N = 15
        A = build_associated_operator(theta, N + 1)
        for n, p in enumerate(associated_polynomials(theta, N)):
            assert np.linalg.norm(apply_poly_at_e0(A, p) - np.eye(n + 1)[n]) <= 1e-10

    def test_pn_of_A_is_en_exact(self):
        for theta in [example_pencil()] + random_pencils(20, seed=11):
            N = 15
            A = build_associated_operator(theta, N + 1, exact=True)
            for n, y in enumerate(associated_images(theta, A, N)):
                assert np.linalg.norm(y.astype(float) - np.eye(n + 1)[n]) <= 1e-10

    def test_horner_exact_coefficients(self):
        for theta in random_pencils(3, seed=13):
            N = 10
            A = build_associated_operator(theta, N + 1, exact=True)
            P = associated_coefficients(theta, N, exact=True)
            for n in range(N + 1):
                y = apply_poly_at_e0(A, P[n, : n + 1])
                assert list(y) == [0] * n + [1]

    def test_binary64_routes_are_close(self):
        """Float routes lose a few digits to the monomial basis; bound them loosely."""
        for theta in random_pencils(20, seed=11):
            N = 15
            A = build_associated_operator(theta, N + 1)
            for n, y in enumerate(associated_images(theta, A, N)):
                assert np.linalg.norm(y - np.eye(n + 1)[n]) <= 1e-7
            for n, p in enumerate(associated_polynomials(theta, N)):
                assert np.linalg.norm(apply_poly_at_e0(A, p) - np.eye(n + 1)[n]) <= 1e-7

    def test_batch_matches_single(self):
        theta = example_pencil(2.5, 1.5, 0.3, -1.0)
        A = build_associated_operator(theta, 9)
        P = associated_coefficients(theta, 8)
        for n, y in enumerate(apply_polys_at_e0(A, P)):
            np.testing.assert_allclose(y, apply_poly_at_e0(A, P[n, : n + 1]), atol=1e-10)

    def test_constant(self):
        A = build_associated_operator(example_pencil(), 3)
        assert apply_poly_at_e0(A, [1.0]).tolist() == [1.0]

    def test_lambda_classical(self):
        A = build_associated_operator(classical_pencil(JacobiMatrix.constant(1, 0)), 3)
        np.testing.assert_allclose(apply_poly_at_e0(A, [0.0, 1.0]), [0.0, 1.0], atol=1e-15)

    def test_truncation(self):
        A = build_associated_operator(example_pencil(), 3)
        with pytest.raises(TruncationExceeded):
            apply_poly_at_e0(A, np.ones(6))

    def test_power_expansion(self):
        theta = example_pencil(alpha=2.0, beta=0.5)
        A = build_associated_operator(theta, 6)
        assert power_e0_expansion(A, 0).tolist() == [1.0]
        np.testing.assert_allclose(power_e0_expansion(A, 1), [-0.25, 0.5])
        C = build_associated_operator(classical_pencil(JacobiMatrix.constant(1, 0)), 6)
        D = JacobiMatrix.constant(1, 0).dense(8)
        np.testing.assert_allclose(power_e0_expansion(C, 2), (D @ D)[:3, 0], atol=1e-14)
        np.testing.assert_allclose(power_e0_expansion(C, 2), [1, 0, 1], atol=1e-14)

    def test_leading_chain(self):
        for theta in random_pencils(10, seed=12):
            A = build_associated_operator(theta, 12)
            for n in range(12):
                assert power_e0_expansion(A, n)[n] > 0


class TestSpectralFunction:
    def test_example_orthonormality(self):
        theta = example_pencil(3.0, 1.0, 0.0, 1.0)
        A = build_associated_operator(theta, 14)
        G = gram_matrix(A, associated_polynomials(theta, 12))
        assert np.max(np.abs(G - np.eye(13))) <= 1e-8
        assert spectral_function(A, [1.0], [1.0]) == 1.0

    def test_classical_integral(self, rng):
        J = random_jacobi(rng, 30)
        theta = classical_pencil(J)
        A = build_associated_operator(theta, 12)
        x, w = Measure.jacobi_generated(J, 30).rule()
        for _ in range(30):
            u = rng.normal(size=rng.integers(1, 10)) + 1j * rng.normal(size=1)
            v = rng.normal(size=rng.integers(1, 10))
            direct = np.dot(w, np.polyval(u[::-1], x) * np.conj(np.polyval(v[::-1], x)))
            assert abs(spectral_function(A, u, v) - direct) <= 1e-9 * max(1, abs(direct))

    @given(pencils(), st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False,
                                                  allow_infinity=False), min_size=1, max_size=8),
           st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False,
                                       allow_infinity=False), min_size=1, max_size=8))
    @settings(max_examples=40, deadline=None)
    def test_hermitian_and_positive(self, theta, u, v):
        A = build_associated_operator(theta, 10)
        suv = spectral_function(A, u, v)
        svu = spectral_function(A, v, u)
        assert abs(suv - np.conj(svu)) <= 1e-12 * max(1, abs(suv))
        assert spectral_function(A, u, u).real >= -1e-12
        assert abs(spectral_function(A, u, u).imag) <= 1e-12 * max(1, abs(spectral_function(A, u, u)))

    def test_conjugate_linear_in_v(self):
        A = build_associated_operator(example_pencil(), 6)
        u, v = [1.0, 2.0], [0.5, -1.0, 0.3]
        assert spectral_function(A, u, np.multiply(1j, v)) == pytest.approx(
            -1j * spectral_function(A, u, v))


class TestDecompose:
    def test_basis_element(self):
        J = random_jacobi(np.random.default_rng(1), 8)
        zeta, xi = decompose_e0_u_basis(J, J.dense(6)[:5, 3])
        assert abs(zeta) < 1e-14
        np.testing.assert_allclose(xi, [0, 0, 0, 1], atol=1e-14)

    def test_e0(self):
        zeta, xi = decompose_e0_u_basis(JacobiMatrix.constant(1, 0), [1.0])
        assert zeta == 1 and len(xi) == 0

    def test_e2_chebyshev(self):
        zeta, xi = decompose_e0_u_basis(JacobiMatrix.constant(1, 0), [0, 0, 1.0])
        assert zeta == pytest.approx(-1)
        np.testing.assert_allclose(xi, [0, 1])

    def test_reconstruction(self, rng):
        J = random_jacobi(rng, 12)
        f = rng.normal(size=9) + 1j * rng.normal(size=9)
        zeta, xi = decompose_e0_u_basis(J, f)
        U = J.dense(11)
        back = zeta * np.eye(11)[0] + U[:, : len(xi)] @ xi
        assert np.linalg.norm(back[:9] - f) <= 1e-12 * np.linalg.norm(f) * 10
        assert np.all(np.abs(back[9:]) < 1e-12)
