import math

import numpy as np
import pytest
from hypothesis import strategies as st

from jtpencil.measure import Measure
from jtpencil.pencil import FiveDiagMatrix, JacobiMatrix, Pencil, square_jacobi
from jtpencil.perturbation import build_special

BANDS = 24


def example_pencil(c=3.0, alpha=1.0, beta=0.0, alpha0=1.0):
    """a_n = 1, b_n = c; J5 is zero except alpha_0 in the corner and gamma_n = 1."""
    return Pencil(JacobiMatrix.constant(1.0, c),
                  FiveDiagMatrix((alpha0, 0.0), (0.0,), (1.0,)), alpha, beta)


def classical_pencil(J3: JacobiMatrix, N: int = 40) -> Pencil:
    a0, b0 = J3.a_band(1)[0], J3.b_band(1)[0]
    return Pencil(J3, square_jacobi(J3, N), 1.0 / a0, -b0 / a0)


def random_jacobi(rng, n=BANDS) -> JacobiMatrix:
    return JacobiMatrix(rng.uniform(0.5, 2.0, n), rng.uniform(-1.0, 1.0, n + 1))


def random_pencil(rng, n=BANDS) -> Pencil:
    J5 = FiveDiagMatrix(rng.uniform(-1, 1, n), rng.uniform(-1, 1, n), rng.uniform(0.5, 2.0, n))
    return Pencil(random_jacobi(rng, n), J5, rng.uniform(0.5, 2.0), rng.uniform(-1.0, 1.0))


def random_pencils(count, seed=0):
    rng = np.random.default_rng(seed)
    return [random_pencil(rng) for _ in range(count)]


def jacobi_measure(J3: JacobiMatrix, order=40) -> Measure:
    return Measure.jacobi_generated(J3, order)


def special_example(kappa, N=20):
    """Scaled pencil with a_k = sqrt2/kappa, b_k = 2/kappa; its measure is a semicircle."""
    J3 = JacobiMatrix.constant(math.sqrt(2) / kappa, 2 / kappa)
    m = Measure.chebyshev_u(2 / kappa, math.sqrt(2) / kappa)
    return build_special(J3, m, kappa / 2, -2.0, 1 / kappa, N)


def special_semicircle(N=20):
    """A mildly perturbed semicircle on [-0.6, 0.6]."""
    J3 = JacobiMatrix.constant(0.3, 0.0)
    return build_special(J3, Measure.chebyshev_u(0.0, 0.3), 1.0, 0.5, 0.5, N)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pencils():
    """Hypothesis strategy for valid pencils with bounded bands."""
    n = 16
    pos = st.floats(0.5, 2.0)
    real = st.floats(-1.0, 1.0)
    return st.builds(
        lambda a, b, al, be, g, alpha, beta: Pencil(
            JacobiMatrix(a, b), FiveDiagMatrix(al, be, g), alpha, beta),
        st.lists(pos, min_size=n, max_size=n), st.lists(real, min_size=n + 1, max_size=n + 1),
        st.lists(real, min_size=n, max_size=n), st.lists(real, min_size=n, max_size=n),
        st.lists(pos, min_size=n, max_size=n), pos, real)


# acceptance results, printed once at the end of the session
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if passed else 'FAIL'}  {detail}")
