"""Model representation of the associated operator in L^2_sigma and the
reconstruction of a pencil from (sigma, model operator).

The model operator is handled in the monomial basis: column k of ``xi``
holds the coefficients of the image of x^k.  Changing between monomials
and the orthonormal basis r_n is catastrophically ill-conditioned in
floating point once the support of sigma sits away from the origin, so all
basis changes here run in exact rational arithmetic on the (exactly
representable) binary64 inputs; results are rounded once at the end.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (DegreeBudgetExceeded, GammaNotPositive, InvalidParameter,
                     MeasureDegenerate, MeasureMismatch, NotFiveDiagonal,
                     TruncationExceeded)
from .measure import (Measure, hankel, jacobi_from_measure, moments,
                      orthonormal_values, recurrence_coefficients)
from .operator import MONOMIAL, OperatorMatrix, as_coeffs, build_associated_operator
from .pencil import FiveDiagMatrix, JacobiMatrix, Pencil

MATCH_TOL = 1e-8
SYMMETRY_TOL = 1e-9
BAND_TOL = 1e-9
POSITIVITY_FLOOR = 1e-12

_ZERO = Fraction(0)


def _frac_array(values) -> np.ndarray:
    return np.array([Fraction(float(v)) for v in np.ravel(values)],
                    dtype=object).reshape(np.shape(values))


def _inverse_upper(U: np.ndarray) -> np.ndarray:
    """Exact inverse of an upper-triangular matrix of Fractions."""
    n = U.shape[0]
    X = np.full((n, n), _ZERO, dtype=object)
    for col in range(n):
        X[col, col] = 1 / U[col, col]
        for i in range(col - 1, -1, -1):
            s = sum((U[i, k] * X[k, col] for k in range(i + 1, col + 1)), _ZERO)
            X[i, col] = -s / U[i, i]
    return X


def _eval_exact(coeffs: np.ndarray, x) -> np.ndarray:
    """Values of an exact-coefficient polynomial at float nodes, rounded once."""
    out = np.empty(len(x))
    for j, xj in enumerate(x):
        xf = Fraction(float(xj))
        acc = _ZERO
        for c in coeffs[::-1]:
            acc = acc * xf + c
        out[j] = float(acc)
    return out


@dataclass(frozen=True, eq=False)
class ModelOperator:
    """Monomial-basis matrix of the model operator together with its measure."""

    xi: OperatorMatrix
    measure: Measure

    @classmethod
    def from_columns(cls, columns, measure: Measure) -> "ModelOperator":
        """Build from ``columns[k] = [xi_{k,0}, ..., xi_{k,k+1}]``."""
        K = len(columns)
        data = np.full((K + 1, K), _ZERO, dtype=object)
        for k, col in enumerate(columns):
            if len(col) != k + 2:
                raise InvalidParameter(f"column {k} must have {k + 2} entries",
                                       pointer=f"/columns/{k}")
            data[: k + 2, k] = _frac_array(col)
        return cls(OperatorMatrix(data, MONOMIAL), measure)

    @property
    def size(self) -> int:
        return self.xi.size

    def columns(self) -> list[list[float]]:
        vals = self.xi.values
        return [list(vals[: k + 2, k]) for k in range(self.size)]


def _check_measure_matches(J3: JacobiMatrix, m: Measure, n: int):
    J = jacobi_from_measure(m, n)
    a_ref, b_ref = J3.a_band(n), J3.b_band(n)
    da = np.abs(np.asarray(J.a[:n]) - a_ref)
    db = np.abs(np.asarray(J.b[:n]) - b_ref)
    tol_a = MATCH_TOL * (1 + np.abs(a_ref))
    tol_b = MATCH_TOL * (1 + np.abs(b_ref))
    if np.any(da > tol_a) or np.any(db > tol_b):
        k = int(np.argmax(np.maximum(da - tol_a, db - tol_b)))
        raise MeasureMismatch(
            f"measure recurrence differs from J3 at index {k} "
            f"(|da|={da[k]:.2e}, |db|={db[k]:.2e})", index=k)


def model_representation(theta: Pencil, m: Measure, N: int) -> ModelOperator:
    """Monomial matrix of U A U^{-1} for x^0, ..., x^{N+1}."""
    if N < 0:
        raise InvalidParameter("N must be non-negative")
    _check_measure_matches(theta.J3, m, N + 2)
    K = N + 2
    eta = recurrence_coefficients(theta.J3.a_band(K), theta.J3.b_band(K), K, exact=True)
    F = build_associated_operator(theta, K - 1, exact=True).data
    to_r = _inverse_upper(eta[:K, :K].T)
    xi = eta.T.dot(F).dot(to_r)
    return ModelOperator(OperatorMatrix(xi, MONOMIAL), m)


def _poly_in_r_basis(J: JacobiMatrix, n: int):
    eta = recurrence_coefficients(J.a_band(n), J.b_band(n), n, exact=True)
    return eta, _inverse_upper(eta.T)


def model_gram(op: ModelOperator, N: int, J: JacobiMatrix | None = None) -> np.ndarray:
    """Exact T[m, n] = <A Lambda_0 r_n, r_m>_sigma for m, n <= N, rounded to float.

    Column n of the full product is returned up to index N + 2 so callers can
    inspect the band structure; the result has shape (N + 3, N + 1).
    """
    if N + 2 > op.size:
        raise TruncationExceeded(f"Gram of size {N} needs {N + 2} operator columns")
    if J is None:
        J = jacobi_from_measure(op.measure, N + 2)
    eta, to_r = _poly_in_r_basis(J, N + 2)
    xi = op.xi.data
    T = np.zeros((N + 3, N + 1))
    for n in range(N + 1):
        shifted = np.full(n + 2, _ZERO, dtype=object)
        shifted[1:] = eta[n, : n + 1]
        q = xi[: n + 3, : n + 2].dot(shifted)
        coords = to_r[: n + 3, : n + 3].dot(q)
        T[: n + 3, n] = [float(c) for c in coords]
    return T


def model_gram_direct(op: ModelOperator, N: int) -> np.ndarray:
    """Same Gram matrix by Gauss quadrature against the measure (float route)."""
    J = jacobi_from_measure(op.measure, N + 2)
    eta, _ = _poly_in_r_basis(J, N + 2)
    x, w = op.measure.rule(N + 3)
    R = orthonormal_values(J, x, N + 2)
    xi = op.xi.data
    T = np.zeros((N + 3, N + 1))
    for n in range(N + 1):
        shifted = np.full(n + 2, _ZERO, dtype=object)
        shifted[1:] = eta[n, : n + 1]
        vals = _eval_exact(xi[: n + 3, : n + 2].dot(shifted), x)
        T[:, n] = R @ (w * vals)
    return T


@dataclass
class Condition:
    passed: bool
    witnesses: list = field(default_factory=list)
    detail: str = ""


@dataclass
class AdmissibilityReport:
    conditions: dict

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions.values())

    def to_dict(self) -> dict:
        return {"passed": self.passed,
                "conditions": {k: {"passed": c.passed, "witnesses": c.witnesses,
                                   "detail": c.detail}
                               for k, c in self.conditions.items()}}


def check_admissibility(op: ModelOperator, N: int) -> AdmissibilityReport:
    """Conditions (i) domain, (ii) positive leading entries, (iii) symmetry of A Lambda_0."""
    conds = {"i": Condition(True, [], "operator is defined on every polynomial")}
    bad = []
    data = op.xi.data
    for k in range(min(N + 2, op.size)):
        col = data[:, k]
        if not col[k + 1] > 0 or any(c != 0 for c in col[k + 2:]):
            bad.append(k)
    conds["ii"] = Condition(not bad, bad,
                            "xi_{k,k+1} > 0" if not bad else f"fails at k={bad}")
    if bad:
        conds["iii"] = Condition(False, [], "not checked: (ii) fails")
        return AdmissibilityReport(conds)
    T = model_gram(op, N)[: N + 1]
    scale = max(np.max(np.abs(T)), 1.0)
    D = np.abs(T - T.T)
    defect = float(np.max(D))
    if defect <= SYMMETRY_TOL * scale:
        conds["iii"] = Condition(True, [], f"max asymmetry {defect:.3e}")
    else:
        m, n = np.unravel_index(int(np.argmax(D)), D.shape)
        conds["iii"] = Condition(False, [[int(m), int(n)]],
                                 f"max asymmetry {defect:.3e} at ({m},{n})")
    return AdmissibilityReport(conds)


def reconstruct_pencil(op: ModelOperator, N: int) -> Pencil:
    """Pencil (J3, J5, alpha, beta) whose model operator is ``op``; bands up to index N."""
    budget = op.measure.degree_budget
    if budget is not None and N > budget - 2:
        raise DegreeBudgetExceeded(f"N={N} exceeds budget-2={budget - 2}")
    report = check_admissibility(op, N)
    if not report.passed:
        raise InvalidParameter("operator is not admissible", report=report.to_dict())
    J = jacobi_from_measure(op.measure, N + 2)
    mt = moments(op.measure, 2)
    delta1 = hankel(mt, 1)
    xi00, xi01 = float(op.xi.data[0, 0]), float(op.xi.data[1, 0])
    root = xi01 * np.sqrt(delta1)
    alpha = 1.0 / root
    beta = -(xi01 * mt[1] + xi00) / root

    T = model_gram(op, N, J)
    G = T[: N + 1]
    scale = max(np.max(np.abs(G)), 1.0)
    for n in range(N + 1):
        for m in range(n + 3, N + 3):
            if abs(T[m, n]) > BAND_TOL * scale:
                raise NotFiveDiagonal(f"g_({m},{n}) = {T[m, n]:.3e}", index=[m, n])
    gamma = 0.5 * (np.diag(G, 2) + np.diag(G, -2))
    if np.any(gamma <= 0):
        k = int(np.argmax(gamma <= 0))
        raise GammaNotPositive(f"g_({k + 2},{k}) = {gamma[k]}", index=k)
    J5 = FiveDiagMatrix(np.diag(G), 0.5 * (np.diag(G, 1) + np.diag(G, -1)), gamma, "none")
    J3 = JacobiMatrix(J.a[:N], J.b[: N + 1], "none")
    return Pencil(J3, J5, alpha, beta)


def _split_exact(u):
    c = as_coeffs(u)
    if np.iscomplexobj(c):
        return _frac_array(c.real), _frac_array(c.imag)
    return _frac_array(c), None


def _horner_model(op: ModelOperator, c: np.ndarray) -> np.ndarray:
    deg = len(c) - 1
    if deg > op.size:
        raise TruncationExceeded(f"degree {deg} exceeds {op.size} operator columns")
    y = np.array([c[-1]], dtype=object)
    for ck in c[-2::-1]:
        y = op.xi.data[: len(y) + 1, : len(y)].dot(y)
        y[0] += ck
    return y


def model_polynomial(op: ModelOperator, u):
    """Monomial coefficients of u(A)[1] as (real part, imaginary part or None), exact."""
    re, im = _split_exact(u)
    return _horner_model(op, re), (None if im is None else _horner_model(op, im))


def integral_spectral_function(op: ModelOperator, u, v) -> complex:
    """S(u, v) = int u(A)(1) conj(v(A)(1)) dsigma by Gauss quadrature."""
    cu, cv = as_coeffs(u), as_coeffs(v)
    du, dv = len(cu) - 1, len(cv) - 1
    budget = op.measure.degree_budget
    if budget is not None and max(du, dv) > budget:
        raise DegreeBudgetExceeded(f"degree {max(du, dv)} exceeds budget {budget}")
    x, w = op.measure.rule((du + dv) // 2 + 1)

    def values(c):
        re, im = model_polynomial(op, c)
        out = _eval_exact(re, x).astype(complex)
        if im is not None:
            out += 1j * _eval_exact(im, x)
        return out

    fu = values(cu)
    fv = fu if (du == dv and np.array_equal(cu, cv)) else values(cv)
    val = complex(np.dot(w, fu * np.conj(fv)))
    if fv is fu and np.any(cu != 0) and val.real <= POSITIVITY_FLOOR:
        raise MeasureDegenerate(f"S(u,u) = {val.real:.3e} for a nonzero u")
    return val


def monic_expansion_check(op: ModelOperator, n: int) -> np.ndarray:
    """Coefficients a_{n,j} of A^n[1]; the leading one is checked positive."""
    if n > op.size:
        raise TruncationExceeded(f"A^{n}[1] needs {n} operator columns, have {op.size}")
    y = np.array([Fraction(1)], dtype=object)
    for _ in range(n):
        y = op.xi.data[: len(y) + 1, : len(y)].dot(y)
    if not y[n] > 0:
        raise InvalidParameter(f"a_({n},{n}) is not positive", index=n)
    return y.astype(float)
