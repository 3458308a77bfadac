"""Orthogonality measures, their moments and Hankel determinants, Gauss
rules, and the orthonormal polynomials r_n with their Jacobi coefficients.

Three kinds of probability measure are supported:

* ``atoms`` -- finitely many weighted points (weights are normalised),
* ``jacobi`` -- the Gauss rule of a given order built from a Jacobi matrix,
* ``chebyshev_u`` -- the semicircle weight sqrt(1 - ((x - c)/(2 s))^2) / (pi s)
  on [c - 2s, c + 2s], whose Jacobi coefficients are a_k = s, b_k = c.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from numpy.polynomial import Polynomial
from scipy.linalg import eigh_tridiagonal

from .errors import (DegreeBudgetExceeded, InvalidParameter, MeasureDegenerate,
                     NumericalFailure)
from .pencil import JacobiMatrix

A_FLOOR = 1e-13


@dataclass(frozen=True)
class Measure:
    kind: str
    nodes: tuple = ()
    weights: tuple = ()
    jacobi: JacobiMatrix | None = None
    order: int = 0
    center: float = 0.0
    scale: float = 1.0
    normalization: float = field(default=1.0, compare=False)

    @classmethod
    def atoms(cls, points) -> "Measure":
        """Discrete measure from (node, weight) pairs; weights are rescaled to sum 1."""
        pts = sorted((float(x), float(w)) for x, w in points)
        if not pts:
            raise InvalidParameter("atoms measure needs at least one point")
        x = np.array([p[0] for p in pts])
        w = np.array([p[1] for p in pts])
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(w)):
            raise InvalidParameter("non-finite atom")
        if np.any(w <= 0):
            raise InvalidParameter("atom weights must be positive",
                                   index=int(np.argmax(w <= 0)))
        if np.any(np.diff(x) == 0):
            raise InvalidParameter("atom nodes must be distinct")
        total = math.fsum(w)
        return cls("atoms", tuple(x), tuple(w / total), normalization=total)

    @classmethod
    def jacobi_generated(cls, J3: JacobiMatrix, order: int) -> "Measure":
        """Gauss rule of the given order for the measure of ``J3``."""
        if order < 1:
            raise InvalidParameter("quadrature order must be positive", order=order)
        J3.b_band(order)
        return cls("jacobi", jacobi=J3, order=int(order))

    @classmethod
    def chebyshev_u(cls, center: float, scale: float = 1.0) -> "Measure":
        if not scale > 0:
            raise InvalidParameter("scale must be positive", scale=scale)
        return cls("chebyshev_u", center=float(center), scale=float(scale))

    @property
    def size(self) -> int | None:
        """Number of atoms of a discrete measure (None for a density)."""
        if self.kind == "atoms":
            return len(self.nodes)
        if self.kind == "jacobi":
            return self.order
        return None

    @property
    def degree_budget(self) -> int | None:
        """Largest degree for which inner products are exact; None means unbounded."""
        return None if self.size is None else self.size - 1

    def support_radius(self) -> float:
        """An upper bound for max |x| over the support."""
        if self.kind == "atoms":
            return float(np.max(np.abs(self.nodes)))
        if self.kind == "chebyshev_u":
            return abs(self.center) + 2.0 * self.scale
        # Gershgorin bound for the spectrum of J3
        n = max(len(self.jacobi.a), len(self.jacobi.b), self.order) + 1
        if self.jacobi.tail == "none":
            n = min(n, len(self.jacobi.b))
        a = np.concatenate([[0.0], np.abs(self.jacobi.a_band(n - 1)), [0.0]])
        b = np.abs(self.jacobi.b_band(n))
        return float(np.max(b + a[:-1] + a[1:]))

    def rule(self, n: int | None = None):
        """(nodes, weights) of an n-point Gauss rule; discrete measures return themselves."""
        if self.kind == "atoms":
            return np.asarray(self.nodes), np.asarray(self.weights)
        if self.kind == "jacobi":
            return _golub_welsch(self.jacobi.a_band(self.order - 1),
                                 self.jacobi.b_band(self.order))
        if n is None or n < 1:
            raise InvalidParameter("rule order required for a density")
        return _golub_welsch(np.full(n - 1, self.scale), np.full(n, self.center), polish=True)


def _golub_welsch(a, b, polish: bool = False):
    return _golub_welsch_cached(tuple(np.asarray(a, dtype=float)),
                                tuple(np.asarray(b, dtype=float)), polish)


@lru_cache(maxsize=256)
def _golub_welsch_cached(a: tuple, b: tuple, polish: bool):
    try:
        if len(b) == 1:
            x, V = np.array(b), np.ones((1, 1))
        else:
            x, V = eigh_tridiagonal(np.array(b), np.array(a))
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalFailure(f"Golub-Welsch eigensolve failed: {exc}") from exc
    w = V[0] ** 2
    if polish and len(b) > 1:
        x, w = _newton_polish(np.asarray(a), np.asarray(b), x, w)
    w = w / w.sum()
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _newton_polish(a, b, x, w, steps=2):
    """Refine eigenvalue nodes as zeros of r_n and recompute Christoffel weights.

    The eigensolver leaves O(eps ||J||) node errors which show up in high
    moments; a couple of Newton steps on the recurrence removes most of it.
    Only used for constant coefficients: for variable coefficients the
    eigenvectors localise and forward evaluation at the nodes is unstable.
    """
    n = len(b)
    scale = max(np.max(np.abs(b)), np.max(np.abs(a)), 1.0)

    def values(x):
        R = np.zeros((n + 1, len(x)))
        D = np.zeros_like(R)
        R[0] = 1.0
        aa = np.append(a, a[-1] if len(a) else 1.0)
        for k in range(n):
            bk = b[k]
            v = (x - bk) * R[k]
            dv = R[k] + (x - bk) * D[k]
            if k > 0:
                v -= aa[k - 1] * R[k - 1]
                dv -= aa[k - 1] * D[k - 1]
            R[k + 1] = v / aa[k]
            D[k + 1] = dv / aa[k]
        return R, D

    y = x.copy()
    for _ in range(steps):
        R, D = values(y)
        step = R[n] / D[n]
        if not np.all(np.isfinite(step)) or np.max(np.abs(step)) > 1e-8 * scale:
            return x, w
        y = y - step
    R, _ = values(y)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        wy = 1.0 / np.sum(R[:n] ** 2, axis=0)
    if not np.all(np.isfinite(wy)) or np.any(np.diff(y) <= 0):
        return x, w
    return y, wy


@dataclass(frozen=True)
class MomentTable:
    """Power moments s_{-1}, s_0, ..., s_K with s_{-1} = 0."""

    values: tuple

    @property
    def K(self) -> int:
        return len(self.values) - 2

    def __getitem__(self, k: int) -> float:
        if k < -1 or k > self.K:
            raise DegreeBudgetExceeded(f"moment s_{k} not available (K={self.K})")
        return self.values[k + 1]

    def as_array(self) -> np.ndarray:
        """s_0, ..., s_K."""
        return np.asarray(self.values[1:])


def _check_budget(m: Measure, degree: int, what: str):
    budget = m.degree_budget
    if budget is not None and degree > budget:
        raise DegreeBudgetExceeded(
            f"{what} needs degree {degree}, measure budget is {budget}",
            needed=degree, budget=budget)


def moments(m: Measure, K: int) -> MomentTable:
    if K < 0:
        raise InvalidParameter("K must be non-negative")
    budget = m.degree_budget
    if budget is not None and K > 2 * budget:
        raise DegreeBudgetExceeded(f"moments up to {K} exceed 2*budget={2 * budget}",
                                   needed=K, budget=budget)
    x, w = m.rule(max((K + 2) // 2, 1))
    s = [0.0]
    power = np.ones_like(x)
    for _ in range(K + 1):
        s.append(float(np.dot(w, power)))
        power = power * x
    return MomentTable(tuple(s))


def hankel(mt: MomentTable, n: int) -> float:
    """det (s_{k+l})_{k,l=0..n}; 1 for n = -1."""
    if n == -1:
        return 1.0
    if n < -1 or 2 * n > mt.K:
        raise DegreeBudgetExceeded(f"Hankel determinant {n} needs s_{2 * n}")
    s = mt.as_array()
    H = np.array([[s[k + l] for l in range(n + 1)] for k in range(n + 1)])
    return float(np.linalg.det(H))


def stieltjes(x, w, N: int):
    """Recurrence coefficients a_0..a_{N-1}, b_0..b_N of a discrete measure.

    Discretised Stieltjes procedure with full re-orthogonalisation.
    """
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    if N + 1 > len(x):
        raise DegreeBudgetExceeded(f"{len(x)} nodes support at most {len(x) - 1} steps")
    a = np.zeros(N)
    b = np.zeros(N + 1)
    basis = [np.ones_like(x) / math.sqrt(w.sum())]
    for k in range(N + 1):
        p = basis[k]
        b[k] = np.dot(w, x * p * p)
        if k == N:
            break
        v = (x - b[k]) * p
        if k > 0:
            v -= a[k - 1] * basis[k - 1]
        for q in basis:
            v -= np.dot(w, v * q) * q
        a[k] = math.sqrt(np.dot(w, v * v))
        if a[k] <= A_FLOOR:
            raise MeasureDegenerate(f"a_{k} = {a[k]:.3e} lost positivity", index=k)
        basis.append(v / a[k])
    return a, b


def jacobi_from_measure(m: Measure, N: int) -> JacobiMatrix:
    """Jacobi matrix (a_0..a_{N-1}, b_0..b_N) of the measure's orthonormal polynomials."""
    if N < 1:
        raise InvalidParameter("N must be positive")
    _check_budget(m, N, "jacobi_from_measure")
    x, w = m.rule(N + 2)
    a, b = stieltjes(x, w, N)
    return JacobiMatrix(a, b, "none")


def recurrence_coefficients(a, b, N: int, exact: bool = False) -> np.ndarray:
    """Row n holds the monomial coefficients of r_n from the three-term recurrence.

    With ``exact=True`` the entries are Fractions computed from the exact
    binary values of ``a`` and ``b``.
    """
    if exact:
        one, zero = Fraction(1), Fraction(0)
        conv = Fraction
        R = np.full((N + 1, N + 1), zero, dtype=object)
    else:
        one, zero = 1.0, 0.0
        conv = float
        R = np.zeros((N + 1, N + 1))
    R[0, 0] = one
    for k in range(N):
        ak, bk = conv(a[k]), conv(b[k])
        v = np.empty(N + 1, dtype=R.dtype)
        v[0] = zero
        v[1:] = R[k, :-1]
        v = v - bk * R[k]
        if k > 0:
            v = v - conv(a[k - 1]) * R[k - 1]
        R[k + 1] = v / ak
    return R


def orthonormal_polys(m: Measure, N: int) -> list[Polynomial]:
    """r_0, ..., r_N with positive leading coefficients."""
    J = jacobi_from_measure(m, N)
    R = recurrence_coefficients(J.a, J.b, N)
    return [Polynomial(R[n, :n + 1]) for n in range(N + 1)]


def orthonormal_values(J: JacobiMatrix, x, N: int) -> np.ndarray:
    """Values r_n(x_j) as an (N+1, len(x)) array, by the stable recurrence."""
    x = np.asarray(x)
    a, b = J.a_band(N), J.b_band(N)
    out = np.zeros((N + 1,) + x.shape, dtype=np.result_type(x, float))
    out[0] = 1.0
    for k in range(N):
        v = (x - b[k]) * out[k]
        if k > 0:
            v = v - a[k - 1] * out[k - 1]
        out[k + 1] = v / a[k]
    return out


def gauss_rule(m: Measure, N: int) -> Measure:
    """N-point Gauss rule of ``m`` as an atoms measure."""
    if N < 1:
        raise InvalidParameter("N must be positive")
    if m.size is not None and N >= m.size:
        return m
    if m.kind == "atoms":
        J = jacobi_from_measure(m, N - 1)
        x, w = _golub_welsch(J.a, J.b)
    elif m.kind == "jacobi":
        x, w = _golub_welsch(m.jacobi.a_band(N - 1), m.jacobi.b_band(N))
    else:
        x, w = m.rule(N)
    return Measure.atoms(zip(x, w))


def integrate(m: Measure, values_fn, degree: int):
    """Integral of a polynomial-valued callable of the given total degree.

    Discrete measures integrate exactly at any degree; densities use a Gauss
    rule with degree // 2 + 1 nodes.
    """
    x, w = m.rule(degree // 2 + 1)
    return np.dot(w, values_fn(x))
