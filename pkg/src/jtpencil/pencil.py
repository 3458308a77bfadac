"""Banded matrices J3 (tridiagonal) and J5 (five-diagonal), the pencil
bundle, and the five-term recurrence for the associated polynomials.

Semi-infinite matrices are stored as finite band lists plus a tail rule:
``"constant"`` repeats the last stored entry forever, ``"none"`` makes any
access past the stored data an error.
"""
from __future__ import annotations

import logging
from fractions import Fraction
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .errors import GammaNotPositive, InvalidParameter, TruncationExceeded

log = logging.getLogger(__name__)

TAILS = ("constant", "none")
DEFAULT_MAX_DEGREE = 64


def _extend(values: tuple, n: int, tail: str, name: str) -> np.ndarray:
    """First ``n`` entries of a band, applying the tail rule."""
    if n <= len(values):
        return np.asarray(values[:n], dtype=float)
    if tail != "constant" or not values:
        raise TruncationExceeded(
            f"band {name} has {len(values)} stored entries, {n} requested",
            band=name, requested=n, stored=len(values))
    extra = n - len(values)
    log.debug("band %s: %d tail entries consumed", name, extra)
    return np.concatenate([np.asarray(values, dtype=float),
                           np.full(extra, values[-1], dtype=float)])


def _check_tail(tail):
    if tail not in TAILS:
        raise InvalidParameter(f"unknown tail rule {tail!r}", tail=tail)


@dataclass(frozen=True)
class JacobiMatrix:
    """Tridiagonal J3 with sub-diagonal ``a`` and diagonal ``b``."""

    a: tuple
    b: tuple
    tail: str = "constant"

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(x) for x in self.a))
        object.__setattr__(self, "b", tuple(float(x) for x in self.b))
        _check_tail(self.tail)

    @classmethod
    def constant(cls, a: float, b: float) -> "JacobiMatrix":
        return cls((a,), (b,), "constant")

    @property
    def size(self) -> int | None:
        """Matrix dimension when truncated, ``None`` for a constant tail."""
        return len(self.b) if self.tail == "none" else None

    def a_band(self, n: int) -> np.ndarray:
        return _extend(self.a, n, self.tail, "a")

    def b_band(self, n: int) -> np.ndarray:
        return _extend(self.b, n, self.tail, "b")

    def dense(self, n: int) -> np.ndarray:
        a = self.a_band(n - 1)
        return np.diag(self.b_band(n)) + np.diag(a, 1) + np.diag(a, -1)

    def scaled(self, factor: float) -> "JacobiMatrix":
        return JacobiMatrix(tuple(factor * x for x in self.a),
                            tuple(factor * x for x in self.b), self.tail)


@dataclass(frozen=True)
class FiveDiagMatrix:
    """Symmetric five-diagonal J5; only the upper triangle is stored."""

    alpha5: tuple
    beta5: tuple
    gamma5: tuple
    tail: str = "constant"

    def __post_init__(self):
        for name in ("alpha5", "beta5", "gamma5"):
            object.__setattr__(self, name,
                               tuple(float(x) for x in getattr(self, name)))
        _check_tail(self.tail)

    @property
    def size(self) -> int | None:
        return len(self.alpha5) if self.tail == "none" else None

    def bands(self, n: int):
        """Diagonal, first and second super-diagonal, ``n`` entries each."""
        return (_extend(self.alpha5, n, self.tail, "alpha5"),
                _extend(self.beta5, n, self.tail, "beta5"),
                _extend(self.gamma5, n, self.tail, "gamma5"))

    def dense(self, n: int) -> np.ndarray:
        alpha = _extend(self.alpha5, n, self.tail, "alpha5")
        beta = _extend(self.beta5, max(n - 1, 0), self.tail, "beta5")
        gamma = _extend(self.gamma5, max(n - 2, 0), self.tail, "gamma5")
        out = np.diag(alpha)
        out += np.diag(beta, 1) + np.diag(beta, -1)
        out += np.diag(gamma, 2) + np.diag(gamma, -2)
        return out

    def column(self, n: int, length: int) -> np.ndarray:
        """J5 e_n as a vector of the given length (w_n)."""
        alpha, beta, gamma = self.bands(n + 1)
        out = np.zeros(length)
        entries = ((n - 2, gamma[n - 2] if n >= 2 else 0.0),
                   (n - 1, beta[n - 1] if n >= 1 else 0.0),
                   (n, alpha[n]), (n + 1, beta[n]), (n + 2, gamma[n]))
        for j, val in entries:
            if 0 <= j < length:
                out[j] += val
            elif j >= length and val != 0.0:
                raise TruncationExceeded(f"w_{n} needs index {j}", index=j)
        return out


@dataclass(frozen=True)
class Pencil:
    """A Jacobi-type pencil (J3, J5, alpha, beta)."""

    J3: JacobiMatrix
    J5: FiveDiagMatrix
    alpha: float
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))


@dataclass(frozen=True)
class Violation:
    kind: str
    index: int | None = None
    value: float | None = None

    def __str__(self):
        if self.index is None:
            return f"{self.kind}({self.value})"
        return f"{self.kind}({self.index})"


def validate(theta: Pencil) -> list[Violation]:
    """All violations of the pencil conditions in the stored data."""
    out = []
    if not (theta.alpha > 0):
        out.append(Violation("AlphaNotPositive", None, theta.alpha))
    if not np.isfinite(theta.beta):
        out.append(Violation("BetaNotFinite", None, theta.beta))
    for k, ak in enumerate(theta.J3.a):
        if not (ak > 0):
            out.append(Violation("ANotPositive", k, ak))
    for k, bk in enumerate(theta.J3.b):
        if not np.isfinite(bk):
            out.append(Violation("BNotFinite", k, bk))
    for n, g in enumerate(theta.J5.gamma5):
        if not (g > 0):
            out.append(Violation("GammaNotPositive", n, g))
    for name in ("alpha5", "beta5"):
        for n, v in enumerate(getattr(theta.J5, name)):
            if not np.isfinite(v):
                out.append(Violation(f"{name}NotFinite", n, v))
    if theta.J3.tail == "none" and len(theta.J3.a) != len(theta.J3.b) - 1:
        out.append(Violation("J3BandLength", len(theta.J3.a)))
    if theta.J5.tail == "none":
        n5 = len(theta.J5.alpha5)
        if len(theta.J5.beta5) != n5 - 1 or len(theta.J5.gamma5) != n5 - 2:
            out.append(Violation("J5BandLength", n5))
        if theta.J3.tail == "none" and len(theta.J3.b) != n5:
            out.append(Violation("SizeMismatch", n5))
    return out


def associated_coefficients(theta: Pencil, N: int,
                            max_degree: int = DEFAULT_MAX_DEGREE,
                            exact: bool = False) -> np.ndarray:
    """Coefficient matrix P with P[n, j] the coefficient of x^j in p_n.

    With ``exact=True`` the recurrence runs on Fractions of the stored
    binary64 band values and P has dtype object.
    """
    if N < 0:
        raise InvalidParameter("N must be non-negative", N=N)
    if N > max_degree:
        raise InvalidParameter(f"degree {N} exceeds cap {max_degree}", N=N)
    if exact:
        conv = Fraction
        P = np.full((N + 1, N + 1), Fraction(0), dtype=object)
    else:
        conv = float
        P = np.zeros((N + 1, N + 1))
    P[0, 0] = conv(1.0)
    if N == 0:
        return P
    P[1, 0], P[1, 1] = conv(theta.beta), conv(theta.alpha)
    m = max(N - 1, 1)
    a = [conv(x) for x in theta.J3.a_band(m)]
    b = [conv(x) for x in theta.J3.b_band(m)]
    alpha5, beta5, gamma5 = ([conv(x) for x in band] for band in theta.J5.bands(m))

    def up(row):
        # multiplication by x
        out = np.empty_like(row)
        out[0] = conv(0.0)
        out[1:] = row[:-1]
        return out

    for n in range(N - 1):
        if not gamma5[n] > 0:
            raise GammaNotPositive(f"gamma_{n} = {float(gamma5[n])}", index=n)
        # (beta_{n-1} - x a_{n-1}) p_{n-1} + (alpha_n - x b_n) p_n
        #   + (beta_n - x a_n) p_{n+1} + gamma_{n-2} p_{n-2}
        rhs = (alpha5[n] * P[n] - b[n] * up(P[n])
               + beta5[n] * P[n + 1] - a[n] * up(P[n + 1]))
        if n >= 1:
            rhs = rhs + beta5[n - 1] * P[n - 1] - a[n - 1] * up(P[n - 1])
        if n >= 2:
            rhs = rhs + gamma5[n - 2] * P[n - 2]
        P[n + 2] = -rhs / gamma5[n]
    lead = P[np.arange(N + 1), np.arange(N + 1)]
    bad = [k for k in range(N + 1) if not lead[k] > 0]
    if bad:
        raise InvalidParameter(f"leading coefficient of p_{bad[0]} not positive",
                               index=bad[0])
    return P


def associated_polynomials(theta: Pencil, N: int,
                           max_degree: int = DEFAULT_MAX_DEGREE) -> list[Polynomial]:
    """p_0, ..., p_N generated by the five-term recurrence."""
    P = associated_coefficients(theta, N, max_degree)
    return [Polynomial(P[n, :n + 1]) for n in range(N + 1)]


def associated_values(theta: Pencil, lam: complex, N: int) -> np.ndarray:
    """(p_0(lam), ..., p_N(lam)) evaluated directly by the recurrence."""
    vals = np.zeros(N + 1, dtype=complex)
    vals[0] = 1.0
    if N == 0:
        return vals
    vals[1] = theta.alpha * lam + theta.beta
    m = max(N - 1, 1)
    a, b = theta.J3.a_band(m), theta.J3.b_band(m)
    alpha5, beta5, gamma5 = theta.J5.bands(m)
    for n in range(N - 1):
        s = (alpha5[n] - lam * b[n]) * vals[n] + (beta5[n] - lam * a[n]) * vals[n + 1]
        if n >= 1:
            s += (beta5[n - 1] - lam * a[n - 1]) * vals[n - 1]
        if n >= 2:
            s += gamma5[n - 2] * vals[n - 2]
        vals[n + 2] = -s / gamma5[n]
    return vals


def square_jacobi(J3: JacobiMatrix, N: int) -> FiveDiagMatrix:
    """Band form of J3 @ J3 for rows 0..N (a_{-1} = 0)."""
    rows = N + 1
    if J3.tail == "constant":
        # far enough that the last stored entries are the exact tail values
        rows = max(rows, len(J3.a) + 2, len(J3.b) + 1)
    a = J3.a_band(rows + 1)
    b = J3.b_band(rows + 1)
    a_prev = np.concatenate([[0.0], a[:rows - 1]])
    diag = a_prev ** 2 + b[:rows] ** 2 + a[:rows] ** 2
    off1 = a[:rows] * (b[:rows] + b[1:rows + 1])
    off2 = a[:rows] * a[1:rows + 1]
    if J3.tail == "none":
        n = min(rows, len(J3.b))
        return FiveDiagMatrix(diag[:n], off1[:n - 1], off2[:n - 2], "none")
    return FiveDiagMatrix(diag, off1, off2, "constant")


def pencil_apply(theta: Pencil, lam: complex, v: Sequence[complex]) -> np.ndarray:
    """(J5 - lam J3) v for a finitely supported v; result has len(v) + 2 entries."""
    v = np.asarray(v, dtype=complex)
    n = len(v)
    if n == 0:
        return np.zeros(2, dtype=complex)
    m = n + 2
    alpha, beta, gamma = theta.J5.bands(n)
    a, b = theta.J3.a_band(n), theta.J3.b_band(n)
    out = np.zeros(m, dtype=complex)
    out[:n] += (alpha - lam * b) * v
    out[1:n + 1] += (beta - lam * a) * v
    out[:n - 1] += (beta[:n - 1] - lam * a[:n - 1]) * v[1:]
    out[2:n + 2] += gamma * v
    out[:n - 2] += gamma[:n - 2] * v[2:]
    return out
