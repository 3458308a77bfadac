"""The associated operator A of a pencil on finitely supported vectors, and
the spectral function S(u, v) = (u(A) e0, v(A) e0).

A is stored as an explicit column-finite matrix: column n holds A e_n,
supported on indices 0..n+1.  The same container holds the monomial-basis
matrix of the model operator used by :mod:`jtpencil.inverse`.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidPencil, InvalidParameter, TruncationExceeded
from .pencil import JacobiMatrix, Pencil

STANDARD = "standard"
MONOMIAL = "monomial"


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """``data[:, n]`` is the image of the n-th basis vector; shape (size + 1, size).

    ``data`` may hold Fractions (dtype=object) for exact work.
    """

    data: np.ndarray
    basis: str = STANDARD

    def __post_init__(self):
        if self.basis not in (STANDARD, MONOMIAL):
            raise InvalidParameter(f"unknown basis {self.basis!r}")
        rows, cols = self.data.shape
        if rows != cols + 1:
            raise InvalidParameter("operator matrix must have one more row than columns")

    @property
    def size(self) -> int:
        return self.data.shape[1]

    @property
    def exact(self) -> bool:
        return self.data.dtype == object

    @property
    def values(self) -> np.ndarray:
        return self.data.astype(float)

    def column(self, n: int) -> np.ndarray:
        return self.data[: n + 2, n]

    def apply(self, vec) -> np.ndarray:
        """Image of a vector supported on 0..len(vec)-1; result has len(vec) + 1 entries."""
        vec = np.asarray(vec, dtype=self.data.dtype if self.exact else None)
        n = len(vec)
        if n > self.size:
            raise TruncationExceeded(f"vector of length {n} exceeds {self.size} columns")
        return self.data[: n + 1, :n].dot(vec)

    def structure_defects(self):
        """Indices n where the column support or the positive sub-diagonal entry fails."""
        bad = []
        for n in range(self.size):
            col = self.data[:, n]
            if not col[n + 1] > 0 or any(col[j] != 0 for j in range(n + 2, len(col))):
                bad.append(n)
        return bad


def build_associated_operator(theta: Pencil, N: int, exact: bool = False) -> OperatorMatrix:
    """Columns A e_0, ..., A e_N from A J3 = J5.

    A e_0 = (e_1 - beta e_0) / alpha and
    A e_{n+1} = (w_n - a_{n-1} A e_{n-1} - b_n A e_n) / a_n.
    """
    if N < 0:
        raise InvalidParameter("N must be non-negative")
    if not theta.alpha > 0:
        raise InvalidPencil(f"alpha = {theta.alpha} is not positive")
    rows = N + 2
    a = theta.J3.a_band(max(N, 1))
    b = theta.J3.b_band(max(N, 1))
    if np.any(a[:N] <= 0):
        k = int(np.argmax(a[:N] <= 0))
        raise InvalidPencil(f"a_{k} = {a[k]} is not positive", index=k)
    if exact:
        conv = Fraction
        F = np.full((rows, N + 1), Fraction(0), dtype=object)
    else:
        conv = float
        F = np.zeros((rows, N + 1))
    alpha, beta = conv(theta.alpha), conv(theta.beta)
    F[0, 0] = -beta / alpha
    F[1, 0] = 1 / alpha
    for n in range(N):
        w = theta.J5.column(n, rows)
        col = np.array([conv(x) for x in w], dtype=F.dtype) - conv(b[n]) * F[:, n]
        if n > 0:
            col = col - conv(a[n - 1]) * F[:, n - 1]
        F[:, n + 1] = col / conv(a[n])
    for k in range(N + 1):
        if not F[k + 1, k] > 0:
            raise InvalidPencil(f"f_({k},{k + 1}) not positive", index=k)
    return OperatorMatrix(F, STANDARD)


def as_coeffs(u) -> np.ndarray:
    """Coefficient vector (low to high) of a Polynomial or sequence, trailing zeros trimmed."""
    c = np.asarray(getattr(u, "coef", u))
    if c.ndim == 0:
        c = c.reshape(1)
    nz = np.nonzero(c)[0]
    return c[: nz[-1] + 1] if len(nz) else c[:1] * 0


def _fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(float(x))


def apply_poly_at_e0(Amat: OperatorMatrix, u) -> np.ndarray:
    """u(A) e_0 by Horner's scheme; length deg u + 1."""
    c = as_coeffs(u)
    deg = len(c) - 1
    if deg + 1 > Amat.size:
        raise TruncationExceeded(f"degree {deg} needs {deg + 1} columns, have {Amat.size}")
    if Amat.exact:
        if np.iscomplexobj(c):
            re = apply_poly_at_e0(Amat, c.real).astype(float)
            im = apply_poly_at_e0(Amat, c.imag).astype(float)
            n = max(len(re), len(im))
            return np.pad(re, (0, n - len(re))) + 1j * np.pad(im, (0, n - len(im)))
        c = np.array([_fraction(x) for x in c], dtype=object)
        dtype = object
    else:
        dtype = np.result_type(c, float)
    y = np.zeros(1, dtype=dtype)
    y[0] = c[-1]
    for ck in c[-2::-1]:
        y = Amat.apply(y)
        y[0] += ck
    return y


def apply_polys_at_e0(Amat: OperatorMatrix, P) -> list[np.ndarray]:
    """u_n(A) e_0 for every row of the coefficient matrix P (row n has degree <= n).

    The powers A^k e_0 are formed once and combined, which is cheap in exact
    arithmetic where Horner's roundoff advantage is moot.
    """
    P = np.asarray(P)
    N = P.shape[0] - 1
    if N + 1 > Amat.size:
        raise TruncationExceeded(f"degree {N} needs {N + 1} columns, have {Amat.size}")
    exact = Amat.exact
    zero = Fraction(0) if exact else 0.0
    powers = [np.array([Fraction(1) if exact else 1.0], dtype=Amat.data.dtype)]
    for _ in range(N):
        powers.append(Amat.apply(powers[-1]))
    out = []
    for n in range(N + 1):
        y = np.full(n + 1, zero, dtype=object if exact else np.result_type(P, float))
        for k in range(n + 1):
            ck = _fraction(P[n, k]) if exact else P[n, k]
            if ck != 0:
                y[: k + 1] = y[: k + 1] + ck * powers[k]
        out.append(y)
    return out


def associated_images(theta: Pencil, Amat: OperatorMatrix, N: int) -> list[np.ndarray]:
    """p_0(A) e_0, ..., p_N(A) e_0 from the five-term recurrence with A in place of lambda.

    No monomial coefficients are formed, so this avoids their conditioning.
    """
    if N + 1 > Amat.size:
        raise TruncationExceeded(f"degree {N} needs {N + 1} columns, have {Amat.size}")
    L = N + 1

    def pad(v):
        out = np.zeros(L, dtype=Amat.data.dtype)
        if Amat.exact:
            out[:] = Fraction(0)
        out[: len(v)] = v
        return out

    def A(v):
        return pad(Amat.apply(v[:N]))

    conv = _fraction if Amat.exact else float
    v = [pad([conv(1.0)])]
    if N == 0:
        return [v[0][:1]]
    v.append(A(v[0]) * conv(theta.alpha) + conv(theta.beta) * v[0])
    if N == 1:
        return [v[0][:1], v[1][:2]]
    m = max(N - 1, 1)
    a, b = ([conv(x) for x in band] for band in (theta.J3.a_band(m), theta.J3.b_band(m)))
    alpha5, beta5, gamma5 = ([conv(x) for x in band] for band in theta.J5.bands(m))
    Av = [A(v[0]), A(v[1])]
    for n in range(N - 1):
        rhs = alpha5[n] * v[n] - b[n] * Av[n] + beta5[n] * v[n + 1] - a[n] * Av[n + 1]
        if n >= 1:
            rhs = rhs + beta5[n - 1] * v[n - 1] - a[n - 1] * Av[n - 1]
        if n >= 2:
            rhs = rhs + gamma5[n - 2] * v[n - 2]
        v.append(-rhs / gamma5[n])
        if n + 2 < N:
            Av.append(A(v[-1]))
    return [x[: n + 1] for n, x in enumerate(v)]


def spectral_function(Amat: OperatorMatrix, u, v) -> complex:
    """S(u, v) = (u(A) e0, v(A) e0), linear in u and conjugate-linear in v."""
    x = apply_poly_at_e0(Amat, u)
    y = apply_poly_at_e0(Amat, v)
    n = max(len(x), len(y))
    x = np.pad(x, (0, n - len(x))).astype(complex)
    y = np.pad(y, (0, n - len(y))).astype(complex)
    return complex(np.vdot(y, x))


def gram_matrix(Amat: OperatorMatrix, polys) -> np.ndarray:
    """Matrix G[n, m] = S(polys[n], polys[m])."""
    vecs = [apply_poly_at_e0(Amat, p).astype(complex) for p in polys]
    n = max(len(v) for v in vecs)
    V = np.array([np.pad(v, (0, n - len(v))) for v in vecs])
    return V @ V.conj().T


def decompose_e0_u_basis(J3: JacobiMatrix, f):
    """Write f = zeta e_0 + sum xi_n u_n with u_n = J3 e_n; returns (zeta, xi)."""
    f = np.array(f, dtype=complex)
    nz = np.nonzero(f)[0]
    if len(nz) == 0 or nz[-1] == 0:
        return complex(f[0]) if len(f) else 0j, np.zeros(0, dtype=complex)
    top = int(nz[-1])
    a, b = J3.a_band(top), J3.b_band(top)
    xi = np.zeros(top, dtype=complex)
    for m in range(top, 0, -1):
        k = m - 1
        xi[k] = f[m] / a[k]
        f[m] = 0.0
        f[k] -= xi[k] * b[k]
        if k >= 1:
            f[k - 1] -= xi[k] * a[k - 1]
    return complex(f[0]), xi


def associated_apply(theta: Pencil, f) -> np.ndarray:
    """A f straight from the defining formula (zeta/alpha)(e1 - beta e0) + sum xi_n w_n."""
    zeta, xi = decompose_e0_u_basis(theta.J3, f)
    n = max(len(xi) + 2, 2)
    out = np.zeros(n, dtype=complex)
    out[0] -= zeta * theta.beta / theta.alpha
    out[1] += zeta / theta.alpha
    for k, x in enumerate(xi):
        if x != 0:
            out += x * theta.J5.column(k, n)
    return out


def power_e0_expansion(Amat: OperatorMatrix, n: int) -> np.ndarray:
    """Coefficients c_{n,j} of A^n e_0; the leading one is checked positive."""
    if n + 1 > Amat.size:
        raise TruncationExceeded(f"A^{n} e0 needs {n + 1} columns, have {Amat.size}")
    y = np.zeros(1, dtype=Amat.data.dtype)
    y[0] = 1
    for _ in range(n):
        y = Amat.apply(y)
    if not y[n] > 0:
        raise InvalidPencil(f"c_({n},{n}) = {y[n]} is not positive", index=n)
    return y
