"""Special perturbation J5 = a J3^2 + b J3 + d diag(1, 0, 0, ...).

When the measure of J3 lives in [-c, c] with c < 1, the model operator is
conjugate (through the coefficient map G: polynomial -> coefficient vector)
to the bounded operator

    Ahat w = (a S + b E) w + d (w, svec) e0,

where S is the right shift and svec has components s_{k-1}.  Its resolvent
at e0 has a closed form, which makes a contour (Riesz) evaluation of
u(Ahat) e0 cheap.  Note that the associated operator A of such a pencil
is in general unbounded; only the coordinate operator Ahat is bounded.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import (ContourNotConverged, InvalidParameter, ResolventPole,
                     SeriesDivergent, SupportBoundViolated, TruncationExceeded)
from .inverse import _check_measure_matches
from .measure import Measure
from .operator import as_coeffs
from .pencil import FiveDiagMatrix, JacobiMatrix, Pencil, square_jacobi

MOMENT_SLACK = 1e-14
NORM_SLACK = 1e-12
POLE_FLOOR = 1e-12
MAX_SERIES_TERMS = 100_000
MAX_NODES = 2 ** 20
CHUNK = 2 ** 14
# contour sums run in extended precision where available: the integrand
# reaches max|u| on the circle, which can exceed ||u(Ahat) e0|| by orders of
# magnitude, and binary64 roundoff at that scale dominates the result
WORK = np.clongdouble
PI_WORK = np.arccos(np.longdouble(-1))


@lru_cache(maxsize=64)
def _raw_moments(m: Measure, K: int) -> tuple:
    """s_0..s_K from the measure's own rule; exact for discrete measures at any K."""
    x, w = m.rule(K // 2 + 1)
    out = []
    power = np.ones_like(x)
    for _ in range(K + 1):
        out.append(float(np.dot(w, power)))
        power = power * x
    return tuple(out)


def raw_moments(m: Measure, K: int) -> np.ndarray:
    # round K up to a power of two so the cache is shared between callers
    K2 = 1 << max(int(K), 1).bit_length()
    return np.asarray(_raw_moments(m, K2)[: K + 1])


@dataclass(frozen=True)
class TailVector:
    """svec = sum_{k>=1} s_{k-1} e_k truncated to K entries, with a norm bound."""

    entries: np.ndarray
    norm_upper: float

    @property
    def K(self) -> int:
        return len(self.entries)


@dataclass(frozen=True, eq=False)
class SpecialPencil:
    base: JacobiMatrix
    a: float
    b: float
    d: float
    c_support: float
    measure: Measure
    moment_count: int = 40

    @property
    def alpha(self) -> float:
        return 1.0 / (self.a * self.base.a_band(1)[0])

    @property
    def beta(self) -> float:
        a0, b0 = self.base.a_band(1)[0], self.base.b_band(1)[0]
        return -b0 / a0 - self.b / (self.a * a0)

    @property
    def norm_upper(self) -> float:
        """Upper bound for ||svec||: sqrt(sum c^{2(k-1)}) = 1/sqrt(1 - c^2), plus slack."""
        return (1.0 + NORM_SLACK) / math.sqrt(1.0 - self.c_support ** 2)

    def moments(self, K: int) -> np.ndarray:
        return raw_moments(self.measure, K)

    def tail_vector(self, K: int) -> TailVector:
        s = self.moments(max(K - 2, 0))
        entries = np.zeros(K)
        entries[1:] = s[: K - 1]
        return TailVector(entries, self.norm_upper)


@dataclass(frozen=True)
class ContourSpec:
    """Circle |z| = rho sampled at M equispaced trapezoid nodes."""

    rho: float
    M: int = 256

    def __post_init__(self):
        if not self.rho > 0:
            raise InvalidParameter("contour radius must be positive", rho=self.rho)
        if self.M < 1 or self.M & (self.M - 1):
            raise InvalidParameter("node count must be a power of two", M=self.M)

    @classmethod
    def default(cls, sp: SpecialPencil, M: int = 256, factor: float = 1.25) -> "ContourSpec":
        return cls(factor * norm_bound(sp), M)

    def nodes(self, M: int | None = None) -> np.ndarray:
        M = self.M if M is None else M
        return self.rho * np.exp(2j * np.pi * np.arange(M) / M)


def moment_certificate(m: Measure, c: float, K: int) -> np.ndarray:
    """Excess |s_k| - c^k for k <= K; all entries must be <= MOMENT_SLACK."""
    s = raw_moments(m, K)
    return np.abs(s) - c ** np.arange(K + 1)


def special_five(J3: JacobiMatrix, a: float, b: float, d: float, N: int) -> FiveDiagMatrix:
    """Bands of a J3^2 + b J3 + d diag(1, 0, ...)."""
    sq = square_jacobi(J3, N)
    n = len(sq.alpha5)
    alpha = a * np.asarray(sq.alpha5) + b * J3.b_band(n)
    alpha[0] += d
    beta = a * np.asarray(sq.beta5) + b * J3.a_band(len(sq.beta5))
    gamma = a * np.asarray(sq.gamma5)
    return FiveDiagMatrix(alpha, beta, gamma, sq.tail)


def build_special(J3: JacobiMatrix, m: Measure, a: float, b: float, d: float, N: int,
                  c_support: float | None = None) -> tuple[SpecialPencil, Pencil]:
    """The special pencil and the equivalent general pencil (J3, J5, alpha, beta).

    ``c_support`` defaults to the measure's support radius bound.
    """
    if not a > 0:
        raise InvalidParameter(f"a = {a} must be positive", a=a)
    if N < 1:
        raise InvalidParameter("N must be positive")
    _check_measure_matches(J3, m, min(N, m.degree_budget or N))
    c = m.support_radius() if c_support is None else float(c_support)
    if not 0 < c < 1:
        raise SupportBoundViolated(f"support radius {c} is not in (0, 1)", c=c)
    K = max(2 * N, 40)
    excess = moment_certificate(m, c, K)
    if np.any(excess > MOMENT_SLACK):
        k = int(np.argmax(excess))
        raise SupportBoundViolated(f"|s_{k}| exceeds c^{k} by {excess[k]:.3e}", index=k)
    sp = SpecialPencil(J3, float(a), float(b), float(d), c, m, K)
    theta = Pencil(J3, special_five(J3, a, b, d, N), sp.alpha, sp.beta)
    return sp, theta


def ahat_apply(sp: SpecialPencil, w, K: int) -> np.ndarray:
    """Ahat w = (a S + b E) w + d (w, svec) e0 on a K-entry window."""
    w = np.asarray(w)
    n = len(w)
    if n > K:
        raise TruncationExceeded(f"vector of length {n} exceeds window {K}")
    if n == K and w[-1] != 0:
        raise TruncationExceeded("shift would leave the window", index=K)
    out = np.zeros(K, dtype=np.result_type(w, float))
    out[:n] += sp.b * w
    out[1:n + 1] += sp.a * w[: K - 1]
    if n > 1:
        out[0] += sp.d * np.dot(w[1:], sp.moments(n - 2))
    return out


def shift(w, K: int) -> np.ndarray:
    w = np.asarray(w)
    out = np.zeros(K, dtype=w.dtype)
    out[1:len(w) + 1] = w[: K - 1]
    return out


def norm_bound(sp: SpecialPencil) -> float:
    """a + |b| + |d| ||svec||, with ||svec|| replaced by its upper bound."""
    return sp.a + abs(sp.b) + abs(sp.d) * sp.norm_upper


def _series_terms(q_abs: float, c: float, eps: float) -> int:
    """Number of terms after which (|q|)^{k+1} c^{k-1} / (1 - |q| c) < eps."""
    r = q_abs * c
    if r >= 1:
        raise SeriesDivergent(f"ratio |a/(z-b)| c = {r} >= 1")
    lead = q_abs ** 2 / (1 - r)
    if lead < eps:
        return 2
    if r == 0:
        return 2
    k = 1 + math.ceil(math.log(eps / lead) / math.log(r))
    if k > MAX_SERIES_TERMS:
        raise SeriesDivergent(f"{k} terms needed for eps={eps}")
    return k + 1


def _s_values(sp: SpecialPencil, z: np.ndarray, eps: float) -> np.ndarray:
    q = sp.a / (z - sp.b)
    qmax = float(np.max(np.abs(q)))
    if qmax >= 1:
        raise SeriesDivergent("|z - b| <= a: series for s(z) diverges")
    n = _series_terms(qmax, sp.c_support, eps)
    s = sp.moments(max(n - 2, 0))
    # s(z) = -sum_{k>=1} q^{k+1} s_{k-1} = -q^2 sum_j q^j s_j, by Horner
    acc = np.zeros_like(q)
    for sj in s[::-1]:
        acc = acc * q + sj
    return -(q ** 2) * acc


def s_of_z(sp: SpecialPencil, z: complex, eps: float = 1e-16) -> complex:
    """s(z) = -sum_{k>=0} (a/(z-b))^{k+1} s_{k-1}, truncated with a certified tail < eps."""
    if abs(z - sp.b) <= sp.a:
        raise SeriesDivergent(f"|z - b| = {abs(z - sp.b)} <= a = {sp.a}")
    return complex(_s_values(sp, np.array([complex(z)]), eps)[0])


def _resolvent_rows(sp: SpecialPencil, z: np.ndarray, K: int, eps: float) -> np.ndarray:
    q = sp.a / (z - sp.b)
    den = sp.a + sp.d * _s_values(sp, z, eps)
    if np.any(np.abs(den) <= POLE_FLOOR):
        j = int(np.argmin(np.abs(den)))
        raise ResolventPole(f"a + d s(z) vanishes near z = {z[j]}", z=[z[j].real, z[j].imag])
    powers = q[:, None] ** np.arange(1, K + 1)[None, :]
    return -powers / den[:, None]


def resolvent_e0(sp: SpecialPencil, z: complex, K: int, eps: float = 1e-16) -> np.ndarray:
    """First K entries of R_z(Ahat) e0 = v(z) / (a + d s(z)), v_k = -(a/(z-b))^{k+1}."""
    if abs(z - sp.b) <= sp.a:
        raise SeriesDivergent(f"|z - b| = {abs(z - sp.b)} <= a = {sp.a}")
    return _resolvent_rows(sp, np.array([complex(z)]), K, eps)[0]


def resolvent_residual(sp: SpecialPencil, z: complex, K: int, eps: float = 1e-16) -> float:
    """||(Ahat - z) f - e0|| on the first K entries, using the full (f, svec) = s(z)/(a + d s(z))."""
    f = resolvent_e0(sp, z, K, eps)
    sz = s_of_z(sp, z, eps)
    r = (sp.b - z) * f
    r[1:] += sp.a * f[:-1]
    r[0] += sp.d * sz / (sp.a + sp.d * sz) - 1.0
    return float(np.linalg.norm(r))


def _circle(rho: float, M: int, offset: int) -> np.ndarray:
    """Nodes rho exp(2 pi i (2j + offset) / M) for j < M/2 (offset 1) or all j (offset 0)."""
    k = np.arange(M, dtype=np.longdouble) if offset == 0 else \
        2 * np.arange(M // 2, dtype=np.longdouble) + 1
    return WORK(rho) * np.exp(1j * (2 * PI_WORK / M) * k)


@dataclass
class RieszResult:
    vector: np.ndarray
    log: list = field(default_factory=list)
    nodes: int = 0


def riesz_apply_logged(sp: SpecialPencil, u, contour: ContourSpec, K: int | None = None,
                       tol: float = 1e-8, eps: float = 1e-16,
                       max_nodes: int = MAX_NODES) -> RieszResult:
    """u(Ahat) e0 = -(1/2 pi i) oint u(z) R_z(Ahat) e0 dz by the trapezoid rule.

    The node count is doubled (reusing previous nodes) until successive
    approximations differ by less than tol on the first K entries.
    """
    c = as_coeffs(u)
    if K is None:
        K = len(c) - 1 + 8
    if contour.rho <= norm_bound(sp):
        raise InvalidParameter(f"contour radius {contour.rho} must exceed the norm bound "
                               f"{norm_bound(sp)}")

    def node_sum(z):
        total = np.zeros(K, dtype=WORK)
        for lo in range(0, len(z), CHUNK):
            zz = z[lo: lo + CHUNK]
            weights = np.polynomial.polynomial.polyval(zz, c) * zz
            total += weights @ _resolvent_rows(sp, zz, K, eps)
        return total

    M = contour.M
    total = node_sum(_circle(contour.rho, M, 0))
    approx = -total / M
    log = []
    while True:
        M2 = 2 * M
        if M2 > max_nodes:
            raise ContourNotConverged(f"no convergence with {M} nodes", log=log)
        total = total + node_sum(_circle(contour.rho, M2, 1))
        new = -total / M2
        delta = float(np.linalg.norm((new - approx).astype(complex)))
        log.append((M2, delta))
        approx, M = new, M2
        if delta < tol:
            return RieszResult(approx.astype(complex), log, M)


def riesz_apply(sp: SpecialPencil, u, contour: ContourSpec, K: int | None = None,
                **kwargs) -> np.ndarray:
    return riesz_apply_logged(sp, u, contour, K, **kwargs).vector


def horner_ahat(sp: SpecialPencil, u, K: int | None = None) -> np.ndarray:
    """u(Ahat) e0 by Horner's scheme with repeated ahat_apply."""
    c = as_coeffs(u)
    if K is None:
        K = len(c) - 1 + 8
    y = np.zeros(K, dtype=np.result_type(c, float))
    y[0] = c[-1]
    for ck in c[-2::-1]:
        y = ahat_apply(sp, y, K)
        y[0] += ck
    return y


def spectral_function_special(sp: SpecialPencil, u, v, contour: ContourSpec,
                              **kwargs) -> complex:
    """S(u, v) = int u(A)(1) conj(v(A)(1)) dsigma with u(A)(1) from the contour route."""
    cu, cv = as_coeffs(u), as_coeffs(v)
    fu = riesz_apply(sp, cu, contour, **kwargs)
    fv = riesz_apply(sp, cv, contour, **kwargs)
    # entries beyond the polynomial degree are contour noise
    fu, fv = fu[: len(cu)], fv[: len(cv)]
    x, w = sp.measure.rule((len(fu) + len(fv)) // 2 + 1)
    P = np.polynomial.polynomial
    return complex(np.dot(w, P.polyval(x, fu) * np.conj(P.polyval(x, fv))))


def empirical_norm_ratio(sp: SpecialPencil, K: int, trials: int = 100,
                         rng: np.random.Generator | None = None) -> float:
    """max ||Ahat w|| / ||w|| over random unit vectors supported on K - 1 entries."""
    rng = np.random.default_rng(0) if rng is None else rng
    worst = 0.0
    for _ in range(trials):
        w = rng.standard_normal(K - 1)
        w /= np.linalg.norm(w)
        worst = max(worst, float(np.linalg.norm(ahat_apply(sp, w, K))))
    return worst


def power_iteration_radius(sp: SpecialPencil, K: int, steps: int = 30) -> float:
    """Spectral-radius estimate of the K x K truncation of Ahat."""
    M = np.zeros((K, K))
    s = sp.moments(max(K - 2, 0))
    M[np.arange(K), np.arange(K)] = sp.b
    M[np.arange(1, K), np.arange(K - 1)] = sp.a
    M[0, 1:] += sp.d * s[: K - 1]
    x = np.ones(K) / math.sqrt(K)
    est = 0.0
    for _ in range(steps):
        y = M @ x
        est = float(np.linalg.norm(y))
        if est == 0:
            return 0.0
        x = y / est
    return est
