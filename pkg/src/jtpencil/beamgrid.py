"""Finite-difference grid model of the beam pencil

    (p y'')'' - lam (-y'' + c r y) = 0   on [0, 1],  y = y' = 0 at both ends.

On a uniform grid x_j = j h the stencil rows read

    gamma_{j-2} y_{j-2} + beta_{j-1} y_{j-1} + alpha_j y_j + beta_j y_{j+1} + gamma_j y_{j+2}
        + lam (a_{j-1} y_{j-1} + b_j y_j + a_j y_{j+1}) = 0

with alpha_j = p_{j+1} + 4 p_j + p_{j-1}, beta_j = -2 (p_{j+1} + p_j),
gamma_j = p_{j+1}, a_j = h^2, b_j = (-2 - h^2 c r_j) h^2.  Writing
lam_tilde = -lam gives the pencil form (five - lam_tilde tri) y = 0.

Two clamping conventions are offered.  ``"drop"`` sets y_0 = y_1 = 0 (and
y_{N-1} = y_N = 0) and deletes those columns; it is only first-order
accurate because y'(0) = 0 is imposed by a one-sided difference.
``"reflect"`` (default) keeps y_0 = 0 and imposes y'(0) = 0 by the central
ghost value y_{-1} = y_1, which folds the ghost column into the diagonal and
restores second-order convergence.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import InvalidParameter, NumericalFailure
from .pencil import FiveDiagMatrix, JacobiMatrix

CLAMPS = ("reflect", "drop")
SIGN_NOTE = "lambda_tilde = -lambda: (five - lambda_tilde * tri) y = 0"


@dataclass(frozen=True)
class BeamProblem:
    """Samples of p and r at the N + 1 grid nodes.

    Positivity of p and r is not enforced here so that a pencil report can
    flag offending samples; ``discretize`` works on any real data.
    """

    p_samples: tuple
    r_samples: tuple
    c_coupling: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "p_samples", tuple(float(v) for v in self.p_samples))
        object.__setattr__(self, "r_samples", tuple(float(v) for v in self.r_samples))
        if len(self.p_samples) != len(self.r_samples):
            raise InvalidParameter("p and r need the same number of samples")
        if self.N < 8:
            raise InvalidParameter(f"N = {self.N} must be at least 8", N=self.N)

    @classmethod
    def from_functions(cls, N: int, p=None, r=None, c: float = 0.0) -> "BeamProblem":
        x = np.linspace(0.0, 1.0, N + 1)
        pv = np.ones_like(x) if p is None else np.broadcast_to(p(x), x.shape)
        rv = np.ones_like(x) if r is None else np.broadcast_to(r(x), x.shape)
        return cls(tuple(pv), tuple(rv), c)

    @property
    def N(self) -> int:
        return len(self.p_samples) - 1

    @property
    def h(self) -> float:
        return 1.0 / self.N

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.N + 1)


@dataclass(frozen=True)
class DiscretePencil:
    """Interior bands: ``five`` (alpha, beta, gamma) and ``tri`` (a, b)."""

    five: FiveDiagMatrix
    tri: JacobiMatrix
    nodes: np.ndarray
    h: float
    clamp: str
    sign_note: str = SIGN_NOTE

    @property
    def size(self) -> int:
        return len(self.nodes)

    def five_dense(self) -> np.ndarray:
        return self.five.dense(self.size)

    def tri_dense(self) -> np.ndarray:
        return self.tri.dense(self.size)


def stencil_bands(bp: BeamProblem):
    """Full-grid coefficient lists alpha_j, beta_j, gamma_j, a_j, b_j for j = 0..N.

    p is extended by its end values outside [0, 1]; these entries only meet
    columns that the clamping removes.
    """
    p = np.asarray(bp.p_samples)
    r = np.asarray(bp.r_samples)
    h = bp.h
    pe = np.concatenate([[p[0]], p, [p[-1]]])
    p_prev, p_next = pe[:-2], pe[2:]
    alpha = p_next + 4 * p + p_prev
    beta = -2 * (p_next + p)
    gamma = p_next.copy()
    a = np.full(bp.N + 1, h * h)
    b = (-2 - h * h * bp.c_coupling * r) * h * h
    return alpha, beta, gamma, a, b


def discretize(bp: BeamProblem, clamp: str = "reflect") -> DiscretePencil:
    if clamp not in CLAMPS:
        raise InvalidParameter(f"unknown clamp {clamp!r}", clamp=clamp)
    alpha, beta, gamma, a, b = stencil_bands(bp)
    N = bp.N
    if clamp == "drop":
        lo, hi = 2, N - 2
    else:
        lo, hi = 1, N - 1
    idx = np.arange(lo, hi + 1)
    al = alpha[idx].copy()
    if clamp == "reflect":
        # ghost y_{-1} = y_1 and y_{N+1} = y_{N-1}: the outer stencil weights
        # gamma_{-1} = p_0 and gamma_N = p_N land on the diagonal
        p = bp.p_samples
        al[0] += p[0]
        al[-1] += p[N]
    five = FiveDiagMatrix(al, beta[idx[:-1]], gamma[idx[:-2]], "none")
    tri = JacobiMatrix(a[idx[:-1]], b[idx], "none")
    return DiscretePencil(five, tri, bp.x[idx], bp.h, clamp)


@dataclass(frozen=True)
class Mode:
    lam: float
    vector: np.ndarray


def solve_eigen(dp: DiscretePencil, count: int) -> list[Mode]:
    """The ``count`` smallest lam = -lam_tilde with five y = lam (-tri) y."""
    if count < 1 or dp.size < count + 2:
        raise InvalidParameter(f"need interior size >= count + 2 (size {dp.size})")
    F = dp.five_dense()
    B = -dp.tri_dense()
    try:
        try:
            np.linalg.cholesky(B)
            vals, vecs = sla.eigh(F, B, subset_by_index=[0, count - 1])
        except np.linalg.LinAlgError:
            vals, vecs = sla.eig(F, B)
            if np.max(np.abs(vals.imag)) > 1e-10 * max(1.0, np.max(np.abs(vals.real))):
                raise NumericalFailure("complex eigenvalues in the grid pencil")
            order = np.argsort(vals.real)[:count]
            vals, vecs = vals.real[order], vecs.real[:, order]
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalFailure(f"generalized eigensolve failed: {exc}") from exc
    out = []
    for k in range(count):
        v = vecs[:, k]
        j = int(np.argmax(np.abs(v)))
        out.append(Mode(float(vals[k]), v / v[j]))
    return out


@dataclass
class PencilReport:
    checks: dict
    sign_note: str = SIGN_NOTE

    @property
    def valid(self) -> bool:
        return all(c["passed"] for c in self.checks.values())

    def to_dict(self) -> dict:
        return {"valid": self.valid, "checks": self.checks, "sign_note": self.sign_note}


def as_pencil_report(dp: DiscretePencil) -> PencilReport:
    """Whether the grid bands satisfy the pencil conditions (a_j > 0, gamma_j > 0, real b_j)."""
    a = np.asarray(dp.tri.a)
    b = np.asarray(dp.tri.b)
    g = np.asarray(dp.five.gamma5)

    def check(bad):
        idx = [int(i) for i in np.nonzero(bad)[0]]
        return {"passed": not idx, "witnesses": idx}

    return PencilReport({"a_positive": check(~(a > 0)),
                         "gamma_positive": check(~(g > 0)),
                         "b_real": check(~np.isfinite(b))})


@dataclass
class Refinement:
    sizes: list
    lams: list
    order: float
    error_ratios: list


def refine(make_problem, N: int, clamp: str = "reflect", levels: int = 3) -> Refinement:
    """Smallest eigenvalue at N, 2N, 4N, ... and the observed convergence order.

    The order is log2 of the ratio of successive differences, which needs no
    reference value.
    """
    sizes = [N * 2 ** k for k in range(levels)]
    lams = [solve_eigen(discretize(make_problem(n), clamp), 1)[0].lam for n in sizes]
    diffs = np.abs(np.diff(lams))
    ratios = [float(diffs[k] / diffs[k + 1]) for k in range(len(diffs) - 1)]
    order = float(np.log2(ratios[-1])) if ratios else float("nan")
    return Refinement(sizes, lams, order, ratios)
