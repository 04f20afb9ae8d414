"""Single-constraint homogeneous problems.

``min x'A0x  s.t.  x'A1x = 1`` together with the inequality form
``x'A1x <= 1``, the generalized Rayleigh quotient and total least squares.
Every local minimizer of the equality form is global, so the only
certificate needed is a multiplier ``alpha`` with ``A0 + alpha A1`` PSD.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .pencil import (
    DEFAULT_TOL,
    as_sym,
    lambda_min,
    mat_norm,
    maximize_lambda_min_shift,
    nullspace_basis,
)


class Status(str, enum.Enum):
    ATTAINED = "attained"
    UNBOUNDED = "unbounded"
    UNATTAINED = "unattained"
    INFEASIBLE = "infeasible"


class QQ1Verdict(str, enum.Enum):
    INFEASIBLE = "Infeasible"
    NOT_STATIONARY = "NotStationary"
    STATIONARY_NOT_GLOBAL = "StationaryNotGlobal"
    GLOBAL = "Global"


class InfeasibleError(ValueError):
    """The constraint set ``{x : x'A1x = 1}`` is empty."""


@dataclass(frozen=True)
class QQ1Problem:
    A0: np.ndarray
    A1: np.ndarray

    def __post_init__(self):
        A0 = as_sym(self.A0, "A0")
        A1 = as_sym(self.A1, "A1")
        if A0.shape != A1.shape:
            raise ValueError("A0 and A1 must have the same dimension")
        object.__setattr__(self, "A0", A0)
        object.__setattr__(self, "A1", A1)

    @property
    def n(self) -> int:
        return self.A0.shape[0]


@dataclass(frozen=True)
class QQ1Solution:
    status: Status
    x_star: np.ndarray | None
    alpha: float | None
    value: float

    @property
    def attained(self) -> bool:
        return self.status is Status.ATTAINED


def qq1_feasible(A1) -> bool:
    return float(np.linalg.eigvalsh(as_sym(A1))[-1]) > 1e-12


def _gershgorin_radius(M: np.ndarray) -> float:
    return float(np.max(np.sum(np.abs(M), axis=1))) if M.size else 0.0


def _left_endpoint(A0, A1, alpha_feas, resolution):
    """Smallest alpha with ``lambda_min(A0 + alpha A1) >= 0``, by bisection.

    ``alpha_feas`` must be feasible; the function is concave in alpha and tends
    to -inf as alpha -> -inf because A1 has a positive eigenvalue.
    """

    def feasible(a):
        return lambda_min(A0 + a * A1) >= 0.0

    # Gershgorin: lambda_min(A0 + aA1) <= r0 + a * lambda_max(A1) for the top
    # eigenvector, which is negative once a < -r0 / lambda_max(A1)
    lam_max = float(np.linalg.eigvalsh(A1)[-1])
    r0 = _gershgorin_radius(A0)
    lo = min(alpha_feas, -r0 / lam_max) - 1.0
    while feasible(lo):
        lo = 2.0 * lo - 1.0
    hi = alpha_feas
    while hi - lo > resolution * max(1.0, abs(lo), abs(hi)):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi


def solve_qq1(problem: QQ1Problem, tol: float = DEFAULT_TOL) -> QQ1Solution:
    """Globally minimize ``x'A0x`` over ``x'A1x = 1``.

    The optimal multiplier is the left end of the interval of alpha on which
    ``A0 + alpha A1`` is PSD; the optimal value is ``-alpha``. The minimizer
    is recovered from the null space of ``A0 + alpha A1``.
    """
    A0, A1 = problem.A0, problem.A1
    if not qq1_feasible(A1):
        raise InfeasibleError("x'A1x = 1 has no solution: A1 has no positive eigenvalue")
    scale = max(1.0, mat_norm(A0), mat_norm(A1))
    mu, best, unbounded = maximize_lambda_min_shift(A0, A1)
    if best < -tol * scale and not unbounded:
        return QQ1Solution(Status.UNBOUNDED, None, None, -np.inf)
    if best < 0.0:
        # maximum of lambda_min is zero up to rounding: the PSD interval is a point
        alpha = mu
    else:
        alpha = _left_endpoint(A0, A1, mu, 1e-12)

    G = A0 + alpha * A1
    N = nullspace_basis(G, tol)
    if N.shape[1] == 0:
        # bisection stopped on the feasible side; widen the threshold slightly
        w, V = np.linalg.eigh(G)
        N = V[:, :1]
    M1 = N.T @ A1 @ N
    w1, V1 = np.linalg.eigh(0.5 * (M1 + M1.T))
    if w1[-1] < 1e-10:
        return QQ1Solution(Status.UNATTAINED, None, float(alpha), -float(alpha))
    x = N @ V1[:, -1] / np.sqrt(w1[-1])
    x = x / np.sqrt(x @ A1 @ x)
    value = float(x @ A0 @ x)
    return QQ1Solution(Status.ATTAINED, x, float(alpha), value)


def classify_qq1_point(problem: QQ1Problem, x, tol: float = 1e-8) -> QQ1Verdict:
    """Verdict for a candidate point of the equality-constrained problem.

    There is no local non-global verdict: every local minimizer is global.
    Stationary points above the optimal value are saddles or maximizers.
    """
    A0, A1 = problem.A0, problem.A1
    x = np.asarray(x, dtype=float)
    if abs(x @ A1 @ x - 1.0) > tol:
        return QQ1Verdict.INFEASIBLE
    value = float(x @ A0 @ x)
    scale = max(1.0, mat_norm(A0), mat_norm(A1)) * max(1.0, float(np.linalg.norm(x)))
    if np.linalg.norm((A0 - value * A1) @ x) > tol * scale:
        return QQ1Verdict.NOT_STATIONARY
    sol = solve_qq1(problem)
    if sol.status is Status.UNBOUNDED or value > sol.value + tol * scale:
        return QQ1Verdict.STATIONARY_NOT_GLOBAL
    return QQ1Verdict.GLOBAL


def solve_qc1qp_ineq(A0, A1, tol: float = DEFAULT_TOL) -> QQ1Solution:
    """Globally minimize ``x'A0x`` over ``x'A1x <= 1``.

    Either ``A0`` is PSD and the origin is optimal, or the boundary problem
    must have a nonnegative multiplier; otherwise the objective is unbounded.
    """
    A0 = as_sym(A0, "A0")
    A1 = as_sym(A1, "A1")
    n = A0.shape[0]
    if lambda_min(A0) >= -tol * max(1.0, mat_norm(A0)):
        return QQ1Solution(Status.ATTAINED, np.zeros(n), 0.0, 0.0)
    if not qq1_feasible(A1):
        # every x satisfies x'A1x <= 0 < 1, so a negative curvature ray is feasible
        return QQ1Solution(Status.UNBOUNDED, None, None, -np.inf)
    sol = solve_qq1(QQ1Problem(A0, A1), tol)
    if sol.status is Status.UNBOUNDED or sol.alpha < 0.0:
        return QQ1Solution(Status.UNBOUNDED, None, None, -np.inf)
    return sol


def solve_rq(A0, A1):
    """Minimize the generalized Rayleigh quotient ``x'A0x / x'A1x`` for A1 PD.

    Reduces to an ordinary symmetric eigenproblem through the Cholesky factor
    of A1; the returned vector satisfies ``x'A1x = 1``.
    """
    A0 = as_sym(A0, "A0")
    A1 = as_sym(A1, "A1")
    try:
        L = np.linalg.cholesky(A1)
    except np.linalg.LinAlgError as exc:
        raise ValueError("A1 must be positive definite") from exc
    Y = linalg.solve_triangular(L, A0, lower=True)
    C = linalg.solve_triangular(L, Y.T, lower=True)
    w, V = np.linalg.eigh(0.5 * (C + C.T))
    x = linalg.solve_triangular(L.T, V[:, 0], lower=False)
    x = x / np.sqrt(x @ A1 @ x)
    return float(w[0]), x


class TLSAtInfinityError(ValueError):
    """Every minimizing eigenvector of the augmented matrix has zero last entry."""


def tls_augmented(A, b) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)
    Ab = np.column_stack([A, -b])
    return Ab.T @ Ab


def solve_tls(A, b, tol: float = 1e-10):
    """Total least squares: minimize ``|Ax - b|^2 / (|x|^2 + 1)``.

    With ``(y, z) = (x, 1) / sqrt(|x|^2 + 1)`` this becomes the sphere-constrained
    problem ``min |Ay - bz|^2`` s.t. ``|y|^2 + z^2 = 1``, whose value is the
    smallest eigenvalue of the augmented Gram matrix.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)
    if A.shape[0] != b.shape[0]:
        raise ValueError("A and b have incompatible shapes")
    n = A.shape[1]
    M = tls_augmented(A, b)
    w, V = np.linalg.eigh(M)
    thr = max(1e-12, tol) * max(1.0, mat_norm(M))
    E = V[:, np.abs(w - w[0]) <= thr]
    # pick the unit vector in the bottom eigenspace with the largest |z|
    zrow = E[n, :]
    znorm = float(np.linalg.norm(zrow))
    if znorm <= tol:
        raise TLSAtInfinityError("TLS solution at infinity")
    yz = E @ (zrow / znorm)
    x = yz[:n] / yz[n]
    value = float(np.sum((A @ x - b) ** 2) / (x @ x + 1.0))
    return x, value
