"""Total least squares with an ellipsoidal constraint ``|Lx|^2 <= rho``.

``min |Ax - b|^2 / (|x|^2 + 1)``. With ``(y, z) = (x, 1) / sqrt(|x|^2 + 1)``
the fractional objective becomes ``|Ay - bz|^2`` on the unit sphere and the
constraint becomes ``y'L'Ly - rho z^2 <= 0``, written as
``(y'y + z^2) + (y'L'Ly - rho z^2) <= 1`` so that both constraint matrices
share the identity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from ..qq2_global import Mode, QQ2Problem, QQ2Status, SolverError, solve_qq2
from ..qq2_local import PointClassification, Verdict, classify_point


class ExistenceAssumptionError(ValueError):
    pass


@dataclass(frozen=True)
class ETLSProblem:
    A: np.ndarray
    b: np.ndarray
    L: np.ndarray
    rho: float

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        L = np.atleast_2d(np.asarray(self.L, dtype=float))
        if A.shape[0] != b.shape[0]:
            raise ValueError("A and b have incompatible shapes")
        if L.shape[1] != A.shape[1]:
            raise ValueError("L must have as many columns as A")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(L))):
            raise ValueError("non-finite data")
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if np.linalg.matrix_rank(L, tol=1e-10 * max(1.0, np.linalg.norm(L, 2))) != L.shape[0]:
            raise ValueError("L must have full row rank")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "rho", float(self.rho))

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def r(self) -> int:
        return self.L.shape[0]

    def objective(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(np.sum((self.A @ x - self.b) ** 2) / (x @ x + 1.0))


def etls_qq2(E: ETLSProblem) -> QQ2Problem:
    n = E.n
    Ab = np.column_stack([E.A, -E.b])
    A0 = Ab.T @ Ab
    A1 = np.eye(n + 1)
    C = np.zeros((n + 1, n + 1))
    C[:n, :n] = E.L.T @ E.L
    C[n, n] = -E.rho
    return QQ2Problem(A0, A1, A1 + C, Mode.INEQUALITY)


def existence_assumption(E: ETLSProblem, tol: float = 1e-10):
    """``(holds, detail)``: ``r = n``, or the augmented matrix restricted to
    ``null(L)`` has a smaller bottom eigenvalue than ``F'A'AF``."""
    if E.r == E.n:
        return True, {"branch": "r == n"}
    F = linalg.null_space(E.L)
    AF = E.A @ F
    aug = np.column_stack([AF, -E.b])
    lam_aug = float(np.linalg.eigvalsh(aug.T @ aug)[0])
    lam_f = float(np.linalg.eigvalsh(AF.T @ AF)[0])
    scale = max(1.0, lam_f)
    return lam_aug < lam_f - tol * scale, {"lambda_min_augmented": lam_aug,
                                           "lambda_min_restricted": lam_f}


@dataclass(frozen=True)
class ETLSSolution:
    x: np.ndarray
    value: float
    y: np.ndarray
    z: float
    alpha: float
    beta: float


def solve_etls(E: ETLSProblem, tol: float = 1e-8, seed: int = 0) -> ETLSSolution:
    ok, detail = existence_assumption(E)
    if not ok:
        raise ExistenceAssumptionError(f"existence assumption fails: {detail}")
    if E.n + 1 < 3:
        raise ValueError("need n >= 2 for the two-constraint reformulation")
    P = etls_qq2(E)
    res = solve_qq2(P, tol=tol, seed=seed)
    if res.status is not QQ2Status.GLOBAL:
        raise SolverError("solve_etls", f"reformulated solve returned {res.status.value}")
    yz = res.x_star
    if yz[-1] < 0:
        yz = -yz
    z = float(yz[-1])
    if abs(z) <= 1e-10:
        raise SolverError("solve_etls", "minimizer has z = 0, contradicting the existence "
                          "assumption", z=z)
    y = yz[:-1]
    x = y / z
    value = float(np.sum((E.A @ y - E.b * z) ** 2))
    return ETLSSolution(x, value, y, z, res.certificate.alpha, res.certificate.beta)


def to_sphere(x):
    x = np.asarray(x, dtype=float)
    return np.append(x, 1.0) / np.sqrt(x @ x + 1.0)


def classify_etls_point(E: ETLSProblem, x, tol: float = 1e-8,
                        global_val: float | None = None) -> PointClassification:
    """Classify ``x`` through its image on the sphere; the map is a
    value-preserving homeomorphism onto the ``z > 0`` part, so verdicts carry
    over unchanged."""
    x = np.asarray(x, dtype=float)
    Lx = E.L @ x
    if Lx @ Lx > E.rho * (1.0 + tol) + tol:
        return PointClassification(Verdict.INFEASIBLE, E.objective(x), reason="|Lx|^2 > rho")
    return classify_point(etls_qq2(E), to_sphere(x), tol, global_val=global_val)
