"""Trust-region subproblem ``min x'Qx + 2b'x  s.t.  |x| <= 1``.

Homogenized with ``z^2 = 1`` as the equality and ``|x|^2 <= 1`` as the
inequality, giving an ``(n+1)``-dimensional two-constraint instance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from ..pencil import as_sym, mat_norm
from ..qq2_global import Mode, QQ2Problem, QQ2Status, SolverError, solve_qq2
from ..qq2_local import PointClassification, classify_point


@dataclass(frozen=True)
class TRSProblem:
    Q: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        Q = as_sym(self.Q, "Q")
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if b.shape[0] != Q.shape[0]:
            raise ValueError("Q and b have incompatible shapes")
        if not np.all(np.isfinite(b)):
            raise ValueError("b has non-finite entries")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    @property
    def scale(self) -> float:
        return max(1.0, mat_norm(self.Q), float(np.linalg.norm(self.b)))

    def objective(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(x @ self.Q @ x + 2.0 * self.b @ x)


@dataclass(frozen=True)
class TRSLocalCertificate:
    """Residuals of the local non-global conditions at ``(y, mu)``."""

    stationarity: float
    sphere: float
    projected_lambda_min: float
    lambda_min_shifted: float
    mu: float

    def passed(self, tol: float = 1e-8, scale: float = 1.0) -> bool:
        return (self.mu > 0.0 and self.stationarity <= tol * scale and self.sphere <= tol
                and self.projected_lambda_min > tol * scale
                and self.lambda_min_shifted < -tol * scale)


@dataclass(frozen=True)
class TRSLocalNonGlobal:
    y_star: np.ndarray
    mu: float
    certificate: TRSLocalCertificate


@dataclass(frozen=True)
class TRSSolution:
    global_x: np.ndarray
    global_value: float
    mu: float
    local_nonglobal: TRSLocalNonGlobal | None = None
    hard_case: bool = False
    more_sorensen: dict = field(default_factory=dict)


def homogenize_trs_matrices(T: TRSProblem):
    n = T.n
    A0 = np.zeros((n + 1, n + 1))
    A0[:n, :n] = T.Q
    A0[:n, n] = T.b
    A0[n, :n] = T.b
    A1 = np.zeros((n + 1, n + 1))
    A1[n, n] = 1.0
    A2 = np.zeros((n + 1, n + 1))
    A2[:n, :n] = np.eye(n)
    return A0, A1, A2


def homogenize_trs(T: TRSProblem) -> QQ2Problem:
    """Two-constraint instance with ``q1 = z^2`` and ``q2 = |x|^2``."""
    if T.n < 2:
        raise ValueError("homogenized instance needs n + 1 >= 3; use homogenize_trs_matrices")
    return QQ2Problem(*homogenize_trs_matrices(T), Mode.INEQUALITY)


def more_sorensen_residuals(T: TRSProblem, x, mu: float) -> dict:
    x = np.asarray(x, dtype=float)
    H = T.Q + mu * np.eye(T.n)
    return {
        "stationarity": float(np.linalg.norm(H @ x + T.b)),
        "complementarity": float(abs(mu * (1.0 - x @ x))),
        "feasibility": float(max(0.0, x @ x - 1.0)),
        "lambda_min_shifted": float(np.linalg.eigvalsh(H)[0]),
        "mu": float(mu),
    }


def _more_sorensen_ok(res: dict, tol: float, scale: float) -> bool:
    return (res["mu"] >= -tol and res["stationarity"] <= tol * scale
            and res["complementarity"] <= tol * scale and res["feasibility"] <= tol
            and res["lambda_min_shifted"] >= -tol * scale)


def _is_hard_case(T: TRSProblem, mu: float, tol: float) -> bool:
    lam, U = np.linalg.eigh(T.Q)
    if lam[0] >= 0:
        return False
    bottom = U[:, np.abs(lam - lam[0]) <= tol * T.scale]
    return (abs(mu + lam[0]) <= 1e-6 * T.scale
            and float(np.linalg.norm(bottom.T @ T.b)) <= 1e-6 * T.scale)


def solve_trs_global(T: TRSProblem, tol: float = 1e-8, seed: int = 0) -> TRSSolution:
    """Global minimizer through the homogenized two-constraint solver.

    The multiplier of ``|x|^2 <= 1`` in the homogenized certificate is the
    trust-region multiplier; the Moré-Sorensen conditions are re-checked on
    the returned point.
    """
    P = homogenize_trs(T)
    res = solve_qq2(P, tol=tol, seed=seed)
    if res.status is not QQ2Status.GLOBAL:
        raise SolverError("solve_trs_global", f"homogenized solve returned {res.status.value}")
    xz = res.x_star
    z = xz[-1]
    if abs(z) < 1e-12:
        raise SolverError("solve_trs_global", "homogenized minimizer has z = 0")
    x = xz[:-1] / z
    mu = max(0.0, res.certificate.beta)
    ms = more_sorensen_residuals(T, x, mu)
    if not _more_sorensen_ok(ms, tol, T.scale):
        raise SolverError("solve_trs_global", "Moré-Sorensen check failed", **ms)
    local = find_trs_local_nonglobal(T, tol=tol)
    return TRSSolution(x, T.objective(x), mu, local, _is_hard_case(T, mu, tol), ms)


def trs_local_certificate(T: TRSProblem, y, mu: float) -> TRSLocalCertificate:
    """Residuals of: ``(Q + mu I) y = -b``, ``|y| = 1``, ``Q + mu I`` positive
    definite on ``y``'s orthogonal complement and not PSD, ``mu > 0``."""
    y = np.asarray(y, dtype=float)
    H = T.Q + mu * np.eye(T.n)
    # orthonormal basis of y-perp
    _, _, Vt = np.linalg.svd(y.reshape(1, -1))
    W = Vt[1:].T
    HW = W.T @ H @ W
    proj = float(np.linalg.eigvalsh(0.5 * (HW + HW.T))[0]) if HW.size else np.inf
    return TRSLocalCertificate(
        float(np.linalg.norm(H @ y + T.b)),
        float(abs(y @ y - 1.0)),
        proj,
        float(np.linalg.eigvalsh(H)[0]),
        float(mu),
    )


def trs_secular_roots(T: TRSProblem, margin: float = 1e-9):
    """All roots of ``phi(mu) = |(Q + mu I)^-1 b|^2 - 1`` on ``(max(0, -l2), -l1)``.

    On that interval ``phi`` is a sum of convex terms, so it has at most two
    roots, one on each side of its minimizer. Returns ``[(y, mu), ...]``.
    """
    lam, U = np.linalg.eigh(T.Q)
    if T.n < 2 or lam[0] >= 0:
        return []
    lo_mu, hi_mu = max(0.0, -lam[1]), -lam[0]
    eps = margin * max(1.0, abs(lam[0]), abs(lam[1]))
    lo, hi = lo_mu + eps, hi_mu - eps
    if lo >= hi:
        return []
    c = U.T @ T.b

    def phi(mu):
        return float(np.sum((c / (lam + mu)) ** 2) - 1.0)

    m = optimize.minimize_scalar(phi, bounds=(lo, hi), method="bounded",
                                 options={"xatol": 1e-12 * max(1.0, hi)})
    mu_min = float(m.x)
    if phi(mu_min) > 0.0:
        return []
    roots = []
    if phi(lo) > 0.0:
        roots.append(optimize.brentq(phi, lo, mu_min, xtol=1e-15, maxiter=500))
    if phi(hi) > 0.0:
        roots.append(optimize.brentq(phi, mu_min, hi, xtol=1e-15, maxiter=500))
    out = []
    for mu in roots:
        y = -U @ (c / (lam + mu))
        out.append((y, float(mu)))
    return out


def find_trs_local_nonglobal(T: TRSProblem, tol: float = 1e-8):
    """The local non-global minimizer and its multiplier, or None.

    Needs a simple negative smallest eigenvalue; candidate multipliers lie
    strictly between ``max(0, -l2)`` and ``-l1``.
    """
    lam = np.linalg.eigvalsh(T.Q)
    if T.n < 2 or lam[0] >= 0 or lam[1] - lam[0] <= tol * T.scale:
        return None
    certified = []
    for y, mu in trs_secular_roots(T):
        cert = trs_local_certificate(T, y, mu)
        if cert.passed(tol, T.scale):
            certified.append(TRSLocalNonGlobal(y, mu, cert))
    if len(certified) > 1:
        raise SolverError("find_trs_local_nonglobal",
                          "two certified local non-global minimizers (uniqueness violated)")
    return certified[0] if certified else None


def classify_trs_point(T: TRSProblem, y, tol: float = 1e-8,
                       global_val: float | None = None) -> PointClassification:
    """Classify ``(y, 1)`` in the homogenized instance."""
    x = np.append(np.asarray(y, dtype=float), 1.0)
    return classify_point(homogenize_trs(T), x, tol, global_val=global_val)


def generate_trs_hard_case(lam, U=None, weights=None) -> TRSProblem:
    """Instance whose homogenization has a strict global minimizer failing SOSC.

    ``b`` is orthogonal to the bottom eigenspace of ``Q = U diag(lam) U'`` and
    ``sum_{j>m} (u_j'b / (l_j - l_1))^2 = 1``. ``weights`` sets the direction
    of ``b`` in ``span{u_{m+1}, ..., u_n}`` (length ``n - m`` or ``n`` with
    zeros in the first ``m`` slots); it is rescaled to meet the sum exactly.
    """
    lam = np.asarray(lam, dtype=float)
    n = lam.size
    if np.any(np.diff(lam) < 0):
        raise ValueError("eigenvalues must be ascending")
    if lam[0] >= 0:
        raise ValueError("hard case needs lambda_1 < 0")
    U = np.eye(n) if U is None else np.asarray(U, dtype=float)
    if not np.allclose(U.T @ U, np.eye(n), atol=1e-10):
        raise ValueError("U must be orthogonal")
    m = int(np.sum(np.abs(lam - lam[0]) <= 1e-12 * max(1.0, abs(lam[0]))))
    if m == n:
        raise ValueError("no hard case exists: b must vanish but the sum would be empty")
    if weights is None:
        w = np.ones(n - m)
    else:
        w = np.asarray(weights, dtype=float).reshape(-1)
        if w.size == n:
            if np.any(w[:m] != 0):
                raise ValueError("weights on the bottom eigenspace must be zero")
            w = w[m:]
        elif w.size != n - m:
            raise ValueError(f"weights must have length {n - m} or {n}")
    gaps = lam[m:] - lam[0]
    s = float(np.sum((w / gaps) ** 2))
    if s == 0.0:
        raise ValueError("all weights are zero")
    coef = w / np.sqrt(s)
    b = U[:, m:] @ coef
    Q = U @ np.diag(lam) @ U.T
    return TRSProblem(Q, b)


@dataclass(frozen=True)
class SOSCReport:
    strict_global: bool
    sosc_holds: bool
    mu: float
    global_x: np.ndarray
    global_value: float
    projected_lambda_min: float
    minimizer_set_dim: int


def check_sosc_at_global(T: TRSProblem, tol: float = 1e-8) -> SOSCReport:
    """Strictness of the global minimizer and the standard SOSC there.

    Global minimizers are the solutions of ``(Q + mu I) x = -b`` with the
    Moré-Sorensen multiplier: ``xbar + N a`` for ``N`` spanning the null
    space of ``Q + mu I``, restricted to ``|x| = 1`` when ``mu > 0`` and to
    ``|x| <= 1`` otherwise. The minimizer is strict (unique, so isolated)
    iff the null space is trivial or ``|xbar| = 1``. SOSC is evaluated in
    the homogenized instance on the tangent space of the constraints with
    positive multipliers.
    """
    sol = solve_trs_global(T, tol=tol)
    mu, x = sol.mu, sol.global_x
    n = T.n
    H = T.Q + mu * np.eye(n)
    w, V = np.linalg.eigh(H)
    thr = 1e-7 * T.scale
    N = V[:, np.abs(w) <= thr]
    R = V[:, np.abs(w) > thr]
    xbar = -R @ ((R.T @ T.b) / w[np.abs(w) > thr])
    d = N.shape[1]
    if d == 0:
        strict = True
        set_dim = 0
    else:
        gap = 1.0 - float(xbar @ xbar)
        set_dim = 0 if gap <= 1e-7 else (d - 1 if mu > thr else d)
        strict = set_dim == 0

    # homogenized Hessian G = [[Q + mu I, b], [b', alpha]] at (x, 1)
    A0, A1, A2 = homogenize_trs_matrices(T)
    xz = np.append(x, 1.0)
    alpha = -float(T.b @ x)
    G = A0 + alpha * A1 + mu * A2
    cons = [A1 @ xz]
    if mu > tol * T.scale:
        cons.append(A2 @ xz)
    J = np.column_stack(cons)
    U_, s_, _ = np.linalg.svd(J, full_matrices=True)
    rank = int(np.sum(s_ > 1e-12 * max(1.0, s_[0])))
    W = U_[:, rank:]
    HW = W.T @ G @ W
    proj = float(np.linalg.eigvalsh(0.5 * (HW + HW.T))[0]) if HW.size else np.inf
    sosc = proj > tol * max(1.0, mat_norm(G))
    return SOSCReport(bool(strict), bool(sosc), float(mu), x, sol.global_value, proj, set_dim)
