"""Global solver for homogeneous problems with two quadratic-form constraints.

``min x'A0x  s.t.  x'A1x = 1,  x'A2x <= 1`` (inequality mode) or ``= 1``
(equality mode). Under a definite pencil assumption and a Slater-type point
the Lagrangian dual is tight, so a point is globally optimal exactly when
there are multipliers ``alpha`` and ``beta`` (``beta >= 0`` in inequality
mode) with

    (A0 + alpha A1 + beta A2) x = 0,   A0 + alpha A1 + beta A2  PSD,
    beta (x'A2x - 1) = 0,              x feasible.

Multiplying the stationarity equation by ``x'`` gives
``q0(x) = -alpha q1(x) - beta q2(x) = -alpha - beta`` under complementarity,
so the dual objective is ``-alpha - beta``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from . import qq1 as _qq1
from .pencil import (
    DEFAULT_TOL,
    Pencil2Result,
    as_sym,
    find_definite_pencil2,
    find_definite_shift,
    lambda_min,
    mat_norm,
    nullspace_basis,
)


class Mode(str, enum.Enum):
    INEQUALITY = "inequality"
    EQUALITY = "equality"


class QQ2Status(str, enum.Enum):
    GLOBAL = "global"
    INFEASIBLE = "infeasible"
    ASSUMPTION_FAILURE = "assumption_failure"


class Compactness(str, enum.Enum):
    COMPACT_E = "CompactE"
    COMPACT_F = "CompactF"
    NOT_COMPACT = "NotCompact"
    UNKNOWN = "Unknown"
    EMPTY = "Empty"


class SolverError(RuntimeError):
    """A solver stage failed; ``stage`` names it."""

    def __init__(self, stage: str, message: str, **diagnostics):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.diagnostics = diagnostics


class RecoveryError(SolverError):
    def __init__(self, message: str, **diagnostics):
        super().__init__("recover_primal", message, **diagnostics)


@dataclass(frozen=True)
class QQ2Problem:
    A0: np.ndarray
    A1: np.ndarray
    A2: np.ndarray
    mode: Mode = Mode.INEQUALITY

    def __post_init__(self):
        mats = [as_sym(M, name) for M, name in
                ((self.A0, "A0"), (self.A1, "A1"), (self.A2, "A2"))]
        if not mats[0].shape == mats[1].shape == mats[2].shape:
            raise ValueError("A0, A1, A2 must have the same dimension")
        if mats[0].shape[0] < 3:
            raise ValueError("two-constraint problems require n >= 3")
        for name, M in zip(("A0", "A1", "A2"), mats):
            object.__setattr__(self, name, M)
        object.__setattr__(self, "mode", Mode(self.mode))

    @property
    def n(self) -> int:
        return self.A0.shape[0]

    @property
    def scale(self) -> float:
        return max(1.0, mat_norm(self.A0), mat_norm(self.A1), mat_norm(self.A2))

    def q(self, x):
        x = np.asarray(x, dtype=float)
        return float(x @ self.A0 @ x), float(x @ self.A1 @ x), float(x @ self.A2 @ x)

    def lagrangian_hessian(self, alpha: float, beta: float) -> np.ndarray:
        return self.A0 + alpha * self.A1 + beta * self.A2

    def transformed(self, P) -> "QQ2Problem":
        """Problem in coordinates ``x = P y``."""
        P = np.asarray(P, dtype=float)
        return QQ2Problem(P.T @ self.A0 @ P, P.T @ self.A1 @ P, P.T @ self.A2 @ P, self.mode)


@dataclass(frozen=True)
class AssumptionReport:
    c1: Pencil2Result
    c2: np.ndarray | None
    c3: np.ndarray | None
    q2_range: tuple[float, float]
    a2_minus_a1_indefinite: bool
    qq1_feasible: bool

    @property
    def c1_holds(self) -> bool:
        return self.c1.found

    def holds_for(self, mode: Mode) -> bool:
        ok = self.c1_holds and self.c2 is not None
        if Mode(mode) is Mode.EQUALITY:
            ok = ok and self.c3 is not None
        return ok

    def missing(self, mode: Mode) -> list[str]:
        out = []
        if not self.c1_holds:
            out.append(f"C1 ({self.c1.status} at resolution {self.c1.resolution})")
        if self.c2 is None:
            out.append("C2")
        if Mode(mode) is Mode.EQUALITY and self.c3 is None:
            out.append("C3")
        return out


def _witness(Aq, A1, target, below: bool, seed: int = 0):
    """Find x with ``x'A1x = 1`` and ``x'Aq x`` strictly below/above ``target``."""

    def check(v):
        d = v @ A1 @ v
        if d <= 1e-12:
            return None
        x = v / math.sqrt(d)
        val = x @ Aq @ x
        ok = val < target - 1e-9 if below else val > target + 1e-9
        return x if ok else None

    sign = 1.0 if below else -1.0
    candidates = []
    for a in (0.0, 1.0, -1.0, 10.0, -10.0, 100.0, -100.0):
        candidates.extend(np.linalg.eigh(sign * Aq + a * A1)[1].T)
    candidates.extend(np.linalg.eigh(A1)[1].T)
    rng = np.random.default_rng(seed)
    candidates.extend(rng.standard_normal((2000, A1.shape[0])))
    for v in candidates:
        x = check(v)
        if x is not None:
            return x
    return None


def _q2_extreme(A2, A1, below: bool):
    """min (below=True) or max of x'A2x over x'A1x = 1, with a point attaining it."""
    sign = 1.0 if below else -1.0
    sol = _qq1.solve_qq1(_qq1.QQ1Problem(sign * A2, A1))
    if sol.status is _qq1.Status.UNBOUNDED:
        return sign * -math.inf, None
    val = sign * sol.value
    return val, sol.x_star


def check_assumptions(problem: QQ2Problem, K: int = 720, tol: float = DEFAULT_TOL) -> AssumptionReport:
    """Test the definite pencil condition and the two strict-feasibility witnesses."""
    A1, A2 = problem.A1, problem.A2
    c1 = find_definite_pencil2(A1, A2, K=K, tol=tol)
    D = A2 - A1
    wD = np.linalg.eigvalsh(D)
    thrD = tol * max(1.0, mat_norm(D))
    indefinite = bool(wD[0] < -thrD and wD[-1] > thrD)
    if not _qq1.qq1_feasible(A1):
        return AssumptionReport(c1, None, None, (math.nan, math.nan), indefinite, False)
    try:
        lo, x_lo = _q2_extreme(A2, A1, below=True)
        hi, x_hi = _q2_extreme(A2, A1, below=False)
    except _qq1.InfeasibleError as exc:
        raise SolverError("check_assumptions", str(exc)) from exc
    c2 = None
    if lo < 1.0 - 1e-9:
        c2 = x_lo if x_lo is not None and problem.q(x_lo)[2] < 1.0 - 1e-9 else _witness(A2, A1, 1.0, True)
    c3 = None
    if hi > 1.0 + 1e-9:
        c3 = x_hi if x_hi is not None and problem.q(x_hi)[2] > 1.0 + 1e-9 else _witness(A2, A1, 1.0, False)
    return AssumptionReport(c1, c2, c3, (lo, hi), indefinite, True)


def is_feasible_set_empty(problem: QQ2Problem, report: AssumptionReport, tol: float = 1e-9) -> bool:
    if not report.qq1_feasible:
        return True
    lo, hi = report.q2_range
    if lo > 1.0 + tol:
        return True
    if problem.mode is Mode.EQUALITY and hi < 1.0 - tol:
        return True
    return False


def check_compactness(problem: QQ2Problem, K: int = 720, tol: float = DEFAULT_TOL):
    """Compactness of the feasible set via definite pencils.

    Equality mode: ``{q1 = 1, q2 = 1}`` is compact iff some ``mu1 A1 + mu2 A2``
    is PD. Inequality mode: ``{q1 = 1, q2 <= 1}`` is compact iff some
    ``mu A1 + A2`` is PD. Returns ``(Compactness, detail)``.
    """
    report = check_assumptions(problem, K=K, tol=tol)
    if is_feasible_set_empty(problem, report):
        return Compactness.EMPTY, None
    if problem.mode is Mode.EQUALITY:
        res = report.c1
        if res.found:
            return Compactness.COMPACT_E, res.mu
        if res.status == "none":
            return Compactness.NOT_COMPACT, None
        return Compactness.UNKNOWN, res.resolution
    found = find_definite_shift(problem.A2, problem.A1, tol=tol)
    if found is not None:
        return Compactness.COMPACT_F, found[0]
    return Compactness.NOT_COMPACT, None


@dataclass(frozen=True)
class DualResult:
    alpha: float
    beta: float
    value: float
    lambda_min_G: float
    trace: list = field(default_factory=list, repr=False)
    iterations: int = 0


def _positive_direction(problem: QQ2Problem, report: AssumptionReport, tol: float):
    """A unit definite direction with ``mu1 + mu2 > 0``, or None."""
    mu = report.c1.mu
    if mu is not None and mu[0] + mu[1] > 1e-12:
        return mu
    res = find_definite_pencil2(problem.A1, problem.A2, K=720, tol=tol,
                                theta_range=(-math.pi / 4, 3 * math.pi / 4))
    if res.found and res.mu[0] + res.mu[1] > 1e-12:
        return res.mu
    return None


def _reduced_dual(problem: QQ2Problem, mu, max_iter: int, trace: list):
    """Maximize ``-alpha - beta`` over ``G(alpha, beta)`` PSD with beta free.

    With ``M = mu1 A1 + mu2 A2`` PD (Cholesky ``L``) and ``N = -mu2 A1 + mu1 A2``,
    write ``(alpha, beta) = s mu + t nu`` where ``nu = (-mu2, mu1)``. For fixed
    ``t`` the smallest feasible ``s`` is ``-lambda_min(C + tD)`` with
    ``C = L^-1 A0 L^-T`` and ``D = L^-1 N L^-T``, leaving the concave function

        d(t) = (mu1 + mu2) lambda_min(C + tD) - (nu1 + nu2) t

    whose supergradient is ``(mu1 + mu2) v'Dv - (nu1 + nu2)`` for a unit bottom
    eigenvector ``v``. Bisection on the supergradient sign is a 1-D central
    cutting-plane method. Returns ``(alpha, beta)`` or None if unbounded.
    """
    A0, A1, A2 = problem.A0, problem.A1, problem.A2
    mu1, mu2 = mu
    nu1, nu2 = -mu2, mu1
    mu_sum, nu_sum = mu1 + mu2, nu1 + nu2
    M = mu1 * A1 + mu2 * A2
    L = np.linalg.cholesky(M)

    def congruent(X):
        Y = linalg.solve_triangular(L, X, lower=True)
        Z = linalg.solve_triangular(L, Y.T, lower=True)
        return 0.5 * (Z + Z.T)

    C = congruent(A0)
    D = congruent(-mu2 * A1 + mu1 * A2)

    def evaluate(t):
        w, V = np.linalg.eigh(C + t * D)
        lam = float(w[0])
        # supergradient range over the bottom eigenspace (kinks)
        thr = 1e-12 * max(1.0, abs(lam), mat_norm(D) * abs(t), mat_norm(C))
        E = V[:, w <= lam + thr]
        DE = E.T @ D @ E
        dw = np.linalg.eigvalsh(0.5 * (DE + DE.T))
        s = -lam
        alpha, beta = s * mu1 + t * nu1, s * mu2 + t * nu2
        trace.append((alpha, beta, -alpha - beta))
        return mu_sum * dw[0] - nu_sum, mu_sum * dw[-1] - nu_sum, alpha, beta

    # slopes this small are rounding noise on a flat stretch of d
    eps = 1e-13 * max(1.0, mu_sum * mat_norm(D) + abs(nu_sum))

    def slope_sign(t):
        g_lo, g_hi, _, _ = evaluate(t)
        if g_lo > eps:
            return 1
        if g_hi < -eps:
            return -1
        return 0

    t0 = 0.0
    s0 = slope_sign(t0)
    if s0 == 0:
        _, _, a, b = evaluate(t0)
        return a, b, 1
    step = 1.0
    lo = hi = t0
    it = 0
    if s0 > 0:
        while True:
            hi = t0 + step
            sg = slope_sign(hi)
            it += 1
            if sg <= 0:
                break
            lo = hi
            step *= 2.0
            if step > 1e14:
                return None
        if sg == 0:
            _, _, a, b = evaluate(hi)
            return a, b, it
    else:
        while True:
            lo = t0 - step
            sg = slope_sign(lo)
            it += 1
            if sg >= 0:
                break
            hi = lo
            step *= 2.0
            if step > 1e14:
                return None
        if sg == 0:
            _, _, a, b = evaluate(lo)
            return a, b, it
    # invariant: slope > 0 at lo, < 0 at hi
    while it < max_iter and hi - lo > 1e-15 * max(1.0, abs(lo), abs(hi)):
        mid = 0.5 * (lo + hi)
        sg = slope_sign(mid)
        it += 1
        if sg == 0:
            lo = hi = mid
            break
        if sg > 0:
            lo = mid
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    _, _, a, b = evaluate(t)
    return a, b, it


def solve_dual(problem: QQ2Problem, report: AssumptionReport | None = None,
               tol: float = DEFAULT_TOL, max_iter: int = 500) -> DualResult:
    """Maximize ``-alpha - beta`` subject to ``A0 + alpha A1 + beta A2`` PSD.

    In inequality mode ``beta >= 0`` is also imposed: if the unconstrained
    (equality-mode) maximizer has ``beta < 0`` then, by concavity, the
    constrained maximizer has ``beta = 0`` and is the single-constraint dual.
    """
    if report is None:
        report = check_assumptions(problem, tol=tol)
    if not report.c1_holds:
        raise SolverError("solve_dual", "no definite pencil: " + ", ".join(report.missing(problem.mode)))
    trace: list = []
    candidates = []
    mu = _positive_direction(problem, report, tol)
    iterations = 0
    if mu is not None:
        out = _reduced_dual(problem, mu, max_iter, trace)
        if out is not None:
            a, b, iterations = out
            if problem.mode is Mode.EQUALITY or b >= 0.0:
                candidates.append((a, b))
    if problem.mode is Mode.INEQUALITY and not candidates:
        sol = _qq1.solve_qq1(_qq1.QQ1Problem(problem.A0, problem.A1), tol)
        if sol.alpha is not None:
            trace.append((sol.alpha, 0.0, -sol.alpha))
            candidates.append((sol.alpha, 0.0))
    if not candidates:
        raise SolverError("solve_dual", "dual problem is unbounded or infeasible")
    a, b = max(candidates, key=lambda ab: -ab[0] - ab[1])
    lam = lambda_min(problem.lagrangian_hessian(a, b))
    return DualResult(float(a), float(b), float(-a - b), lam, trace, iterations)


def _rotate_to_target(M1, M2, y_lo, y_hi, target):
    """Bisect on the arc from y_lo to +-y_hi for ``y'M2y = target`` at ``y'M1y = 1``."""

    def point(theta, y2):
        y = math.cos(theta) * y_lo + math.sin(theta) * y2
        d = y @ M1 @ y
        if d <= 1e-14:
            return None
        return y / math.sqrt(d)

    for y2 in (y_hi, -y_hi):
        thetas = np.linspace(0.0, math.pi / 2, 65)
        pts = [point(t, y2) for t in thetas]
        if any(p is None for p in pts):
            continue
        vals = [p @ M2 @ p - target for p in pts]
        for k in range(len(thetas) - 1):
            if vals[k] <= 0.0 <= vals[k + 1]:
                a, b = thetas[k], thetas[k + 1]
                for _ in range(200):
                    m = 0.5 * (a + b)
                    pm = point(m, y2)
                    if pm @ M2 @ pm - target <= 0.0:
                        a = m
                    else:
                        b = m
                    if b - a < 1e-16:
                        break
                return point(0.5 * (a + b), y2)
    return None


def _random_fallback(M1, M2, target, seed, n_samples=10_000):
    rng = np.random.default_rng(seed)
    d = M1.shape[0]
    Y = rng.standard_normal((n_samples, d))
    den = np.einsum("ij,jk,ik->i", Y, M1, Y)
    ok = den > 1e-12
    Y = Y[ok] / np.sqrt(den[ok])[:, None]
    if len(Y) < 2:
        return None
    vals = np.einsum("ij,jk,ik->i", Y, M2, Y) - target
    below, above = Y[vals <= 0], Y[vals > 0]
    if len(below) == 0 or len(above) == 0:
        return None
    return _rotate_to_target(M1, M2, below[0], above[0], target)


def recover_primal(problem: QQ2Problem, alpha: float, beta: float,
                   tol: float = DEFAULT_TOL, seed: int = 0) -> np.ndarray:
    """Recover a feasible, complementary point in the null space of ``G``."""
    A1, A2 = problem.A1, problem.A2
    G = problem.lagrangian_hessian(alpha, beta)
    N = nullspace_basis(G, tol)
    d = N.shape[1]
    active = problem.mode is Mode.EQUALITY or beta > tol * problem.scale
    if d == 0:
        raise RecoveryError("G has trivial null space", d=0)
    M1 = N.T @ A1 @ N
    M2 = N.T @ A2 @ N
    M1, M2 = 0.5 * (M1 + M1.T), 0.5 * (M2 + M2.T)
    feas_tol = 1e-9
    if d == 1:
        if M1[0, 0] <= 1e-12:
            raise RecoveryError("null vector has q1 <= 0", d=1)
        y = np.array([1.0 / math.sqrt(M1[0, 0])])
        q2 = float(y @ M2 @ y)
        if (active and abs(q2 - 1.0) > 1e-7) or q2 > 1.0 + 1e-7:
            raise RecoveryError("null vector violates the second constraint", d=1, q2=q2)
        return N @ y
    if not _qq1.qq1_feasible(M1):
        raise RecoveryError("q1 is nonpositive on the null space", d=d)
    lo, y_lo = _q2_extreme(M2, M1, below=True)
    hi, y_hi = _q2_extreme(M2, M1, below=False)
    if not active:
        if y_lo is not None and lo <= 1.0 + feas_tol:
            return N @ y_lo
        y = _random_fallback(M1, M2, 1.0, seed)
        if y is None:
            raise RecoveryError("no null-space point with q2 <= 1", d=d, q2_range=(lo, hi))
        return N @ y
    if not (lo <= 1.0 + feas_tol and hi >= 1.0 - feas_tol):
        raise RecoveryError("q2 = 1 not reachable in the null space", d=d, q2_range=(lo, hi))
    if y_lo is not None and abs(lo - 1.0) <= feas_tol:
        return N @ y_lo
    if y_hi is not None and abs(hi - 1.0) <= feas_tol:
        return N @ y_hi
    y = None
    if y_lo is not None and y_hi is not None:
        y = _rotate_to_target(M1, M2, y_lo, y_hi, 1.0)
    if y is None:
        y = _random_fallback(M1, M2, 1.0, seed)
    if y is None:
        raise RecoveryError("rotation and sampling failed", d=d, q2_range=(lo, hi))
    return N @ y


@dataclass(frozen=True)
class CertificateCheck:
    stationarity: bool
    feasibility: bool
    complementarity: bool
    multiplier_sign: bool
    psd: bool
    residuals: dict

    @property
    def passed(self) -> bool:
        return (self.stationarity and self.feasibility and self.complementarity
                and self.multiplier_sign and self.psd)


def verify_global_certificate(problem: QQ2Problem, x, alpha: float, beta: float,
                              tol: float = 1e-7) -> CertificateCheck:
    """Check stationarity, feasibility, complementarity, multiplier sign and PSD-ness."""
    x = np.asarray(x, dtype=float)
    scale = problem.scale * max(1.0, abs(alpha), abs(beta))
    G = problem.lagrangian_hessian(alpha, beta)
    _, q1, q2 = problem.q(x)
    stat = float(np.linalg.norm(G @ x))
    lam = lambda_min(G)
    ineq = problem.mode is Mode.INEQUALITY
    feas = abs(q1 - 1.0) <= tol and (q2 <= 1.0 + tol if ineq else abs(q2 - 1.0) <= tol)
    comp = abs(beta * (q2 - 1.0)) <= tol * scale if ineq else True
    sign = beta >= -tol if ineq else True
    res = {"stationarity": stat, "q1": q1, "q2": q2,
           "complementarity": beta * (q2 - 1.0), "lambda_min_G": lam}
    return CertificateCheck(stat <= tol * scale * max(1.0, float(np.linalg.norm(x))),
                            feas, comp, sign, lam >= -tol * scale, res)


@dataclass(frozen=True)
class GlobalCertificate:
    x_star: np.ndarray
    alpha: float
    beta: float
    value: float
    lambda_min_G: float


@dataclass(frozen=True)
class QQ2Result:
    status: QQ2Status
    x_star: np.ndarray | None = None
    value: float | None = None
    certificate: GlobalCertificate | None = None
    report: AssumptionReport | None = None
    dual: DualResult | None = None
    check: CertificateCheck | None = None


def solve_qq2(problem: QQ2Problem, tol: float = DEFAULT_TOL, K: int = 720,
              seed: int = 0, cert_tol: float = 1e-7) -> QQ2Result:
    """Global minimizer with its multiplier certificate."""
    report = check_assumptions(problem, K=K, tol=tol)
    if is_feasible_set_empty(problem, report):
        return QQ2Result(QQ2Status.INFEASIBLE, report=report)
    if not report.c1_holds:
        return QQ2Result(QQ2Status.ASSUMPTION_FAILURE, report=report)
    # a verified certificate is sufficient on its own, so C2/C3 failures only
    # matter when the dual route cannot produce one
    assumptions_ok = report.holds_for(problem.mode)
    try:
        dual = solve_dual(problem, report, tol=tol)
        x = recover_primal(problem, dual.alpha, dual.beta, tol=tol, seed=seed)
    except SolverError:
        if not assumptions_ok:
            return QQ2Result(QQ2Status.ASSUMPTION_FAILURE, report=report)
        raise
    check = verify_global_certificate(problem, x, dual.alpha, dual.beta, tol=cert_tol)
    if not check.passed:
        if not assumptions_ok:
            return QQ2Result(QQ2Status.ASSUMPTION_FAILURE, report=report, dual=dual, check=check)
        raise SolverError("verify_global_certificate", "certificate check failed",
                          residuals=check.residuals)
    value, _, q2 = problem.q(x)
    cert = GlobalCertificate(x, dual.alpha, dual.beta, value, dual.lambda_min_G)
    return QQ2Result(QQ2Status.GLOBAL, x, value, cert, report, dual, check)
