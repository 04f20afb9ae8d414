"""Local optimality analysis for the two-constraint problem.

Classification rules used by :func:`classify_point`:

* a local minimizer with the inequality inactive is global;
* at a local minimizer where the constraint gradients ``A1x``, ``A2x`` are
  parallel, the point is global;
* at a local non-global minimizer the inequality multiplier is strictly
  positive, ``G = A0 + alpha A1 + beta A2`` has exactly one negative
  eigenvalue, and ``x`` is a *strict* local non-global minimizer exactly when
  ``G`` restricted to ``{v : v'A1x = v'A2x = 0}`` is positive definite while
  ``G`` itself is not PSD;
* a local non-global minimizer failing that restricted positivity is
  non-strict, witnessed by a tangent ``v`` with ``v'Gv = 0`` and
  ``v'(A2 - A1)v = 0``.
"""

from __future__ import annotations

import enum
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import qq1 as _qq1
from .manifold import kkt_newton_polish, project_to_manifold, riemannian_descent, scale_to_q1
from .pencil import Inertia, inertia, mat_norm, nullspace_basis, orth_complement
from .qq2_global import Mode, QQ2Problem, QQ2Status, SolverError, check_assumptions, solve_qq2


class Verdict(str, enum.Enum):
    INFEASIBLE = "Infeasible"
    INTERIOR_GLOBAL = "InteriorGlobal"
    INTERIOR_NOT_LOCAL = "InteriorNotLocal"
    GLOBAL_BOUNDARY = "GlobalBoundary"
    STRICT_LOCAL_NON_GLOBAL = "StrictLocalNonGlobal"
    NON_STRICT_CANDIDATE = "NonStrictLocalNonGlobalCandidate"
    NOT_LOCAL_MINIMIZER = "NotLocalMinimizer"
    LICQ_FAIL_GLOBAL = "LICQFailGlobal"
    LICQ_FAIL_NOT_GLOBAL = "LICQFailNotGlobal"


LOCAL_NON_GLOBAL = (Verdict.STRICT_LOCAL_NON_GLOBAL, Verdict.NON_STRICT_CANDIDATE)


class InteriorPointError(ValueError):
    pass


@dataclass(frozen=True)
class KKTData:
    x: np.ndarray
    alpha: float
    beta: float
    stationarity_residual: float
    licq_ok: bool
    gram_lambda_min: float
    W: np.ndarray


@dataclass(frozen=True)
class NonStrictDirection:
    v_bar: np.ndarray
    residuals: dict


@dataclass(frozen=True)
class PointClassification:
    verdict: Verdict
    value: float
    global_value: float | None = None
    kkt: KKTData | None = None
    inertia: Inertia | None = None
    projected_spectrum: np.ndarray | None = None
    nonstrict: NonStrictDirection | None = None
    # +1 keeps q2 = 1 as written; -1 reads it as 2 q1 - q2 = 1 so the
    # multiplier is positive (equality mode only)
    orientation: int = 1
    reason: str = ""

    @property
    def oriented_beta(self) -> float | None:
        if self.kkt is None:
            return None
        return self.orientation * self.kkt.beta


def _feasibility(problem: QQ2Problem, x, tol):
    _, q1, q2 = problem.q(x)
    if abs(q1 - 1.0) > tol:
        return False, q2
    if problem.mode is Mode.EQUALITY:
        return abs(q2 - 1.0) <= tol, q2
    return q2 <= 1.0 + tol, q2


def compute_kkt(problem: QQ2Problem, x, tol: float = 1e-8) -> KKTData:
    """Multipliers, LICQ test and tangent basis at a point with both constraints active."""
    x = np.asarray(x, dtype=float)
    feasible, q2 = _feasibility(problem, x, tol)
    if not feasible:
        raise ValueError("x is infeasible")
    if q2 < 1.0 - tol:
        raise InteriorPointError("interior point: q2(x) < 1, boundary KKT not applicable")
    A0, A1, A2 = problem.A0, problem.A1, problem.A2
    J = np.column_stack([A1 @ x, A2 @ x])
    gram = J.T @ J
    gram_min = float(np.linalg.eigvalsh(gram)[0])
    gscale = (problem.scale * max(1.0, float(np.linalg.norm(x)))) ** 2
    licq = gram_min > tol * gscale
    coef, *_ = np.linalg.lstsq(J, -(A0 @ x), rcond=None)
    alpha, beta = float(coef[0]), float(coef[1])
    G = problem.lagrangian_hessian(alpha, beta)
    res = float(np.linalg.norm(G @ x))
    W = orth_complement(J) if licq else orth_complement(J[:, :1])
    return KKTData(x, alpha, beta, res, bool(licq), gram_min, W)


def find_nonstrict_direction(problem: QQ2Problem, x, kkt: KKTData, tol: float = 1e-8):
    """Tangent ``v`` with ``v'Gv = 0`` and ``v'(A2 - A1)v = 0``, or None.

    Restricted to the null space of ``W'GW`` the second condition is a
    quadratic form ``S``; a unit root exists iff ``S`` is not definite, and the
    two extreme eigenvectors give one in closed form.
    """
    A1, A2 = problem.A1, problem.A2
    G = problem.lagrangian_hessian(kkt.alpha, kkt.beta)
    W = kkt.W
    H = W.T @ G @ W
    thr = tol * max(1.0, mat_norm(G))
    w, V = np.linalg.eigh(0.5 * (H + H.T))
    N0 = V[:, np.abs(w) <= thr]
    if N0.shape[1] == 0:
        return None
    B = W @ N0
    D = A2 - A1
    S = B.T @ D @ B
    s, U = np.linalg.eigh(0.5 * (S + S.T))
    dthr = tol * max(1.0, mat_norm(D))
    if s[0] > dthr or s[-1] < -dthr:
        return None
    if s[-1] - s[0] <= dthr or abs(s[0]) <= dthr:
        u = U[:, 0]
    elif abs(s[-1]) <= dthr:
        u = U[:, -1]
    else:
        u = np.sqrt(s[-1]) * U[:, 0] + np.sqrt(-s[0]) * U[:, -1]
    v = B @ u
    v = v / np.linalg.norm(v)
    residuals = {
        "vA1x": float(v @ A1 @ x),
        "vA2x": float(v @ A2 @ x),
        "vGv": float(v @ G @ v),
        "vDv": float(v @ D @ v),
    }
    return NonStrictDirection(v, residuals)


def _licq_fail_curve_test(problem: QQ2Problem, x, tol):
    """Feasible-curve test at a point where ``(A2 - A1)x = 0``.

    Curves ``(x + tv) / sqrt(q1(x + tv))`` with ``v'(A2 - A1)v = 0`` stay on
    both level sets. Returns a reason string if one of them decreases the
    objective, else None.
    """
    A0, A1 = problem.A0, problem.A1
    D = problem.A2 - A1
    w_ = -float(x @ A0 @ x)
    H = A0 + w_ * A1
    r = H @ x
    wD = np.linalg.eigvalsh(D)
    thrD = tol * max(1.0, mat_norm(D))
    indefinite = wD[0] < -thrD and wD[-1] > thrD
    scale = problem.scale
    if indefinite:
        if np.linalg.norm(r) > tol * scale:
            return "first-order descent along a feasible curve"
        n = problem.n
        inner = QQ2Problem(H, np.eye(n), np.eye(n) + D, Mode.EQUALITY)
        sol = solve_qq2(inner)
        if sol.status is QQ2Status.GLOBAL and sol.value < -tol * scale:
            return "negative curvature along a feasible curve"
        return None
    N = nullspace_basis(D, tol)
    if N.shape[1] == 0:
        return None
    if np.linalg.norm(N.T @ r) > tol * scale:
        return "first-order descent along a feasible curve"
    Hn = N.T @ H @ N
    if np.linalg.eigvalsh(0.5 * (Hn + Hn.T))[0] < -tol * scale:
        return "negative curvature along a feasible curve"
    return None


def global_value(problem: QQ2Problem) -> float:
    sol = solve_qq2(problem)
    if sol.status is not QQ2Status.GLOBAL:
        raise SolverError("classify_point", f"global solve returned {sol.status.value}")
    return float(sol.value)


def classify_point(problem: QQ2Problem, x, tol: float = 1e-8,
                   global_val: float | None = None) -> PointClassification:
    """Decide whether ``x`` is a global, strict/non-strict local non-global, or
    non-minimizing point."""
    x = np.asarray(x, dtype=float)
    value = float(x @ problem.A0 @ x)
    feasible, q2 = _feasibility(problem, x, tol)
    if not feasible:
        return PointClassification(Verdict.INFEASIBLE, value, reason="constraint violated")
    scale = problem.scale * max(1.0, float(x @ x))
    vtol = tol * scale

    def gv():
        nonlocal global_val
        if global_val is None:
            global_val = global_value(problem)
        return global_val

    if problem.mode is Mode.INEQUALITY and q2 < 1.0 - tol:
        # interior points: local iff global for the single-constraint relaxation
        sol = _qq1.solve_qq1(_qq1.QQ1Problem(problem.A0, problem.A1))
        if sol.status is not _qq1.Status.UNBOUNDED and value <= sol.value + vtol:
            return PointClassification(Verdict.INTERIOR_GLOBAL, value, sol.value,
                                       reason="global for the relaxation without q2")
        return PointClassification(Verdict.INTERIOR_NOT_LOCAL, value, global_val,
                                   reason="interior point above the relaxation value")

    kkt = compute_kkt(problem, x, tol)
    if not kkt.licq_ok:
        g = gv()
        if value <= g + vtol:
            return PointClassification(Verdict.LICQ_FAIL_GLOBAL, value, g, kkt)
        if problem.mode is Mode.INEQUALITY:
            return PointClassification(Verdict.NOT_LOCAL_MINIMIZER, value, g, kkt,
                                       reason="LICQ fails and the point is not global")
        why = _licq_fail_curve_test(problem, x, tol)
        if why is not None:
            return PointClassification(Verdict.NOT_LOCAL_MINIMIZER, value, g, kkt,
                                       reason="LICQ fails; " + why)
        return PointClassification(Verdict.LICQ_FAIL_NOT_GLOBAL, value, g, kkt,
                                   reason="LICQ fails; curve tests inconclusive")

    if kkt.stationarity_residual > vtol:
        return PointClassification(Verdict.NOT_LOCAL_MINIMIZER, value, global_val, kkt,
                                   reason="not a KKT point")
    beta = kkt.beta
    btol = tol * max(1.0, abs(kkt.alpha))
    orientation = 1
    if problem.mode is Mode.INEQUALITY and beta < -btol:
        return PointClassification(Verdict.NOT_LOCAL_MINIMIZER, value, global_val, kkt,
                                   reason="negative inequality multiplier")
    if problem.mode is Mode.EQUALITY and beta < 0.0:
        orientation = -1

    G = problem.lagrangian_hessian(kkt.alpha, beta)
    gthr = tol * max(1.0, mat_norm(G))
    inr = inertia(G, tol)
    H = kkt.W.T @ G @ kkt.W
    proj = np.linalg.eigvalsh(0.5 * (H + H.T)) if H.size else np.zeros(0)
    common = dict(kkt=kkt, inertia=inr, projected_spectrum=proj, orientation=orientation)

    if inr.n_neg == 0:
        return PointClassification(Verdict.GLOBAL_BOUNDARY, value, global_val,
                                   reason="multiplier certificate: G is PSD", **common)
    if problem.mode is Mode.INEQUALITY and beta <= btol:
        # without strict complementarity only a global point can be local
        g = gv()
        if value <= g + vtol:
            return PointClassification(Verdict.GLOBAL_BOUNDARY, value, g,
                                       reason="value equals the global minimum", **common)
        return PointClassification(Verdict.NOT_LOCAL_MINIMIZER, value, g,
                                   reason="zero multiplier at a non-global point", **common)
    if inr.n_neg >= 2:
        return PointClassification(Verdict.NOT_LOCAL_MINIMIZER, value, global_val,
                                   reason="G has two or more negative eigenvalues", **common)
    if proj.size and proj[0] < -gthr:
        return PointClassification(Verdict.NOT_LOCAL_MINIMIZER, value, global_val,
                                   reason="second-order necessary condition fails", **common)
    g = gv()
    if value <= g + vtol:
        return PointClassification(Verdict.GLOBAL_BOUNDARY, value, g,
                                   reason="value equals the global minimum", **common)
    if proj.size == 0 or proj[0] > gthr:
        return PointClassification(Verdict.STRICT_LOCAL_NON_GLOBAL, value, g,
                                   reason="second-order sufficient condition with G not PSD",
                                   **common)
    d = find_nonstrict_direction(problem, x, kkt, tol)
    if d is not None:
        return PointClassification(Verdict.NON_STRICT_CANDIDATE, value, g, nonstrict=d,
                                   reason="flat tangent direction keeps both constraints",
                                   **common)
    return PointClassification(Verdict.NOT_LOCAL_MINIMIZER, value, g,
                               reason="singular projected Hessian without a flat direction",
                               **common)


def _canonical(x):
    k = int(np.argmax(np.abs(x) > 1e-9))
    return x if x[k] > 0 else -x


def _one_start(args):
    problem, child_seed, opts = args
    rng = np.random.default_rng(child_seed)
    A0, A1, A2 = problem.A0, problem.A1, problem.A2
    for _ in range(20):
        x0 = scale_to_q1(A1, rng.standard_normal(problem.n))
        if x0 is None:
            continue
        x0 = project_to_manifold(A1, A2, x0)
        if x0 is not None:
            break
    else:
        return None
    x, gnorm, _ = riemannian_descent(A0, A1, A2, x0, max_iter=opts["max_iter"],
                                     gtol=opts["gtol"], step0=opts["step0"],
                                     shrink=opts["shrink"], slope=opts["slope"])
    if x is None:
        return None
    J = np.column_stack([A1 @ x, A2 @ x])
    coef = np.linalg.lstsq(J, -(A0 @ x), rcond=None)[0]
    x, _, _ = kkt_newton_polish(A0, A1, A2, x, coef[0], coef[1])
    return _canonical(x)


@dataclass
class FinderConfig:
    n_starts: int = 200
    seed: int = 0
    max_iter: int = 5000
    gtol: float = 1e-6
    step0: float = 1.0
    shrink: float = 0.5
    slope: float = 1e-4
    dedup_tol: float = 1e-5
    jobs: int = 1
    tol: float = 1e-8


@dataclass(frozen=True)
class FinderResult:
    points: list
    global_value: float
    n_converged: int
    n_distinct: int = 0
    all_points: list = field(default_factory=list, repr=False)


def find_local_nonglobal(problem: QQ2Problem, n_starts: int = 200, seed: int = 0,
                         config: FinderConfig | None = None) -> FinderResult:
    """Multistart search for local non-global minimizers on ``{q1 = 1, q2 = 1}``.

    Local non-global minimizers have both constraints active, so every run
    descends on that manifold; limits are classified and only strict or
    non-strict local non-global verdicts are returned, each sign pair as two
    entries sorted by value.
    """
    cfg = config or FinderConfig(n_starts=n_starts, seed=seed)
    report = check_assumptions(problem)
    if not report.c1_holds:
        raise SolverError("find_local_nonglobal", "no definite pencil (C1)")
    g = global_value(problem)
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.n_starts)
    opts = dict(max_iter=cfg.max_iter, gtol=cfg.gtol, step0=cfg.step0,
                shrink=cfg.shrink, slope=cfg.slope)
    tasks = [(problem, s, opts) for s in seeds]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            limits = list(ex.map(_one_start, tasks, chunksize=8))
    else:
        limits = [_one_start(t) for t in tasks]
    converged = [x for x in limits if x is not None]
    if not converged and cfg.n_starts > 0:
        raise SolverError("find_local_nonglobal", "feasible manifold is empty or projection diverged")
    distinct: list[np.ndarray] = []
    for x in converged:
        if all(np.linalg.norm(x - y) > cfg.dedup_tol for y in distinct):
            distinct.append(x)
    found = []
    classified = []
    for x in distinct:
        for s in (1.0, -1.0):
            c = classify_point(problem, s * x, cfg.tol, global_val=g)
            classified.append((s * x, c))
            if c.verdict in LOCAL_NON_GLOBAL:
                found.append((s * x, c))
    found.sort(key=lambda pc: (round(pc[1].value, 12), tuple(np.round(pc[0], 12))))
    return FinderResult(found, g, len(converged), len(distinct), classified)
