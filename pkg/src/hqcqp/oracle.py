"""Brute-force checks for small instances.

``oracle_global`` enumerates a spherical-coordinate grid of directions (one
hemisphere suffices because every quantity is even in ``x``), scales each to
``q1 = 1`` and keeps the feasible ones. The grid uses ``N = 2^k`` polar steps
so halving the resolution refines the same family of points.

The scan runs in a compiled kernel when the extension is built; set
``HQCQP_PURE_PYTHON=1`` to force the numpy path.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from . import _grid_py
from .manifold import project_to_manifold
from .pencil import mat_norm
from .qq2_global import Mode, QQ2Problem

try:
    from . import _kernels
except ImportError:  # extension not built
    _kernels = None

MAX_GRID_POINTS = 400_000_000


def available_kernels() -> list[str]:
    return (["cython"] if _kernels is not None else []) + ["numpy"]


def default_kernel() -> str:
    if _kernels is not None and os.environ.get("HQCQP_PURE_PYTHON", "") in ("", "0"):
        return "cython"
    return "numpy"


def _scan(kernel: str):
    if kernel == "auto":
        kernel = default_kernel()
    if kernel == "cython":
        if _kernels is None:
            raise RuntimeError("compiled kernel not available")
        return _kernels.grid_scan
    if kernel == "numpy":
        return _grid_py.grid_scan
    raise ValueError(f"unknown kernel {kernel!r}")


class OracleInfeasibleError(RuntimeError):
    """No grid point passed the feasibility filter."""


@dataclass(frozen=True)
class OracleReport:
    value: float
    argmin_direction: np.ndarray
    x: np.ndarray
    n_feasible_samples: int
    resolution: float
    steps: int
    error_bound: float
    feasibility_band: float


def grid_steps(resolution: float) -> int:
    if not resolution > 0:
        raise ValueError("resolution must be positive")
    return 2 ** max(1, math.ceil(math.log2(math.pi / resolution)))


def oracle_global(P: QQ2Problem, resolution: float = 1e-3, feas_tol: float = 1e-12,
                  kernel: str = "auto", band_factor: float | None = None) -> OracleReport:
    """Minimum of ``q0`` over the feasible grid directions.

    ``error_bound`` is a first-order estimate: the covering radius of the
    grid times the sphere gradient bound ``2(|A0| + |f| |A1|) / q1(d)`` of
    ``f = q0 / q1`` at the reported direction. It is not a certified bound.
    In equality mode samples with ``|q2 - 1| <= c h |A2|`` are kept, ``h``
    being the actual angular step. The default ``c = 2 sqrt(n - 1)`` covers
    the largest change of ``q2`` between a point of the manifold and its
    nearest grid direction; wider bands bias the value downward.
    """
    n = P.n
    if n > 4:
        raise ValueError("oracle supports n <= 4")
    N = grid_steps(resolution)
    npts = (N + 1) ** (n - 2) * N
    if npts > MAX_GRID_POINTS:
        raise ValueError(f"grid too large ({npts} points); use a coarser resolution")
    h = math.pi / N
    equality = P.mode is Mode.EQUALITY
    if band_factor is None:
        band_factor = 2.0 * math.sqrt(n - 1)
    band = band_factor * h * max(mat_norm(P.A2), 1e-300) if equality else 0.0
    best, d, count = _scan(kernel)(P.A0, P.A1, P.A2, N, equality, feas_tol, band)
    if count == 0 or d is None:
        raise OracleInfeasibleError(
            "no feasible grid point: the problem may be infeasible or the resolution too coarse")
    # re-validate the reported sample
    q1 = float(d @ P.A1 @ d)
    x = d / math.sqrt(q1)
    q0, _, q2 = P.q(x)
    slack = abs(q2 - 1.0) if equality else q2 - 1.0
    if slack > (band if equality else feas_tol) * (1 + 1e-9) + 1e-15:
        raise RuntimeError("reported oracle sample failed re-validation")
    grad = 2.0 * (mat_norm(P.A0) + abs(q0) * mat_norm(P.A1)) / q1
    bound = h * math.sqrt(n - 1) * grad
    return OracleReport(q0, d, x, int(count), float(resolution), N, bound, band)


@dataclass(frozen=True)
class ProbeResult:
    is_local_min_at_resolution: bool
    best_violation: float
    best_point: np.ndarray | None
    n_accepted: int
    n_retraction_failures: int


def oracle_local_probe(P: QQ2Problem, x, radius: float = 1e-2, n_samples: int = 2000,
                       seed: int = 0, margin: float = 1e-9, tol: float = 1e-8) -> ProbeResult:
    """Random feasible neighbours of ``x`` within ``radius``.

    Perturbations are drawn in the tangent space of ``q1 = 1`` with radii
    spread log-uniformly over ``[radius * 1e-3, radius]``, then retracted by
    rescaling (and by the two-constraint projection when ``q2`` must be
    restored). ``best_violation`` is the largest decrease ``q0(x) - q0(y)``
    seen; ``x`` passes when no neighbour is lower by more than ``margin``.
    """
    x = np.asarray(x, dtype=float)
    f0, q1, q2 = P.q(x)
    if abs(q1 - 1.0) > tol or (q2 > 1.0 + tol) or (P.mode is Mode.EQUALITY and abs(q2 - 1.0) > tol):
        raise ValueError("x is infeasible")
    rng = np.random.default_rng(seed)
    g1 = P.A1 @ x
    g1 = g1 / np.linalg.norm(g1)
    best, best_y, accepted, failures = -np.inf, None, 0, 0
    for _ in range(n_samples):
        v = rng.standard_normal(P.n)
        v -= (v @ g1) * g1
        nv = np.linalg.norm(v)
        if nv == 0:
            continue
        r = radius * 10.0 ** rng.uniform(-3.0, 0.0)
        y = x + (r / nv) * v
        d = float(y @ P.A1 @ y)
        if d <= 1e-14:
            failures += 1
            continue
        y = y / math.sqrt(d)
        if P.mode is Mode.EQUALITY or float(y @ P.A2 @ y) > 1.0:
            y = project_to_manifold(P.A1, P.A2, y)
            if y is None:
                failures += 1
                continue
        if np.linalg.norm(y - x) > radius:
            continue
        accepted += 1
        viol = f0 - float(y @ P.A0 @ y)
        if viol > best:
            best, best_y = viol, y
    return ProbeResult(bool(best <= margin), float(best), best_y, accepted, failures)


def fd_check(P: QQ2Problem, x) -> float:
    """Largest relative error of ``2 A_i x`` against central differences."""
    x = np.asarray(x, dtype=float)
    h = 1e-5 * max(1.0, float(np.linalg.norm(x)))
    worst = 0.0
    for A in (P.A0, P.A1, P.A2):
        analytic = 2.0 * A @ x
        fd = np.empty_like(x)
        for i in range(len(x)):
            e = np.zeros_like(x)
            e[i] = h
            fd[i] = ((x + e) @ A @ (x + e) - (x - e) @ A @ (x - e)) / (2.0 * h)
        err = float(np.linalg.norm(fd - analytic)) / max(1.0, float(np.linalg.norm(analytic)))
        worst = max(worst, err)
    return worst
