"""Projection and descent on ``{x : x'A1x = 1, x'A2x = 1}``."""

from __future__ import annotations

import numpy as np


def project_to_manifold(A1, A2, x, maxit: int = 60, tol: float = 1e-13):
    """Gauss-Newton projection onto both level sets.

    Each step is the minimum-norm correction along ``span{A1x, A2x}``.
    Returns None when the iteration diverges or stalls.
    """
    x = np.array(x, dtype=float)
    for _ in range(maxit):
        a1, a2 = A1 @ x, A2 @ x
        r = np.array([x @ a1 - 1.0, x @ a2 - 1.0])
        if np.max(np.abs(r)) <= tol:
            return x
        x = x - 0.5 * _min_norm_solve(a1, a2, r)
        if not np.all(np.isfinite(x)) or np.linalg.norm(x) > 1e8:
            return None
    a1, a2 = A1 @ x, A2 @ x
    if max(abs(x @ a1 - 1.0), abs(x @ a2 - 1.0)) <= 1e-10:
        return x
    return None


def _min_norm_solve(a1, a2, r):
    """Minimum-norm ``d`` with ``[a1 a2]' d = r``."""
    g11, g12, g22 = a1 @ a1, a1 @ a2, a2 @ a2
    det = g11 * g22 - g12 * g12
    if det > 1e-12 * max(g11 * g22, 1e-300):
        c1 = (g22 * r[0] - g12 * r[1]) / det
        c2 = (g11 * r[1] - g12 * r[0]) / det
        return c1 * a1 + c2 * a2
    J = np.vstack([a1, a2])
    return np.linalg.lstsq(J, r, rcond=1e-12)[0]


def scale_to_q1(A1, x):
    d = float(x @ A1 @ x)
    if d <= 1e-14:
        return None
    return x / np.sqrt(d)


def tangent_projection(A1, A2, x, v):
    """Component of ``v`` orthogonal to ``A1x`` and ``A2x``."""
    a1, a2 = A1 @ x, A2 @ x
    return v - _min_norm_solve(a1, a2, np.array([a1 @ v, a2 @ v]))


def riemannian_descent(A0, A1, A2, x, max_iter: int = 5000, gtol: float = 1e-6,
                       step0: float = 1.0, shrink: float = 0.5, slope: float = 1e-4):
    """Projected-gradient descent of ``x'A0x`` on the two-constraint manifold.

    Armijo backtracking with the Gauss-Newton projection as retraction.
    Returns ``(x, grad_norm, iterations)``; ``x`` is None on retraction failure.
    """
    f = float(x @ A0 @ x)
    step = step0
    gnorm = np.inf
    for it in range(max_iter):
        g = tangent_projection(A1, A2, x, 2.0 * (A0 @ x))
        gnorm = float(np.linalg.norm(g))
        if gnorm <= gtol:
            return x, gnorm, it
        t = step
        while True:
            y = project_to_manifold(A1, A2, x - t * g)
            if y is not None:
                fy = float(y @ A0 @ y)
                if fy <= f - slope * t * gnorm**2:
                    break
            t *= shrink
            if t < 1e-16:
                return x, gnorm, it
        if f - fy <= 1e-15 * max(1.0, abs(f)):
            return y, gnorm, it
        x, f = y, fy
        step = min(4.0 * t, 1e3)
    return x, gnorm, max_iter


def kkt_newton_polish(A0, A1, A2, x, alpha, beta, maxit: int = 30, tol: float = 1e-14):
    """Newton's method on ``Gx = 0, q1 = 1, q2 = 1`` in ``(x, alpha, beta)``.

    Returns the polished triple, or the input unchanged if Newton does not
    reduce the residual.
    """
    n = len(x)

    def residual(x, a, b):
        G = A0 + a * A1 + b * A2
        return np.concatenate([G @ x, [0.5 * (x @ A1 @ x - 1.0), 0.5 * (x @ A2 @ x - 1.0)]])

    r0 = np.linalg.norm(residual(x, alpha, beta))
    best = (x, alpha, beta, r0)
    cur = (np.array(x, dtype=float), float(alpha), float(beta))
    for _ in range(maxit):
        xc, a, b = cur
        F = residual(xc, a, b)
        nf = float(np.linalg.norm(F))
        if nf < best[3]:
            best = (xc, a, b, nf)
        if nf <= tol:
            break
        G = A0 + a * A1 + b * A2
        J = np.zeros((n + 2, n + 2))
        J[:n, :n] = G
        J[:n, n] = A1 @ xc
        J[:n, n + 1] = A2 @ xc
        J[n, :n] = xc @ A1
        J[n + 1, :n] = xc @ A2
        try:
            d = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(d)) or np.linalg.norm(d[:n]) > 1e-2:
            break
        cur = (xc + d[:n], a + d[n], b + d[n + 1])
    return best[0], best[1], best[2]
