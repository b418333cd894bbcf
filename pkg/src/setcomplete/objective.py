"""Column-space objective for rank-1 completion.

For a unit vector ``u`` the best fit from ``span(u)`` is found column by
column: ``w_j = <u_j, x_j> / |u_j|^2`` where ``u_j`` and ``x_j`` are restricted
to the rows observed in column ``j``. The misfit splits into per-column terms
``f_j(u) = |x_j|^2 - <u_j, x_j>^2 / |u_j|^2``.
"""

from __future__ import annotations

import numpy as np

from .core import GeodesicRay


class StationaryPointError(ArithmeticError):
    """The gradient vanished, so no descent direction exists."""


def _column_sums(X, u):
    ur = u[X.rows]
    a = np.bincount(X.cols, weights=ur * X.values, minlength=X.n)
    p = np.bincount(X.cols, weights=ur * ur, minlength=X.n)
    return a, p


def optimal_w(u, X):
    """Least-squares coefficients ``w`` minimising ``|X_Omega - P_Omega(u w^T)|``.

    Columns with no observations, or whose observed rows miss the support of
    ``u``, get ``w_j = 0``.
    """
    a, p = _column_sums(X, np.asarray(u, dtype=np.float64))
    w = np.zeros(X.n)
    pos = p > 0.0
    w[pos] = a[pos] / p[pos]
    return w


def atomic_values(u, X):
    """Vector of all per-column misfits ``f_j(u)``."""
    a, p = _column_sums(X, np.asarray(u, dtype=np.float64))
    xx = X.column_norm_sq()
    fit = np.zeros(X.n)
    pos = p > 0.0
    fit[pos] = a[pos] ** 2 / p[pos]
    return np.clip(xx - fit, 0.0, xx)


def eval_f(u, X):
    return float(atomic_values(u, X).sum())


def eval_atomic(u, X, j):
    if not 0 <= j < X.n:
        raise IndexError(f"column {j} out of range for n={X.n}")
    rows, vals = X.column(j)
    uj = np.asarray(u, dtype=np.float64)[rows]
    xx = float(vals @ vals)
    p = float(uj @ uj)
    if p == 0.0:
        return xx
    a = float(uj @ vals)
    return min(max(xx - a * a / p, 0.0), xx)


def residual_values(u, X, w=None):
    """Residual ``X_Omega - P_Omega(u w^T)`` on the observed entries, in ``X`` order."""
    u = np.asarray(u, dtype=np.float64)
    if w is None:
        w = optimal_w(u, X)
    return X.values - u[X.rows] * w[X.cols]


def gradient(u, X):
    """Euclidean gradient ``-2 X_r w_u`` of the objective at ``u``."""
    u = np.asarray(u, dtype=np.float64)
    w = optimal_w(u, X)
    res = residual_values(u, X, w)
    return -2.0 * np.bincount(X.rows, weights=res * w[X.cols], minlength=X.m)


def grad_tol(X):
    return 1e-12 * max(1.0, np.sqrt(X.norm_sq))


def descent_ray(u, X):
    """Geodesic through ``u`` along the normalised negative gradient.

    Raises
    ------
    StationaryPointError
        If the gradient norm is at or below ``1e-12 * max(1, |X_Omega|_F)``.
    """
    u = np.asarray(u, dtype=np.float64)
    g = gradient(u, X)
    gnorm = np.linalg.norm(g)
    if not gnorm > grad_tol(X):
        raise StationaryPointError(f"gradient norm {gnorm:.3e} at a stationary point")
    h = -g / gnorm
    # strip rounding drift out of the tangent plane
    h -= (h @ u) * u
    h /= np.linalg.norm(h)
    return GeodesicRay(u, h)
