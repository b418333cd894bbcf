"""Line search along a great circle of the unit sphere.

The objective restricted to ``u(t) = u cos t + h sin t`` is evaluated from five
inner products per column (see :class:`RayProfiles`), so each probe costs
``O(n)`` after an ``O(|Omega|)`` setup.
"""

from __future__ import annotations

import math

import numpy as np

from .core import AtomicProfile, is_degenerate

C1 = (math.sqrt(5.0) - 1.0) / 2.0
C2 = C1 / (1.0 - C1)


class RayProfiles:
    """Per-column coefficients ``(a, b, p, q, r, x_norm_sq)`` along a ray.

    ``a = <u_j, x_j>``, ``b = <h_j, x_j>``, ``p = |u_j|^2``, ``q = <u_j, h_j>``,
    ``r = |h_j|^2`` with everything restricted to the rows observed in column j.
    """

    def __init__(self, ray, X):
        self.ray = ray
        ur = ray.base[X.rows]
        hr = ray.direction[X.rows]
        x = X.values

        def colsum(v):
            return np.bincount(X.cols, weights=v, minlength=X.n)

        self.a = colsum(ur * x)
        self.b = colsum(hr * x)
        self.p = colsum(ur * ur)
        self.q = colsum(ur * hr)
        self.r = colsum(hr * hr)
        self.xx = colsum(x * x)
        self.degenerate = is_degenerate(self.p, self.q, self.r)
        self.q2 = 2.0 * self.q
        # den(t) > 0 for all t when the restricted pair has full rank
        self._all_pos_den = not self.degenerate.any()
        # double-angle form: (a c + b s)^2 and p c^2 + 2 q c s + r s^2 as
        # rows of coefficients on (1, cos 2t, sin 2t)
        a2, b2 = self.a * self.a, self.b * self.b
        self._num_sq_coef = np.stack([(a2 + b2) / 2.0, (a2 - b2) / 2.0, self.a * self.b])
        self._den_coef = np.stack([(self.p + self.r) / 2.0, (self.p - self.r) / 2.0, self.q])

    @property
    def n(self):
        return self.a.size

    def profile(self, j):
        return AtomicProfile(
            column=int(j), a=float(self.a[j]), b=float(self.b[j]), p=float(self.p[j]),
            q=float(self.q[j]), r=float(self.r[j]), x_norm_sq=float(self.xx[j]),
            degenerate=bool(self.degenerate[j]))

    def atomic(self, t):
        """All ``f_j(u(t))``; a scalar ``t`` gives shape ``(n,)``, an array ``(len(t), n)``."""
        ts = np.asarray(t, dtype=np.float64)
        c = np.cos(ts)[..., None]
        s = np.sin(ts)[..., None]
        num = self.a * c + self.b * s
        den = self.p * (c * c) + self.q2 * (c * s) + self.r * (s * s)
        pos = den > 0.0
        fit = np.where(pos, num * num / np.where(pos, den, 1.0), 0.0)
        out = np.minimum(np.maximum(self.xx - fit, 0.0), self.xx)
        return out

    def f(self, t):
        """Objective at ``u(t)``; scalar fast path used by the line search."""
        v = np.array([1.0, math.cos(2.0 * t), math.sin(2.0 * t)])
        num_sq = v @ self._num_sq_coef
        den = v @ self._den_coef
        if self._all_pos_den:
            num_sq /= den
        else:
            pos = den > 0.0
            np.divide(num_sq, den, out=num_sq, where=pos)
            num_sq[~pos] = 0.0
        out = self.xx - num_sq
        np.maximum(out, 0.0, out=out)
        np.minimum(out, self.xx, out=out)
        return float(out.sum())

    def f_many(self, ts):
        ts = np.asarray(ts, dtype=np.float64).reshape(-1)
        v = np.stack([np.ones_like(ts), np.cos(2.0 * ts), np.sin(2.0 * ts)], axis=1)
        num_sq = v @ self._num_sq_coef
        den = v @ self._den_coef
        pos = den > 0.0
        fit = np.where(pos, num_sq / np.where(pos, den, 1.0), 0.0)
        out = np.minimum(np.maximum(self.xx - fit, 0.0), self.xx)
        return out.sum(axis=1)

    def slopes(self, t):
        """``d f_j(u(t)) / dt`` per column (degenerate columns give 0); vectorised like :meth:`atomic`."""
        ts = np.asarray(t, dtype=np.float64)
        c = np.cos(ts)[..., None]
        s = np.sin(ts)[..., None]
        num = self.a * c + self.b * s
        dnum = self.b * c - self.a * s
        den = self.p * (c * c) + self.q * (2.0 * c * s) + self.r * (s * s)
        dden = (self.r - self.p) * (2.0 * s * c) + 2.0 * self.q * (c * c - s * s)
        ok = ~self.degenerate & (den > 0.0)
        safe = np.where(ok, den, 1.0)
        out = np.where(ok, -(2.0 * num * dnum * safe - num * num * dden) / (safe * safe), 0.0)
        return out

    def slope(self, t):
        return float(self.slopes(t).sum())


def geodesic_point(ray, t):
    """``u cos t + h sin t``, renormalised against rounding drift."""
    if t == 0.0:
        return ray.base.copy()
    v = ray.base * math.cos(t) + ray.direction * math.sin(t)
    return v / np.linalg.norm(v)


def _probes(eps_step):
    ts = [eps_step * math.pi]
    while ts[-1] <= math.pi:
        ts.append(C2 * ts[-1])
    return ts


def bracket_1d(phi, eps_step, phi_many=None):
    """Step A on a scalar function ``phi``; ``phi_many`` may batch the probes."""
    ts = _probes(eps_step)
    # the last probe already exceeds pi and is never evaluated
    fs = phi_many(ts[:-1]) if phi_many is not None else [phi(t) for t in ts[:-1]]
    for k in range(1, len(fs)):
        if fs[k] > fs[k - 1]:
            return ts[k]
    return math.pi


def golden_1d(phi, t_max, itN):
    """Step B on a scalar function; returns ``(t_best, phi(t_best))``."""
    t1 = t_max / C2**2
    t2 = t_max / C2
    t4 = t_max
    t3 = t1 + C1 * (t4 - t1)
    f1, f2, f3, f4 = phi(t1), phi(t2), phi(t3), phi(t4)
    for _ in range(itN):
        if f1 > f2 > f3:
            t1, f1 = t2, f2
            t2, f2 = t3, f3
            t3 = t1 + C1 * (t4 - t1)
            f3 = phi(t3)
        else:
            t4, f4 = t3, f3
            t3, f3 = t2, f2
            t2 = t1 + (1.0 - C1) * (t4 - t1)
            f2 = phi(t2)
    ts = (t1, t2, t3, t4)
    fs = (f1, f2, f3, f4)
    k = min(range(4), key=fs.__getitem__)
    return ts[k], fs[k]


def bracket_minimum(ray, X, eps_step=1e-9, profiles=None):
    """Step outward from ``eps_step * pi`` by the factor ``C2`` until ``f`` rises.

    Returns the first probe where ``f`` exceeds the previous probe, or ``pi``
    when the growth passes ``pi`` first.
    """
    prof = profiles if profiles is not None else RayProfiles(ray, X)
    return bracket_1d(prof.f, eps_step, prof.f_many)


def golden_section(ray, X, t_max, itN=10, profiles=None):
    """Golden-section refinement of the minimiser on ``[t_max / C2**2, t_max]``.

    Exactly ``itN + 4`` objective evaluations are made. Returns ``(t, u(t))``
    for the best of the four final points.
    """
    prof = profiles if profiles is not None else RayProfiles(ray, X)
    t_star, _ = golden_1d(prof.f, t_max, itN)
    return t_star, geodesic_point(ray, t_star)


def line_search(ray, X, eps_step=1e-9, itN=10, profiles=None):
    """Bracket, refine, and never return a point worse than the base.

    Returns ``(t, u(t), f(u(t)))``; ``t == 0`` means no improving point was found.
    """
    prof = profiles if profiles is not None else RayProfiles(ray, X)
    t_max = bracket_1d(prof.f, eps_step, prof.f_many)
    t_star, f_star = golden_1d(prof.f, t_max, itN)
    f0 = prof.f(0.0)
    if f_star > f0:
        return 0.0, ray.base.copy(), f0
    return t_star, geodesic_point(ray, t_star), f_star
