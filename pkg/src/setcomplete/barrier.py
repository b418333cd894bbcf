"""Barrier detection and subspace transfer along a descent geodesic.

Each column's misfit along the ray has a unique maximiser (where the fit term
vanishes) and minimiser (top generalised eigenvector of a 2x2 pencil). Column
``k`` blocks column ``j`` when ``k`` peaks before ``j`` bottoms out and the
total objective is still descending at ``k``'s peak. Transfer jumps straight
to the nearest such peak.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geodesic import RayProfiles, geodesic_point

SLOPE_TOL = 1e-12


class DegenerateProfileError(ValueError):
    """Extrema are undefined: the restricted ``u`` and ``h`` are collinear, or the column is flat."""


@dataclass(frozen=True)
class BarrierRecord:
    blocking_column: int
    blocked_column: int
    t_o: float
    t_p: float
    total_slope_at_t_o: float


def atomic_profile(ray, X, j):
    if not 0 <= j < X.n:
        raise IndexError(f"column {j} out of range for n={X.n}")
    return RayProfiles(ray, X).profile(j)


def _wrap(t):
    t = np.mod(t, math.pi)
    return np.where(t >= math.pi, 0.0, t)


def _extrema(a, b, p, q, r):
    # max: a cos t + b sin t = 0; min: direction of B^{-1} (a, b), B = [[p, q], [q, r]]
    t_max = _wrap(np.arctan2(-a, b))
    t_min = _wrap(np.arctan2(p * b - q * a, r * a - q * b))
    return t_min, t_max


def _flat(a, b):
    return (a == 0.0) & (b == 0.0)


def atomic_extrema(profile):
    """Return ``(t_min, t_max)`` in ``[0, pi)`` for a non-degenerate profile.

    The pencil ``(g g^T, B)`` with ``g = (a, b)`` has rank-one numerator, so its
    top generalised eigenvector is ``B^{-1} g`` in closed form.
    """
    pr = profile
    if pr.degenerate:
        raise DegenerateProfileError(f"column {pr.column}: restricted u and h are collinear")
    if _flat(pr.a, pr.b):
        raise DegenerateProfileError(f"column {pr.column}: misfit is constant along the ray")
    t_min, t_max = _extrema(pr.a, pr.b, pr.p, pr.q, pr.r)
    return float(t_min), float(t_max)


def total_slope(ray, X, t, profiles=None):
    prof = profiles if profiles is not None else RayProfiles(ray, X)
    return prof.slope(t)


def _barrier_pairs(prof):
    """Extrema of the usable columns and the boolean ``[k, j]`` blocking matrix."""
    valid = ~prof.degenerate & ~_flat(prof.a, prof.b)
    idx = np.flatnonzero(valid)
    if idx.size < 2:
        return idx, None, None, None, None
    t_min, t_max = _extrema(prof.a[idx], prof.b[idx], prof.p[idx], prof.q[idx], prof.r[idx])
    slope_at_peak = prof.slopes(t_max).sum(axis=1)

    blocker = slope_at_peak < -SLOPE_TOL
    blocked = t_min < t_max
    pairs = (blocker[:, None] & blocked[None, :]
             & (t_max[:, None] < t_min[None, :]))
    np.fill_diagonal(pairs, False)
    return idx, t_min, t_max, slope_at_peak, pairs


def detect_barriers(ray, X, profiles=None):
    """All ``(blocking k, blocked j)`` pairs along ``ray``, ordered by ``k`` then ``j``."""
    prof = profiles if profiles is not None else RayProfiles(ray, X)
    idx, t_min, t_max, slope_at_peak, pairs = _barrier_pairs(prof)
    if pairs is None:
        return []
    return [
        BarrierRecord(
            blocking_column=int(idx[kk]), blocked_column=int(idx[jj]),
            t_o=float(t_max[kk]), t_p=float(t_min[jj]),
            total_slope_at_t_o=float(slope_at_peak[kk]))
        for kk, jj in zip(*np.nonzero(pairs))
    ]


def select_transfer(records):
    """Pick the barrier to cross: nearest blocked minimiser, then its farthest blocker.

    Ties go to the smallest column index. Returns ``None`` for no records.
    """
    if not records:
        return None
    j_star, tp_star = None, math.inf
    for rec in sorted(records, key=lambda r: r.blocked_column):
        if rec.t_p < tp_star:
            j_star, tp_star = rec.blocked_column, rec.t_p
    best = None
    for rec in sorted(records, key=lambda r: r.blocking_column):
        if rec.blocked_column == j_star and (best is None or rec.t_o > best.t_o):
            best = rec
    return best


def transfer(ray, X, profiles=None):
    """Return ``(t_st, u(t_st))``; ``t_st == 0`` and the base point when nothing blocks.

    Same choice as ``select_transfer(detect_barriers(...))`` without building
    the records.
    """
    prof = profiles if profiles is not None else RayProfiles(ray, X)
    idx, t_min, t_max, _, pairs = _barrier_pairs(prof)
    if pairs is None or not pairs.any():
        return 0.0, ray.base.copy()
    is_blocked = pairs.any(axis=0)
    # argmin/argmax return the first hit and idx is ascending: ties go to the lowest column
    cand = np.flatnonzero(is_blocked)
    jj = cand[np.argmin(t_min[cand])]
    blockers = np.flatnonzero(pairs[:, jj])
    kk = blockers[np.argmax(t_max[blockers])]
    t_st = float(t_max[kk])
    return t_st, geodesic_point(ray, t_st)
