"""Outer loop: transfer across barriers, then line search, until the data fit."""

from __future__ import annotations

import logging

import numpy as np

from .barrier import transfer
from .core import SolveReport, SolverConfig, as_unit_vector
from .geodesic import RayProfiles, line_search
from .objective import StationaryPointError, descent_ray, eval_f, optimal_w

log = logging.getLogger(__name__)


def random_init(m, rng_seed):
    """Isotropic random unit vector in R^m, reproducible from ``rng_seed``."""
    if m < 1:
        raise ValueError("m must be positive")
    rng = np.random.default_rng(rng_seed)
    while True:
        v = rng.standard_normal(m)
        norm = np.linalg.norm(v)
        if norm > 0.0:
            return v / norm


def reconstruct(u, X):
    return optimal_w(u, X)


def solve(X, config=None, record_history=False):
    """Find a unit ``u`` and ``w`` with ``u w^T`` matching ``X`` on the observed entries.

    Non-convergence is reported through ``success=False``, never raised. When
    ``record_history`` is set, ``report.history`` holds one dict per outer
    iteration with the objective after transfer and after line search.
    """
    config = config or SolverConfig()
    if config.init_u is not None:
        u = as_unit_vector(config.init_u, normalize=True)
        if u.size != X.m:
            raise ValueError(f"initial vector has length {u.size}, expected {X.m}")
    else:
        u = random_init(X.m, config.rng_seed)

    target = config.eps_e * X.norm_sq
    history = []
    iters = transfers = 0
    stationary = False
    f = eval_f(u, X)

    while f >= target and iters < config.max_outer_iters and X.norm_sq > 0.0:
        try:
            ray = descent_ray(u, X)
            prof = RayProfiles(ray, X)
            t_st = 0.0
            if config.transfer_enabled:
                t_st, u_st = transfer(ray, X, prof)
                if t_st > 0.0:
                    transfers += 1
                    u = u_st
                    ray = descent_ray(u, X)
                    prof = RayProfiles(ray, X)
            f_st = prof.f(0.0)
            _, u, f = line_search(ray, X, config.eps_step, config.itN, prof)
        except StationaryPointError:
            f = eval_f(u, X)
            stationary = f >= target
            break
        iters += 1
        if record_history:
            history.append({"iteration": iters, "t_transfer": t_st,
                            "f_after_transfer": f_st, "f": f})

    f = eval_f(u, X)
    w = optimal_w(u, X)
    rel = f / X.norm_sq if X.norm_sq > 0.0 else 0.0
    success = rel < config.eps_e
    log.debug("solve: success=%s iters=%d transfers=%d rel=%.3e",
              success, iters, transfers, rel)
    return SolveReport(
        success=success, final_objective=f, relative_residual=rel,
        outer_iterations=iters, transfers_performed=transfers, u=u, w=w,
        stationary=stationary and not success, history=history)
