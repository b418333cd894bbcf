"""Monte-Carlo success-rate sweeps on random rank-1 instances."""

from __future__ import annotations

import csv
import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import ObservedMatrix, SolverConfig, atomic_write
from .solver import solve

DEFAULT_RATES = (0.02, 0.05, 0.08, 0.1, 0.15, 0.2, 0.3, 0.5)
CSV_HEADER = ("sampling_rate", "trials", "successes", "success_rate",
              "mean_iters", "mean_transfers", "mean_exact_recovery_err")

# keeps the instance stream apart from the solver's start-point stream for the same seed
_INSTANCE_STREAM = 0x1A57


@dataclass(frozen=True)
class TrialSpec:
    m: int
    n: int
    sampling_rate: float
    trials: int
    seed: int = 0
    transfer_enabled: bool = True
    r: int = 1

    def __post_init__(self):
        if self.r != 1:
            raise ValueError("only rank 1 is supported")
        if not 0.0 < self.sampling_rate <= 1.0:
            raise ValueError(f"sampling rate {self.sampling_rate} outside (0, 1]")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if self.omega_size < 1:
            raise ValueError("sampling rate too small: no entries would be observed")

    @property
    def omega_size(self):
        return round(self.sampling_rate * self.m * self.n)


@dataclass(frozen=True)
class TrialOutcome:
    success: bool
    iterations: int
    transfers: int
    exact_recovery_err: float


@dataclass(frozen=True)
class SweepPoint:
    sampling_rate: float
    trials: int
    successes: int
    mean_iters: float
    mean_transfers: float
    mean_exact_recovery_err: float

    @property
    def success_rate(self):
        return self.successes / self.trials


@dataclass
class SweepResult:
    points: list

    def rate(self, sampling_rate):
        for pt in self.points:
            if pt.sampling_rate == sampling_rate:
                return pt.success_rate
        raise KeyError(sampling_rate)


def generate_instance(m, n, r=1, omega_size=None, seed=0):
    """Random rank-1 ``X = s * u v^T`` and a uniformly drawn observation set.

    ``u`` and ``v`` are isotropic unit vectors, ``s`` is standard normal, and
    ``omega_size`` distinct entries are sampled without replacement.
    """
    if r != 1:
        raise ValueError("only rank 1 is supported")
    if omega_size is None:
        omega_size = m * n
    if not 1 <= omega_size <= m * n:
        raise ValueError(f"omega_size {omega_size} outside [1, {m * n}]")
    rng = np.random.default_rng((seed, _INSTANCE_STREAM))
    u = rng.standard_normal(m)
    u /= np.linalg.norm(u)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    s = rng.standard_normal()
    full = s * np.outer(u, v)
    flat = rng.choice(m * n, size=omega_size, replace=False)
    rows, cols = np.divmod(flat, n)
    return full, ObservedMatrix(m, n, rows, cols, full[rows, cols])


def run_trial(spec, config, trial_index):
    seed = spec.seed + trial_index
    full, X = generate_instance(spec.m, spec.n, omega_size=spec.omega_size, seed=seed)
    cfg = dataclasses.replace(config, rng_seed=seed, init_u=None,
                              transfer_enabled=spec.transfer_enabled)
    rep = solve(X, cfg)
    full_norm = np.linalg.norm(full)
    err = np.linalg.norm(rep.completed() - full) / full_norm if full_norm > 0 else 0.0
    return TrialOutcome(rep.success, rep.outer_iterations, rep.transfers_performed, float(err))


def _run_trial_args(args):
    return run_trial(*args)


def aggregate(sampling_rate, outcomes):
    k = len(outcomes)
    return SweepPoint(
        sampling_rate=sampling_rate,
        trials=k,
        successes=sum(o.success for o in outcomes),
        mean_iters=math.fsum(o.iterations for o in outcomes) / k,
        mean_transfers=math.fsum(o.transfers for o in outcomes) / k,
        mean_exact_recovery_err=math.fsum(o.exact_recovery_err for o in outcomes) / k,
    )


def run_sweep(specs, config=None, jobs=1):
    """Run every trial of every spec and aggregate one :class:`SweepPoint` per spec.

    Trials are independent; with ``jobs > 1`` they run in a process pool and
    are re-collected in submission order, so the result does not depend on
    ``jobs``.
    """
    specs = list(specs)
    if not specs:
        raise ValueError("no sweep points given")
    config = config or SolverConfig()
    tasks = [(spec, config, i) for spec in specs for i in range(spec.trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_trial_args, tasks, chunksize=1))
    else:
        outcomes = [_run_trial_args(t) for t in tasks]

    points, start = [], 0
    for spec in specs:
        points.append(aggregate(spec.sampling_rate, outcomes[start:start + spec.trials]))
        start += spec.trials
    points.sort(key=lambda p: p.sampling_rate)
    return SweepResult(points)


def _fmt(x):
    return repr(float(x))


def emit_csv(result, path):
    def write(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for pt in sorted(result.points, key=lambda p: p.sampling_rate):
            w.writerow([_fmt(pt.sampling_rate), pt.trials, pt.successes,
                        _fmt(pt.success_rate), _fmt(pt.mean_iters),
                        _fmt(pt.mean_transfers), _fmt(pt.mean_exact_recovery_err)])
    atomic_write(path, write)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def emit_gnuplot(arms, path):
    """Two-column ``sampling_rate success_rate`` blocks, one gnuplot index per arm."""
    def write(fh):
        for i, (label, result) in enumerate(arms.items()):
            if i:
                fh.write("\n\n")
            fh.write(f"# {label}\n")
            for pt in sorted(result.points, key=lambda p: p.sampling_rate):
                fh.write(f"{_fmt(pt.sampling_rate)} {_fmt(pt.success_rate)}\n")
    atomic_write(path, write)
