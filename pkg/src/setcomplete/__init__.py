"""Rank-1 consistent matrix completion by subspace evolution and transfer."""

from .core import (AtomicProfile, GeodesicRay, ObservedMatrix, SolveReport,
                   SolverConfig, load_observed, save_completed)
from .solver import random_init, reconstruct, solve

__all__ = [
    "AtomicProfile", "GeodesicRay", "ObservedMatrix", "SolveReport", "SolverConfig",
    "load_observed", "random_init", "reconstruct", "save_completed", "solve",
]
__version__ = "0.1.0"
