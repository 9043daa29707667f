"""Lifeline-based global load balancing for the branch and prune search."""

from .backends import DeadlockError, SimCosts, WorkerFailure
from .runner import BACKENDS, GlbResult, run_workers
from .topology import GlbConfig, LifelineGraph, init_lifelines, min_dims
from .worker import (
    LifelineFulfill, Loot, NoWork, StealRequest, Terminate, WeightReturn,
    Worker, WorkerStats,
)

__all__ = [
    "BACKENDS", "DeadlockError", "GlbConfig", "GlbResult", "LifelineFulfill",
    "LifelineGraph", "Loot", "NoWork", "SimCosts", "StealRequest",
    "Terminate", "WeightReturn", "Worker", "WorkerFailure", "WorkerStats",
    "init_lifelines", "min_dims", "run_workers",
]
