"""Entry point that wires workers, lifelines and a backend together."""

from __future__ import annotations

import random
import time
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..expression import Problem
from ..search import Paving, SearchStats, TaskQueue, merge_fingerprints
from .backends import SimClock, SimCosts, run_simulation, run_threads
from .topology import GlbConfig, init_lifelines
from .worker import ROOT, Worker, WorkerStats

BACKENDS = ("threads", "sim")


@dataclass
class GlbResult:
    total_precise: int
    total_inner: int
    worker_stats: list[WorkerStats]
    search_stats: list[SearchStats]
    queues: list[TaskQueue]
    wall_time: float
    backend: str
    sim_counters: dict = field(default_factory=dict)

    def __iter__(self):
        # allows ``precise, inner, per_worker = run_workers(...)``
        return iter((self.total_precise, self.total_inner, self.worker_stats))

    @property
    def pavings(self) -> list[Paving]:
        return [q.results for q in self.queues]

    @property
    def result_arrays(self):
        return [q.result_arrays() for q in self.queues]

    @property
    def paving(self) -> Paving:
        merged = Paving()
        for p in self.pavings:
            merged.extend(p)
        return merged

    @property
    def branch_total(self) -> int:
        return sum(s.branch_count for s in self.search_stats)

    @property
    def prune_total(self) -> int:
        return sum(s.prune_calls for s in self.search_stats)

    @property
    def per_depth(self) -> Counter:
        c: Counter = Counter()
        for s in self.search_stats:
            c.update(s.per_depth)
        return c

    @property
    def sent_total(self) -> int:
        return sum(s.sent_boxes for s in self.worker_stats)

    @property
    def received_total(self) -> int:
        return sum(s.received_boxes for s in self.worker_stats)

    def fingerprint(self) -> np.ndarray:
        return merge_fingerprints(self.result_arrays)

    def conservation_ok(self, roots: int = 1) -> bool:
        """Every created box was pruned once and every sent box arrived."""
        return (2 * self.branch_total + roots == self.prune_total
                and self.sent_total == self.received_total)


def worker_rng(seed: int, wid: int) -> random.Random:
    return random.Random(f"glb/{seed}/{wid}")


def run_workers(p: Problem, eps: float, cfg: GlbConfig,
                backend: str = "threads", costs: SimCosts | None = None,
                timeout: float | None = None) -> GlbResult:
    """Solve ``p`` to precision ``eps`` with ``cfg.workers`` workers.

    Worker 0 owns the initial domain; the others start empty and obtain
    work by stealing.
    """
    if backend not in BACKENDS:
        raise ValueError(f"backend must be one of {BACKENDS}")
    if not eps > 0:
        raise ValueError("eps must be positive")
    p.compiled
    graph = init_lifelines(cfg.workers, cfg.lifeline_l, cfg.lifeline_z)
    if backend == "sim":
        clocks = [SimClock() for _ in range(cfg.workers)]
        nows = clocks
    else:
        clocks = None
        nows = [time.perf_counter] * cfg.workers
    workers = []
    for wid in range(cfg.workers):
        q = TaskQueue.root(p, eps) if wid == ROOT else TaskQueue(p, eps)
        workers.append(Worker(
            wid=wid, P=cfg.workers, queue=q, lifelines=graph.outgoing[wid],
            random_steals=cfg.random_steals, rng=worker_rng(cfg.seed, wid),
            now=nows[wid],
            weight=Fraction(1) if wid == ROOT else Fraction(0)))
    t0 = time.perf_counter()
    counters = {}
    if backend == "sim":
        counters = run_simulation(workers, clocks, cfg.slice_duration,
                                  costs or SimCosts())
    else:
        run_threads(workers, cfg.slice_duration, timeout)
    wall = time.perf_counter() - t0
    if backend == "sim":
        wall = counters["makespan_ns"] * 1e-9
    for w in workers:
        if not w.queue.empty:
            raise RuntimeError(f"worker {w.wid} finished with queued work")
    counts = [w.queue.result() for w in workers]
    return GlbResult(
        total_precise=sum(c[0] for c in counts),
        total_inner=sum(c[1] for c in counts),
        worker_stats=[w.stats for w in workers],
        search_stats=[w.queue.stats for w in workers],
        queues=[w.queue for w in workers], wall_time=wall, backend=backend,
        sim_counters=counters)
