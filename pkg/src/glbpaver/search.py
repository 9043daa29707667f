"""Breadth-first branch and prune, packaged as a splittable task queue."""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple

import numpy as np

from . import _kernels as K
from .contractor import (
    INFLATION, MAX_HC4_ROUNDS, MAX_NEWTON_SWEEPS, MIN_NEWTON_GAIN, THETA,
    Certificate,
)
from .expression import Problem
from .interval import Box

Clock = Callable[[], float]


class WorkItem(NamedTuple):
    lo: np.ndarray
    hi: np.ndarray
    depth: int

    @classmethod
    def from_box(cls, box: Box, depth: int = 0) -> WorkItem:
        return cls(box.lo, box.hi, depth)

    @property
    def box(self) -> Box:
        return Box(self.lo, self.hi)

    def to_wire(self) -> tuple[list[float], list[float], int]:
        return self.lo.tolist(), self.hi.tolist(), self.depth

    @classmethod
    def from_wire(cls, data) -> WorkItem:
        lo, hi, depth = data
        return cls(np.array(lo, dtype=np.float64),
                   np.array(hi, dtype=np.float64), int(depth))


@dataclass
class Paving:
    precise_boxes: list[Box] = field(default_factory=list)
    inner_boxes: list[Box] = field(default_factory=list)
    #: certificate of each inner box (INNER_VERIFIED or UNIQUE_SOLUTION)
    inner_certificates: list[Certificate] = field(default_factory=list)

    @property
    def precise_count(self) -> int:
        return len(self.precise_boxes)

    @property
    def inner_count(self) -> int:
        return len(self.inner_boxes)

    @property
    def solution_boxes(self) -> list[Box]:
        return [b for b, c in zip(self.inner_boxes, self.inner_certificates)
                if c is Certificate.UNIQUE_SOLUTION]

    def extend(self, other: Paving) -> None:
        self.precise_boxes.extend(other.precise_boxes)
        self.inner_boxes.extend(other.inner_boxes)
        self.inner_certificates.extend(other.inner_certificates)

    def tagged(self) -> list[tuple[str, Box]]:
        return ([("P", b) for b in self.precise_boxes]
                + [("I", b) for b in self.inner_boxes])

    def multiset(self) -> list[tuple[str, tuple, tuple]]:
        """Order-independent exact fingerprint for comparisons."""
        return sorted((tag, *b.key()) for tag, b in self.tagged())


@dataclass
class SearchStats:
    branch_count: int = 0
    prune_calls: int = 0
    prune_time: float = 0.0
    active_time: float = 0.0
    per_depth: Counter = field(default_factory=Counter)

    def merge(self, other: SearchStats) -> None:
        self.branch_count += other.branch_count
        self.prune_calls += other.prune_calls
        self.prune_time += other.prune_time
        self.active_time += other.active_time
        self.per_depth.update(other.per_depth)


class TaskQueue:
    """Queue of undecided boxes plus the local part of the paving.

    A queue is owned by one worker at a time. ``split`` and ``merge`` move
    work between queues; since each box's fate depends only on the box and
    its depth, any interleaving yields the same overall paving.

    Boxes live in a ring buffer so that whole slices run inside one
    compiled call.
    """

    def __init__(self, problem: Problem, eps: float,
                 items: Iterable[WorkItem] = ()):
        if not eps > 0:
            raise ValueError("eps must be positive")
        self.problem = problem
        self.eps = float(eps)
        self._cp = problem.compiled  # compile before any timing starts
        n = problem.n
        self._qlo = np.empty((16, n))
        self._qhi = np.empty((16, n))
        self._qdepth = np.zeros(16, dtype=np.int64)
        self._rlo = np.empty((16, n))
        self._rhi = np.empty((16, n))
        self._rtag = np.zeros(16, dtype=np.int8)
        self._hist = np.zeros(64, dtype=np.int64)
        self._state = np.zeros(5, dtype=np.int64)
        self._prune_time = 0.0
        self._active_time = 0.0
        self._paving: Paving | None = None
        self._paving_count = -1
        self.merge(items)

    @classmethod
    def root(cls, problem: Problem, eps: float) -> TaskQueue:
        q = cls(problem, eps)
        if not problem.domain.is_empty:
            q.merge([WorkItem.from_box(problem.domain)])
        return q

    # -- queue view ------------------------------------------------------------

    @property
    def empty(self) -> bool:
        return self._state[K.Q_SIZE] == 0

    def __len__(self) -> int:
        return int(self._state[K.Q_SIZE])

    def _order(self) -> np.ndarray:
        """Buffer rows of the queued items, front to back."""
        cap = self._qlo.shape[0]
        return (self._state[K.Q_HEAD] + np.arange(len(self))) % cap

    def items(self) -> list[WorkItem]:
        rows = self._order()
        return [WorkItem(self._qlo[r].copy(), self._qhi[r].copy(),
                         int(self._qdepth[r])) for r in rows]

    @property
    def prune_calls(self) -> int:
        return int(self._state[K.Q_PRUNES])

    # -- buffers -----------------------------------------------------------------

    def _compact(self, capacity: int) -> None:
        rows = self._order()
        n = self.problem.n
        qlo = np.empty((capacity, n))
        qhi = np.empty((capacity, n))
        qdepth = np.zeros(capacity, dtype=np.int64)
        m = len(rows)
        qlo[:m] = self._qlo[rows]
        qhi[:m] = self._qhi[rows]
        qdepth[:m] = self._qdepth[rows]
        self._qlo, self._qhi, self._qdepth = qlo, qhi, qdepth
        self._state[K.Q_HEAD] = 0

    def _grow(self) -> None:
        size = len(self)
        if size + 1 > self._qlo.shape[0]:
            self._compact(2 * self._qlo.shape[0])
        r = self._state[K.Q_RESULTS]
        if r >= self._rlo.shape[0]:
            cap = 2 * self._rlo.shape[0]
            self._rlo = np.resize(self._rlo, (cap, self.problem.n))
            self._rhi = np.resize(self._rhi, (cap, self.problem.n))
            self._rtag = np.resize(self._rtag, cap)
        if size:
            top = int(self._qdepth[self._order()].max())
            if top + 1 >= self._hist.shape[0]:
                hist = np.zeros(2 * (top + 1), dtype=np.int64)
                hist[:self._hist.shape[0]] = self._hist
                self._hist = hist

    def _run(self, max_prunes: int) -> int:
        cp = self._cp
        done = 0
        while done < max_prunes and not self.empty:
            t0 = time.perf_counter()
            k = K.process_batch(
                cp.tape, cp.con_start, cp.con_end, cp.con_rel, cp.eq_start,
                cp.eq_end, cp.dtape, cp.droot, THETA, MAX_HC4_ROUNDS,
                MAX_NEWTON_SWEEPS, MIN_NEWTON_GAIN, INFLATION, self.eps,
                self._qlo, self._qhi, self._qdepth, self._rlo, self._rhi,
                self._rtag, self._hist, self._state, max_prunes - done)
            self._prune_time += time.perf_counter() - t0
            done += k
            if k == 0 or done < max_prunes:
                self._grow()
        return done

    # -- search ------------------------------------------------------------------

    def step(self) -> None:
        """Extract, prune and classify the front box."""
        if self.empty:
            raise IndexError("step on an empty queue")
        self._run(1)

    def process(self, min_duration: float,
                clock: Clock = time.perf_counter) -> bool:
        """Run branch and prune for at least ``min_duration`` (by ``clock``).

        Work proceeds in compiled batches sized from the observed cost per
        box, so the overshoot stays within one box's time plus half of
        what remained. Returns True while work remains.
        """
        start = clock()
        t0 = time.perf_counter()
        batch = 1
        done = 0
        while not self.empty:
            done += self._run(batch)
            elapsed = clock() - start
            remaining = min_duration - elapsed
            if remaining <= 0:
                break
            per_box = elapsed / done if done else 0.0
            batch = max(1, int(remaining / per_box / 2)) if per_box > 0 else 1
        self._active_time += time.perf_counter() - t0
        return not self.empty

    def split(self) -> list[WorkItem]:
        """Give away every second queued box (nothing if fewer than two)."""
        size = len(self)
        if size < 2:
            return []
        rows = self._order()
        give = rows[1::2]
        out = [WorkItem(self._qlo[r].copy(), self._qhi[r].copy(),
                        int(self._qdepth[r])) for r in give]
        keep = rows[0::2]
        m = len(keep)
        self._qlo[:m], self._qhi[:m], self._qdepth[:m] = (
            self._qlo[keep], self._qhi[keep], self._qdepth[keep])
        self._state[K.Q_HEAD] = 0
        self._state[K.Q_SIZE] = m
        return out

    def merge(self, loot: Iterable[WorkItem]) -> None:
        loot = list(loot)
        if not loot:
            return
        n = self.problem.n
        size = len(self)
        need = size + len(loot) + 1
        cap = self._qlo.shape[0]
        if need > cap:
            while cap < need:
                cap *= 2
        self._compact(cap)
        for i, it in enumerate(loot):
            if len(it.lo) != n or len(it.hi) != n:
                raise ValueError("work item dimension mismatch")
            self._qlo[size + i] = it.lo
            self._qhi[size + i] = it.hi
            self._qdepth[size + i] = it.depth
        self._state[K.Q_SIZE] = size + len(loot)
        self._grow()

    # -- results -----------------------------------------------------------------

    @property
    def results(self) -> Paving:
        r = int(self._state[K.Q_RESULTS])
        if self._paving is None or self._paving_count != r:
            pav = Paving()
            for i in range(r):
                b = Box(self._rlo[i], self._rhi[i])
                tag = self._rtag[i]
                if tag == K.TAG_PRECISE:
                    pav.precise_boxes.append(b)
                else:
                    pav.inner_boxes.append(b)
                    pav.inner_certificates.append(
                        Certificate.INNER_VERIFIED if tag == K.TAG_INNER
                        else Certificate.UNIQUE_SOLUTION)
            self._paving, self._paving_count = pav, r
        return self._paving

    @property
    def stats(self) -> SearchStats:
        hist = self._hist
        return SearchStats(
            branch_count=int(self._state[K.Q_BRANCHES]),
            prune_calls=int(self._state[K.Q_PRUNES]),
            prune_time=self._prune_time,
            active_time=self._active_time,
            per_depth=Counter({d: int(c) for d, c in enumerate(hist) if c}))

    def result_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Copies of (tags, lo, hi) for every stored box."""
        r = int(self._state[K.Q_RESULTS])
        return (self._rtag[:r].copy(), self._rlo[:r].copy(),
                self._rhi[:r].copy())

    def fingerprint(self) -> np.ndarray:
        return fingerprint(*self.result_arrays())

    def run_to_completion(self) -> None:
        t0 = time.perf_counter()
        self._run(1 << 62)
        self._active_time += time.perf_counter() - t0

    def result(self) -> tuple[int, int]:
        r = int(self._state[K.Q_RESULTS])
        precise = int(np.count_nonzero(self._rtag[:r] == K.TAG_PRECISE))
        return precise, r - precise


def solve_sequential(p: Problem, eps: float) -> tuple[Paving, SearchStats]:
    q = TaskQueue.root(p, eps)
    q.run_to_completion()
    return q.results, q.stats


def fingerprint(tags: np.ndarray, lo: np.ndarray, hi: np.ndarray
                ) -> np.ndarray:
    """Order-independent, bit-exact form of a paving.

    Rows are (tag, raw bits of lo, raw bits of hi), sorted; two pavings are
    the same multiset exactly when their fingerprints are equal.
    """
    lo = np.ascontiguousarray(lo, dtype=np.float64)
    hi = np.ascontiguousarray(hi, dtype=np.float64)
    rows = np.concatenate([np.asarray(tags, dtype=np.uint64)[:, None],
                           lo.view(np.uint64), hi.view(np.uint64)], axis=1)
    if len(rows) == 0:
        return rows
    order = np.lexsort(rows.T[::-1])
    return rows[order]


def merge_fingerprints(parts) -> np.ndarray:
    parts = list(parts)
    tags = np.concatenate([p[0] for p in parts])
    lo = np.concatenate([p[1] for p in parts])
    hi = np.concatenate([p[2] for p in parts])
    return fingerprint(tags, lo, hi)
