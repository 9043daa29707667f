"""Worker protocol shared by both execution backends.

A worker is a generator that yields operations to its backend:

* ``PROCESS``: run one slice of branch and prune on the local queue;
* ``POLL``: receive every message already delivered (returns a list);
* ``WAIT``: block until one message arrives (returns it);
* ``Send(dest, msg)``: deliver ``msg`` to worker ``dest``.

The backend decides what time means. The worker reads it only through
the ``now`` callable it was created with.

Termination uses weight throwing. Worker 0 starts with the root box and
weight 1. Every loot message carries half of the sender's weight. A
worker whose queue runs dry sends its weight back to worker 0, and
worker 0 broadcasts ``Terminate`` once it is idle holding weight 1. Work
always travels with positive weight, so at that point no queue holds
boxes and no loot is in flight.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Union

from ..search import TaskQueue, WorkItem

ROOT = 0


@dataclass(frozen=True)
class StealRequest:
    thief: int
    via_lifeline: bool


@dataclass(frozen=True)
class Loot:
    """Reply to a steal request carrying work."""
    source: int
    items: tuple
    weight: Fraction
    via_lifeline: bool

    def __post_init__(self):
        if not self.items:
            raise ValueError("loot must carry at least one box")


@dataclass(frozen=True)
class NoWork:
    source: int


@dataclass(frozen=True)
class LifelineFulfill:
    """Deferred answer to a lifeline request that had to wait."""
    source: int
    items: tuple
    weight: Fraction

    def __post_init__(self):
        if not self.items:
            raise ValueError("loot must carry at least one box")


@dataclass(frozen=True)
class WeightReturn:
    source: int
    weight: Fraction


@dataclass(frozen=True)
class Terminate:
    pass


Message = Union[StealRequest, Loot, NoWork, LifelineFulfill, WeightReturn,
                Terminate]


class _Op:
    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return self.name


PROCESS = _Op("PROCESS")
POLL = _Op("POLL")
WAIT = _Op("WAIT")


@dataclass(frozen=True)
class Send:
    dest: int
    msg: Message


@dataclass
class WorkerStats:
    worker_id: int
    active_time: float = 0.0
    idle_time: float = 0.0
    distribute_time: float = 0.0
    sent_boxes: int = 0
    received_boxes: int = 0
    steal_attempts: int = 0
    steal_successes: int = 0
    random_attempts: int = 0
    lifeline_attempts: int = 0
    nowork_replies: int = 0
    messages_sent: int = 0

    @property
    def total_time(self) -> float:
        return self.active_time + self.idle_time + self.distribute_time

    @property
    def active_ratio(self) -> float:
        t = self.total_time
        return self.active_time / t if t > 0 else 1.0


def _encode(items: list[WorkItem]) -> tuple:
    return tuple(it.to_wire() for it in items)


def _decode(items: tuple) -> list[WorkItem]:
    return [WorkItem.from_wire(x) for x in items]


@dataclass
class Worker:
    wid: int
    P: int
    queue: TaskQueue
    lifelines: tuple[int, ...]
    random_steals: int
    rng: random.Random
    now: Callable[[], float]
    weight: Fraction = Fraction(0)
    stats: WorkerStats = field(init=False)
    activated: dict = field(init=False)
    #: thieves whose lifeline requests wait for work, oldest first
    lifeline_thieves: deque = field(default_factory=deque)
    #: steal requests received since the last distribution
    pending: list = field(default_factory=list)
    terminated: bool = False
    _outbox: list = field(default_factory=list)
    _phase: str = "idle"
    _mark: float = 0.0

    def __post_init__(self):
        self.stats = WorkerStats(self.wid)
        self.activated = {v: False for v in self.lifelines}

    # -- time accounting ----------------------------------------------------------

    def _switch(self, phase: str) -> None:
        t = self.now()
        dt = t - self._mark
        if self._phase == "active":
            self.stats.active_time += dt
        elif self._phase == "distribute":
            self.stats.distribute_time += dt
        else:
            self.stats.idle_time += dt
        self._mark = t
        self._phase = phase

    # -- message handling ---------------------------------------------------------

    def _send(self, dest: int, msg: Message):
        self.stats.messages_sent += 1
        return Send(dest, msg)

    def _take_weight(self) -> Fraction:
        half = self.weight / 2
        self.weight -= half
        return half

    def _receive_items(self, items: tuple, weight: Fraction) -> None:
        boxes = _decode(items)
        self.queue.merge(boxes)
        self.stats.received_boxes += len(boxes)
        self.weight += weight

    def _handle(self, msg: Message) -> None:
        """React to a message that is not an awaited steal reply."""
        if isinstance(msg, StealRequest):
            if self.queue.empty:
                # idle workers have nothing to give
                self._outbox.append(self._send(msg.thief, NoWork(self.wid)))
                if msg.via_lifeline:
                    self._record_lifeline(msg.thief)
            else:
                self.pending.append(msg)
        elif isinstance(msg, LifelineFulfill):
            self._receive_items(msg.items, msg.weight)
            self.activated[msg.source] = False
            self.stats.steal_successes += 1
        elif isinstance(msg, WeightReturn):
            if self.wid != ROOT:
                raise RuntimeError("weight returned to a non-root worker")
            self.weight += msg.weight
        elif isinstance(msg, Terminate):
            self.terminated = True
        elif isinstance(msg, (Loot, NoWork)):
            raise RuntimeError(f"worker {self.wid}: unexpected reply {msg}")
        else:
            raise TypeError(f"unknown message {msg!r}")

    def _record_lifeline(self, thief: int) -> None:
        if thief not in self.lifeline_thieves:
            self.lifeline_thieves.append(thief)

    def _flush(self) -> Iterator:
        out, self._outbox = self._outbox, []
        yield from out

    def distribute_to_thieves(self) -> list[Send]:
        """Serve waiting lifelines, then fresh requests, in arrival order.

        Each thief gets ``split()`` of what is left while two or more boxes
        remain. Random thieves that cannot be served get NoWork; lifeline
        thieves stay recorded until work appears.
        """
        sends = []
        for thief in list(self.lifeline_thieves):
            if len(self.queue) < 2:
                break
            share = self.queue.split()
            self.lifeline_thieves.remove(thief)
            self.stats.sent_boxes += len(share)
            sends.append(self._send(thief, LifelineFulfill(
                self.wid, _encode(share), self._take_weight())))
        pending, self.pending = self.pending, []
        for req in pending:
            if len(self.queue) >= 2:
                share = self.queue.split()
                self.stats.sent_boxes += len(share)
                sends.append(self._send(req.thief, Loot(
                    self.wid, _encode(share), self._take_weight(),
                    req.via_lifeline)))
            else:
                sends.append(self._send(req.thief, NoWork(self.wid)))
                if req.via_lifeline:
                    self._record_lifeline(req.thief)
        return sends

    # -- steal attempts -----------------------------------------------------------

    def random_victim(self) -> int:
        v = self.rng.randrange(self.P - 1)
        return v + 1 if v >= self.wid else v

    def _try_steal(self, victim: int, via_lifeline: bool):
        """Send one request and wait for its reply; True on loot."""
        self.stats.steal_attempts += 1
        if via_lifeline:
            self.stats.lifeline_attempts += 1
        else:
            self.stats.random_attempts += 1
        yield self._send(victim, StealRequest(self.wid, via_lifeline))
        while True:
            msg = yield WAIT
            if isinstance(msg, Loot) and msg.source == victim:
                self._receive_items(msg.items, msg.weight)
                if via_lifeline:
                    self.activated[victim] = False
                self.stats.steal_successes += 1
                return True
            if isinstance(msg, NoWork) and msg.source == victim:
                self.stats.nowork_replies += 1
                return False
            self._handle(msg)
            yield from self._flush()
            # deferred loot may have arrived: never hold a request while
            # blocked, or two waiting thieves could block each other
            for s in self.distribute_to_thieves():
                yield s
            if self.terminated:
                return False

    # -- main loop ----------------------------------------------------------------

    def _return_weight(self):
        if self.wid != ROOT and self.weight:
            w, self.weight = self.weight, Fraction(0)
            yield self._send(ROOT, WeightReturn(self.wid, w))

    def _root_check(self):
        if (self.wid == ROOT and self.queue.empty and self.weight == 1
                and not self.terminated):
            self.terminated = True
            for v in range(self.P):
                if v != ROOT:
                    yield self._send(v, Terminate())

    def _drain(self):
        msgs = yield POLL
        for m in msgs:
            self._handle(m)
        yield from self._flush()

    def run(self):
        self._mark = self.now()
        self._phase = "idle"
        while not self.terminated:
            # active phase (Fig. 2 lines 2-4)
            while not self.queue.empty and not self.terminated:
                self._switch("active")
                yield PROCESS
                self._switch("distribute")
                yield from self._drain()
                for s in self.distribute_to_thieves():
                    yield s
            self._switch("idle")
            if self.terminated:
                break
            # answer anything left so no thief keeps waiting on us
            yield from self._drain()
            for s in self.distribute_to_thieves():
                yield s
            yield from self._return_weight()
            yield from self._root_check()
            if self.terminated:
                break
            if self.P == 1:
                continue
            # phase 1: random victims
            j = 0
            while j < self.random_steals and self.queue.empty \
                    and not self.terminated:
                yield from self._try_steal(self.random_victim(), False)
                j += 1
            # phase 2: lifelines not yet signalled
            for v in self.lifelines:
                if not self.queue.empty or self.terminated:
                    break
                if not self.activated[v]:
                    self.activated[v] = True
                    yield from self._try_steal(v, True)
            # wait for deferred lifeline loot or termination
            while self.queue.empty and not self.terminated:
                yield from self._return_weight()
                yield from self._root_check()
                if self.terminated:
                    break
                msg = yield WAIT
                self._handle(msg)
                yield from self._flush()
        self._switch("done")
