"""Execution backends: OS threads, or a deterministic event simulation."""

from __future__ import annotations

import heapq
import queue
import threading
import time
from collections import deque
from dataclasses import dataclass
from typing import Sequence

from .worker import POLL, PROCESS, WAIT, LifelineFulfill, Loot, Send, Worker


class WorkerFailure(RuntimeError):
    pass


# -- threads ---------------------------------------------------------------------

def run_threads(workers: Sequence[Worker], slice_duration: float,
                timeout: float | None = None) -> None:
    """Run each worker on its own thread with FIFO inboxes.

    Prune kernels release the GIL, so workers overlap on multi-core hosts.
    Any worker exception aborts the whole run.
    """
    inboxes = [queue.SimpleQueue() for _ in workers]
    abort = threading.Event()
    errors: list[tuple[int, BaseException]] = []

    def drive(w: Worker) -> None:
        gen = w.run()
        value = None
        inbox = inboxes[w.wid]
        try:
            while True:
                op = gen.send(value)
                value = None
                if op is PROCESS:
                    w.queue.process(slice_duration)
                elif op is POLL:
                    msgs = []
                    while True:
                        try:
                            msgs.append(inbox.get_nowait())
                        except queue.Empty:
                            break
                    value = msgs
                elif op is WAIT:
                    while True:
                        try:
                            value = inbox.get(timeout=0.1)
                            break
                        except queue.Empty:
                            if abort.is_set():
                                return
                else:
                    inboxes[op.dest].put(op.msg)
                if abort.is_set():
                    return
        except StopIteration:
            pass
        except BaseException as exc:  # noqa: BLE001 - reported to caller
            errors.append((w.wid, exc))
            abort.set()

    threads = [threading.Thread(target=drive, args=(w,), daemon=True,
                                name=f"glb-worker-{w.wid}") for w in workers]
    for t in threads:
        t.start()
    deadline = None if timeout is None else time.monotonic() + timeout
    for t in threads:
        left = None if deadline is None else max(0.0, deadline - time.monotonic())
        t.join(left)
        if t.is_alive():
            abort.set()
            raise WorkerFailure(f"{t.name} did not finish within {timeout} s")
    if errors:
        wid, exc = errors[0]
        raise WorkerFailure(f"worker {wid} failed: {exc!r}") from exc


# -- simulation ------------------------------------------------------------------

@dataclass(frozen=True)
class SimCosts:
    """Virtual costs in nanoseconds."""
    prune_ns: int = 100_000
    latency_ns: int = 20_000
    send_ns: int = 2_000
    per_box_ns: int = 500


class SimClock:
    """Per-worker virtual time readable as seconds."""

    def __init__(self):
        self.ns = 0

    def __call__(self) -> float:
        return self.ns * 1e-9


class DeadlockError(WorkerFailure):
    pass


def run_simulation(workers: Sequence[Worker], clocks: Sequence[SimClock],
                   slice_duration: float, costs: SimCosts = SimCosts(),
                   max_events: int = 50_000_000) -> dict:
    """Single-threaded discrete-event run; bit-deterministic.

    Events are ordered by (virtual time, sequence number). A worker runs
    until it advances its clock or blocks on an empty inbox, then yields
    control back to the event loop.
    """
    P = len(workers)
    gens = [w.run() for w in workers]
    inbox: list[deque] = [deque() for _ in range(P)]
    value: list = [None] * P
    blocked = [False] * P
    done = [False] * P
    heap: list = []
    seq = 0
    slice_ns = slice_duration
    counters = {"events": 0, "messages": 0, "dropped": 0}

    def push(t, kind, wid, payload=None):
        nonlocal seq
        heapq.heappush(heap, (t, seq, kind, wid, payload))
        seq += 1

    def step(wid: int) -> None:
        w = workers[wid]
        clock = clocks[wid]
        gen = gens[wid]
        while True:
            try:
                op = gen.send(value[wid])
            except StopIteration:
                done[wid] = True
                return
            value[wid] = None
            if op is PROCESS:
                q = w.queue
                c0 = q.prune_calls
                cost = costs.prune_ns * 1e-9
                q.process(slice_ns,
                          clock=lambda: (q.prune_calls - c0) * cost)
                clock.ns += (q.prune_calls - c0) * costs.prune_ns
                push(clock.ns, 0, wid)
                return
            if op is POLL:
                value[wid] = list(inbox[wid])
                inbox[wid].clear()
                continue
            if op is WAIT:
                if inbox[wid]:
                    value[wid] = inbox[wid].popleft()
                    continue
                blocked[wid] = True
                return
            assert isinstance(op, Send)
            msg = op.msg
            boxes = len(msg.items) if isinstance(msg, (Loot, LifelineFulfill)) else 0
            clock.ns += costs.send_ns + boxes * costs.per_box_ns
            counters["messages"] += 1
            push(clock.ns + costs.latency_ns, 1, op.dest, msg)
            push(clock.ns, 0, wid)
            return

    for wid in range(P):
        push(0, 0, wid)
    while heap:
        counters["events"] += 1
        if counters["events"] > max_events:
            raise DeadlockError(f"simulation exceeded {max_events} events")
        t, _, kind, wid, payload = heapq.heappop(heap)
        if done[wid]:
            if kind == 1:
                counters["dropped"] += 1
            continue
        clocks[wid].ns = max(clocks[wid].ns, t)
        if kind == 1:
            inbox[wid].append(payload)
            if not blocked[wid]:
                continue
            blocked[wid] = False
            value[wid] = inbox[wid].popleft()
        step(wid)
    stuck = [w.wid for w, d in zip(workers, done) if not d]
    if stuck:
        raise DeadlockError(f"workers {stuck} blocked with no pending events")
    counters["makespan_ns"] = max(c.ns for c in clocks)
    return counters
