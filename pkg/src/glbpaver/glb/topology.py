"""Scheduler parameters and the lifeline overlay graph."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass


def min_dims(P: int, l: int) -> int:
    """Smallest z >= 1 with l**z >= P."""
    if l < 2:
        raise ValueError("lifeline side l must be >= 2")
    z = 1
    while l ** z < P:
        z += 1
    return z


@dataclass(frozen=True)
class GlbConfig:
    workers: int = 1
    slice_duration: float = 0.001
    random_steals: int = 0
    lifeline_l: int = 2
    lifeline_z: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("need at least one worker")
        if not self.slice_duration > 0:
            raise ValueError("slice duration must be positive")
        if self.random_steals < 0:
            raise ValueError("random steal count must be >= 0")
        if self.lifeline_l < 2:
            raise ValueError("lifeline side l must be >= 2")
        if self.lifeline_z is None:
            object.__setattr__(self, "lifeline_z",
                               min_dims(self.workers, self.lifeline_l))
        if self.lifeline_z < 1:
            raise ValueError("lifeline dimension z must be >= 1")
        if self.lifeline_l ** self.lifeline_z < self.workers:
            raise ValueError(
                f"l^z = {self.lifeline_l}^{self.lifeline_z} is smaller than "
                f"the worker count {self.workers}")

    @classmethod
    def preset(cls, number: int, workers: int, seed: int = 0) -> GlbConfig:
        """The seven benchmark configurations, scaled to ``workers``.

        ``l = P`` is clamped to 2 for a single worker; z is always the
        smallest dimension with l^z >= P.
        """
        wide = max(2, workers)
        table = {
            1: (0.001, 2, "0"),
            2: (0.001, 2, "1"),
            3: (0.001, 2, "z"),
            4: (0.001, wide, "0"),
            5: (0.001, wide, "z"),
            6: (0.1, 2, "0"),
            7: (0.1, 2, "z"),
        }
        if number not in table:
            raise ValueError("preset must be in 1..7")
        n, l, w = table[number]
        z = min_dims(workers, l)
        steals = {"0": 0, "1": 1, "z": z}[w]
        return cls(workers, n, steals, l, z, seed)


@dataclass(frozen=True)
class LifelineGraph:
    P: int
    l: int
    z: int
    outgoing: tuple[tuple[int, ...], ...]

    def edges(self):
        for u, targets in enumerate(self.outgoing):
            for v in targets:
                yield u, v

    def distances_from(self, src: int) -> list[int]:
        """BFS hop counts (-1 for unreachable)."""
        dist = [-1] * self.P
        dist[src] = 0
        todo = deque([src])
        while todo:
            u = todo.popleft()
            for v in self.outgoing[u]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    todo.append(v)
        return dist

    def eccentricity(self, src: int) -> int:
        """Largest hop count from ``src``; -1 if some node is unreachable."""
        d = self.distances_from(src)
        return -1 if min(d) < 0 else max(d)

    def diameter(self) -> int:
        """Largest hop count over all ordered pairs; -1 if not strongly
        connected. Runs all sources at once on integer bitsets."""
        full = (1 << self.P) - 1
        reach = [1 << u for u in range(self.P)]
        hops = 0
        while True:
            if all(r == full for r in reach):
                return hops
            nxt = [r for r in reach]
            for u, targets in enumerate(self.outgoing):
                acc = nxt[u]
                for v in targets:
                    acc |= reach[v]
                nxt[u] = acc
            if nxt == reach:
                return -1
            reach = nxt
            hops += 1

    def strongly_connected(self) -> bool:
        if min(self.distances_from(0)) < 0:
            return False
        incoming = [[] for _ in range(self.P)]
        for u, v in self.edges():
            incoming[v].append(u)
        seen = {0}
        todo = [0]
        while todo:
            u = todo.pop()
            for v in incoming[u]:
                if v not in seen:
                    seen.add(v)
                    todo.append(v)
        return len(seen) == self.P


def init_lifelines(P: int, l: int, z: int) -> LifelineGraph:
    """Hypercube-like overlay: bump each base-l digit of the id by one.

    A target id >= P is bumped again on the same digit until it falls
    below P; if the digit wraps back to the source the edge is dropped.
    """
    if P < 1:
        raise ValueError("need at least one worker")
    if l < 2 or z < 1:
        raise ValueError("need l >= 2 and z >= 1")
    if l ** z < P:
        raise ValueError(f"l^z = {l}^{z} is smaller than P = {P}")
    out = []
    for u in range(P):
        targets: list[int] = []
        for d in range(z):
            place = l ** d
            digit = (u // place) % l
            base = u - digit * place
            for step in range(1, l):
                v = base + ((digit + step) % l) * place
                if v < P:
                    if v not in targets:
                        targets.append(v)
                    break
        out.append(tuple(targets))
    return LifelineGraph(P, l, z, tuple(out))
