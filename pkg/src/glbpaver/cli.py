"""Command-line driver: ``glbpaver solve <problem> --eps E [options]``."""

from __future__ import annotations

import argparse
import csv
import sys
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _kernels as K
from .glb import BACKENDS, GlbConfig, GlbResult, WorkerStats, min_dims, run_workers
from .problems import ProblemSyntaxError, resolve_problem

STATS_COLUMNS = ("worker_id", "active_s", "idle_s", "distribute_s",
                 "sent_boxes", "received_boxes", "prune_calls", "branches")


@dataclass
class RunReport:
    problem: str
    eps: float
    config: GlbConfig
    backend: str
    wall_time: float
    total_precise: int
    total_inner: int
    unique_solutions: int
    branch_total: int
    prune_total: int
    worker_stats: list[WorkerStats]
    prune_calls: list[int]
    branches: list[int]
    per_depth: Counter

    @classmethod
    def from_result(cls, name: str, eps: float, cfg: GlbConfig,
                    res: GlbResult) -> RunReport:
        unique = sum(int(np.count_nonzero(tags == K.TAG_UNIQUE))
                     for tags, _, _ in res.result_arrays)
        return cls(
            problem=name, eps=eps, config=cfg, backend=res.backend,
            wall_time=res.wall_time, total_precise=res.total_precise,
            total_inner=res.total_inner, unique_solutions=unique,
            branch_total=res.branch_total, prune_total=res.prune_total,
            worker_stats=res.worker_stats,
            prune_calls=[s.prune_calls for s in res.search_stats],
            branches=[s.branch_count for s in res.search_stats],
            per_depth=res.per_depth)

    @property
    def mean_active_ratio(self) -> float:
        return float(np.mean([s.active_ratio for s in self.worker_stats]))

    @property
    def sent_boxes(self) -> int:
        return sum(s.sent_boxes for s in self.worker_stats)

    def summary(self) -> str:
        c = self.config
        lines = [
            f"problem        {self.problem}",
            f"eps            {self.eps!r}",
            f"backend        {self.backend}",
            f"workers        {c.workers}  (slice {c.slice_duration!r} s, "
            f"w={c.random_steals}, l={c.lifeline_l}, z={c.lifeline_z}, "
            f"seed={c.seed})",
            f"wall time      {self.wall_time:.3f} s"
            + ("  (virtual)" if self.backend == "sim" else ""),
            f"precise boxes  {self.total_precise}",
            f"inner boxes    {self.total_inner}  "
            f"({self.unique_solutions} certified unique solutions)",
            f"branches       {self.branch_total}",
            f"prune calls    {self.prune_total}",
            f"active ratio   {self.mean_active_ratio:.3f}",
            f"sent boxes     {self.sent_boxes}",
        ]
        return "\n".join(lines)


def emit_stats_csv(report: RunReport, path: str | Path) -> None:
    """Per-worker rows, a blank line, then the per-depth node counts."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(STATS_COLUMNS)
        for s, prunes, branches in zip(report.worker_stats, report.prune_calls,
                                       report.branches):
            w.writerow([s.worker_id, f"{s.active_time:.6f}",
                        f"{s.idle_time:.6f}", f"{s.distribute_time:.6f}",
                        s.sent_boxes, s.received_boxes, prunes, branches])
        w.writerow([])
        w.writerow(["depth", "path_count"])
        for depth in sorted(report.per_depth):
            w.writerow([depth, report.per_depth[depth]])


def read_stats_csv(path: str | Path) -> tuple[list[dict], dict[int, int]]:
    workers: list[dict] = []
    depths: dict[int, int] = {}
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    split = rows.index([])
    header = rows[0]
    for r in rows[1:split]:
        workers.append(dict(zip(header, r)))
    for r in rows[split + 2:]:
        depths[int(r[0])] = int(r[1])
    return workers, depths


def _fmt(x: float) -> str:
    return repr(float(x))


def emit_paving(parts, path: str | Path) -> int:
    """Write boxes as ``P|I<TAB>[lo,hi]<TAB>...`` lines; returns the count.

    ``parts`` is a sequence of ``(tags, lo, hi)`` result arrays.
    """
    count = 0
    with open(path, "w") as fh:
        for tags, lo, hi in parts:
            for t, row_lo, row_hi in zip(tags, lo.tolist(), hi.tolist()):
                tag = "P" if t == K.TAG_PRECISE else "I"
                fields = "\t".join(f"[{_fmt(a)},{_fmt(b)}]"
                                   for a, b in zip(row_lo, row_hi))
                fh.write(f"{tag}\t{fields}\n")
                count += 1
    return count


def read_paving(path: str | Path) -> list[tuple[str, list[tuple[float, float]]]]:
    out = []
    with open(path) as fh:
        for line in fh:
            tag, *fields = line.rstrip("\n").split("\t")
            box = []
            for f in fields:
                lo, hi = f[1:-1].split(",")
                box.append((float(lo), float(hi)))
            out.append((tag, box))
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="glbpaver",
        description="Parallel branch-and-prune solver for numerical "
                    "constraint problems.")
    sub = ap.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", help="pave the solution set of a problem")
    s.add_argument("problem", help="builtin:<eco8|disks|sphere-plane(3)|...> "
                                   "or file:<path>")
    s.add_argument("--eps", type=float, required=True,
                   help="precision: boxes this narrow are not split further")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--slice-ms", type=float, default=None,
                   help="milliseconds of work between load balancing "
                        "(default 1)")
    s.add_argument("--steal-w", type=int, default=None,
                   help="random steal attempts before lifelines (default 0)")
    s.add_argument("--lifeline-l", type=int, default=None,
                   help="lifeline graph side (default 2)")
    s.add_argument("--lifeline-z", type=int, default=None,
                   help="lifeline graph dimension (default: smallest z "
                        "with l^z >= workers)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--backend", choices=BACKENDS, default="threads")
    s.add_argument("--stats-csv", metavar="PATH")
    s.add_argument("--paving", metavar="PATH")
    s.add_argument("--config", type=int, choices=range(1, 8), metavar="1..7",
                   help="preset (slice, l, w) tuple; explicit flags override")
    return ap


def config_from_args(args: argparse.Namespace) -> GlbConfig:
    if args.workers < 1:
        raise ValueError("--workers must be >= 1")
    if args.config is not None:
        base = GlbConfig.preset(args.config, args.workers, args.seed)
        slice_s, w, l = base.slice_duration, base.random_steals, base.lifeline_l
    else:
        slice_s, w, l = 0.001, 0, 2
    if args.slice_ms is not None:
        slice_s = args.slice_ms / 1000.0
    if args.steal_w is not None:
        w = args.steal_w
    if args.lifeline_l is not None:
        l = args.lifeline_l
    z = args.lifeline_z if args.lifeline_z is not None else min_dims(args.workers, l)
    if args.config in (3, 5, 7) and args.steal_w is None:
        w = z
    return GlbConfig(args.workers, slice_s, w, l, z, args.seed)


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = config_from_args(args)
        problem = resolve_problem(args.problem)
    except (ValueError, OSError, ProblemSyntaxError) as exc:
        print(f"glbpaver: error: {exc}", file=sys.stderr)
        return 2
    if not args.eps > 0:
        print("glbpaver: error: --eps must be positive", file=sys.stderr)
        return 2
    res = run_workers(problem, args.eps, cfg, backend=args.backend)
    report = RunReport.from_result(problem.name or args.problem, args.eps,
                                   cfg, res)
    print(report.summary())
    try:
        if args.stats_csv:
            emit_stats_csv(report, args.stats_csv)
        if args.paving:
            emit_paving(res.result_arrays, args.paving)
    except OSError as exc:
        print(f"glbpaver: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
