import random

import numpy as np
import pytest

from glbpaver import _kernels as K
from glbpaver.interval import Box
from glbpaver.problems import builtin_problem, parse_problem
from glbpaver.search import (
    TaskQueue, WorkItem, fingerprint, merge_fingerprints, solve_sequential,
)


def _item(v: float, depth: int = 0) -> WorkItem:
    return WorkItem(np.array([v]), np.array([v + 0.5]), depth)


def _labels(q: TaskQueue) -> list[float]:
    return [float(it.lo[0]) for it in q.items()]


@pytest.fixture(scope="module")
def line():
    return parse_problem("var x in [0, 10];\ncon x - 3 < 0;")


@pytest.fixture(scope="module")
def disks():
    return builtin_problem("disks")


def test_split_takes_every_second_item(line):
    q = TaskQueue(line, 0.1, [_item(v) for v in range(5)])
    share = q.split()
    assert [float(it.lo[0]) for it in share] == [1, 3]
    assert _labels(q) == [0, 2, 4]


@pytest.mark.parametrize("size", [0, 1])
def test_split_below_two_gives_nothing(line, size):
    q = TaskQueue(line, 0.1, [_item(v) for v in range(size)])
    assert q.split() == [] and len(q) == size


def test_merge_appends_in_order(line):
    q = TaskQueue(line, 0.1)
    q.merge([_item(7)])
    assert _labels(q) == [7]
    q.merge([])
    assert _labels(q) == [7]
    q.merge([_item(8), _item(9, depth=3)])
    assert _labels(q) == [7, 8, 9]
    assert [it.depth for it in q.items()] == [0, 0, 3]


def test_split_merge_round_trip_conserves_items(line):
    a = TaskQueue(line, 0.1, [_item(v, v % 4) for v in range(11)])
    b = TaskQueue(line, 0.1, [_item(100 + v) for v in range(3)])
    before = sorted(_labels(a) + _labels(b))
    b.merge(a.split())
    a.merge(b.split())
    assert sorted(_labels(a) + _labels(b)) == before


def test_merge_rejects_wrong_dimension(line):
    q = TaskQueue(line, 0.1)
    with pytest.raises(ValueError):
        q.merge([WorkItem(np.zeros(2), np.ones(2), 0)])


def test_fresh_queue_has_no_results(line):
    q = TaskQueue.root(line, 0.1)
    assert q.result() == (0, 0) and not q.empty


def test_immediate_refutation_leaves_nothing():
    p = parse_problem("var x in [3, 5];\ncon x^2 - 4 = 0;")
    q = TaskQueue.root(p, 0.1)
    assert q.process(0.001) is False
    assert q.empty and q.result() == (0, 0)
    assert q.stats.prune_calls == 1 and q.stats.branch_count == 0


def test_narrow_box_is_stored_as_precise():
    p = parse_problem("var x in [0, 0.05];\ncon x^2 - x < 0;")
    q = TaskQueue.root(p, 0.1)
    assert q.process(0.001) is False
    assert q.result() == (1, 0)


def test_inner_box_is_stored_as_inner(line):
    q = TaskQueue.root(line.with_domain(Box([0], [2])), 0.01)
    q.run_to_completion()
    assert q.result() == (0, 1)


def test_unsplittable_box_is_stored_as_precise():
    one = 1.0
    nxt = np.nextafter(one, 2.0)
    p = parse_problem("var x in [0, 2];\ncon x - 1 = 0;\ncon x^3 - x^2 < 1;")
    q = TaskQueue(p, 1e-300, [WorkItem(np.array([one]), np.array([nxt]), 0)])
    q.run_to_completion()
    assert sum(q.result()) == 1


def test_step_requires_work(line):
    q = TaskQueue(line, 0.1)
    with pytest.raises(IndexError):
        q.step()


def test_empty_domain_gives_empty_paving(disks):
    p = disks.with_domain(Box.empty(4))
    pav, stats = solve_sequential(p, 0.1)
    assert pav.precise_count == pav.inner_count == 0
    assert stats.branch_count == 0


def test_counts_are_monotone_across_slices(disks):
    q = TaskQueue.root(disks, 0.02)
    last = (0, 0)
    while q.process(0.0005):
        now = q.result()
        assert now[0] >= last[0] and now[1] >= last[1]
        last = now


def test_determinism(disks):
    a, sa = solve_sequential(disks, 0.03)
    b, sb = solve_sequential(disks, 0.03)
    assert a.multiset() == b.multiset()
    assert sa.branch_count == sb.branch_count


def test_per_depth_counts_total_nodes_visited(disks):
    q = TaskQueue.root(disks, 0.03)
    q.run_to_completion()
    s = q.stats
    assert sum(s.per_depth.values()) == s.prune_calls == 2 * s.branch_count + 1


def _fake_clock(q: TaskQueue, cost: float):
    return lambda: q.prune_calls * cost


@pytest.mark.parametrize("name,eps", [("disks", 0.03), ("eco6", 1e-8)])
def test_slice_invariance(name, eps):
    p = builtin_problem(name)
    ref = TaskQueue.root(p, eps)
    ref.run_to_completion()
    rng = random.Random(name)
    q = TaskQueue.root(p, eps)
    clock = _fake_clock(q, 1.0)
    while q.process(rng.choice([0.5, 1, 3, 17, 250]), clock=clock):
        pass
    assert np.array_equal(q.fingerprint(), ref.fingerprint())
    assert q.stats.branch_count == ref.stats.branch_count


def test_eco8_real_time_slices_match_single_run():
    p = builtin_problem("eco8")
    ref = TaskQueue.root(p, 1e-8)
    ref.run_to_completion()
    q = TaskQueue.root(p, 1e-8)
    while q.process(0.001):
        pass
    assert np.array_equal(q.fingerprint(), ref.fingerprint())
    assert ref.result() == (0, 8)


@pytest.mark.parametrize("seed", range(3))
def test_partition_invariance(disks, seed):
    eps = 0.03
    ref = TaskQueue.root(disks, eps)
    ref.run_to_completion()
    rng = random.Random(seed)
    queues = [TaskQueue.root(disks, eps)] + [TaskQueue(disks, eps)
                                             for _ in range(3)]
    while any(not q.empty for q in queues):
        q = rng.choice(queues)
        action = rng.random()
        if action < 0.6:
            if not q.empty:
                for _ in range(rng.randint(1, 40)):
                    if q.empty:
                        break
                    q.step()
        else:
            rng.choice(queues).merge(q.split())
    combined = merge_fingerprints(q.result_arrays() for q in queues)
    assert np.array_equal(combined, ref.fingerprint())


def test_fingerprint_is_order_independent():
    rng = np.random.default_rng(0)
    lo = rng.normal(size=(50, 3))
    hi = lo + 1
    tags = rng.integers(0, 3, 50).astype(np.int8)
    perm = rng.permutation(50)
    assert np.array_equal(fingerprint(tags, lo, hi),
                          fingerprint(tags[perm], lo[perm], hi[perm]))
    tags2 = tags.copy()
    tags2[0] = (tags2[0] + 1) % 3
    assert not np.array_equal(fingerprint(tags, lo, hi),
                              fingerprint(tags2, lo, hi))


def _covered(lo, hi, pts) -> bool:
    return all(bool(np.any(np.all((lo <= p) & (p <= hi), axis=1))) for p in pts)


def test_disks_paving_covers_sampled_solutions(disks):
    q = TaskQueue.root(disks, 0.01)
    q.run_to_completion()
    _, lo, hi = q.result_arrays()
    rng = np.random.default_rng(2)
    pts = []
    while len(pts) < 400:
        v1, v2 = rng.uniform(-1, 1, 2)
        v3, v4 = v1 ** 2 + v2 ** 2, (v1 - 1) ** 2 + v2 ** 2
        if v3 <= 1 and v4 <= 1:
            pts.append(np.array([v1, v2, v3, v4]))
    assert _covered(lo, hi, pts)


def test_sphere_plane_paving_covers_circle():
    p = builtin_problem("sphere-plane(3)")
    q = TaskQueue.root(p, 0.05)
    q.run_to_completion()
    tags, lo, hi = q.result_arrays()
    assert len(tags) > 0
    u = np.array([1, -1, 0]) / np.sqrt(2)
    v = np.array([1, 1, -2]) / np.sqrt(6)
    pts = [np.cos(t) * u + np.sin(t) * v for t in np.linspace(0, 2 * np.pi, 500)]
    assert _covered(lo, hi, pts)


def test_paving_view_matches_arrays(disks):
    pav, _ = solve_sequential(disks, 0.05)
    q = TaskQueue.root(disks, 0.05)
    q.run_to_completion()
    tags, _, _ = q.result_arrays()
    assert pav.precise_count == int(np.count_nonzero(tags == K.TAG_PRECISE))
    assert pav.inner_count == len(tags) - pav.precise_count
    assert all(not b.is_empty for _, b in pav.tagged())


def test_round_robin_branching_cycles_variables():
    p = parse_problem("var x in [0, 1];\nvar y in [0, 1];\ncon x*y - x*y = 0;")
    q = TaskQueue.root(p, 0.3)
    q.step()
    assert [tuple(it.hi - it.lo) for it in q.items()] == [(0.5, 1.0)] * 2
    q.step()
    q.step()
    assert [it.depth for it in q.items()] == [2, 2, 2, 2]
    assert all(tuple(it.hi - it.lo) == (0.5, 0.5) for it in q.items())
