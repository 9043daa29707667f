import random

import numpy as np
import pytest

from glbpaver.contractor import (
    Certificate, NewtonResult, hc4_fixed_point, inner_box, inner_test,
    interval_newton, prune,
)
from glbpaver.expression import Const, Var
from glbpaver.interval import Box
from glbpaver.problems import builtin_problem, parse_problem, sphere_plane

from oracles import inner_box_ok, unique_box_ok

x = Var(0, "x")
SQUARE_MINUS_FOUR = x ** 2 - Const.of(4)


def test_newton_unique_on_bracketing_box():
    box, cert = interval_newton([SQUARE_MINUS_FOUR], Box([1], [3]))
    assert cert is NewtonResult.UNIQUE
    assert box[0].lo <= 2 <= box[0].hi and box[0].width() < 1e-12


def test_newton_refutes_box_without_root():
    box, cert = interval_newton([SQUARE_MINUS_FOUR], Box([3], [5]))
    assert cert is NewtonResult.EMPTY and box.is_empty


def test_newton_unknown_when_derivative_spans_zero():
    b = Box([-3], [3])
    box, cert = interval_newton([SQUARE_MINUS_FOUR], b)
    assert cert is NewtonResult.UNKNOWN and box == b


def test_newton_singular_midpoint_jacobian_leaves_box():
    # the derivative enclosure [-2, 2] has midpoint 0
    b = Box([-1], [1])
    box, cert = interval_newton([x ** 2 - Const.of("0.25")], b)
    assert cert is NewtonResult.UNKNOWN and box == b


def test_newton_rejects_non_square_system():
    with pytest.raises(ValueError):
        interval_newton([SQUARE_MINUS_FOUR], Box([0, 0], [1, 1]))


def test_hc4_fixed_point_shrinks_disks_domain_soundly():
    p = builtin_problem("disks")
    out = hc4_fixed_point(p, p.domain)
    assert out.subset(p.domain) and out != p.domain
    rng = np.random.default_rng(1)
    for _ in range(2000):
        v1, v2 = rng.uniform(-1, 1, 2)
        v3, v4 = v1 ** 2 + v2 ** 2, (v1 - 1) ** 2 + v2 ** 2
        if v3 <= 1 and v4 <= 1:
            assert out.contains([v1, v2, v3, v4])


def test_hc4_contradiction_and_vacuous_problem():
    p = parse_problem("var x in [0, 1];\ncon 1 = 0;")
    assert hc4_fixed_point(p, p.domain).is_empty
    free = parse_problem("var x in [0, 1];\nvar y in [2, 3];")
    assert hc4_fixed_point(free, free.domain) == free.domain


def test_inner_test_inequality_examples():
    p = parse_problem("var x in [-2, -1];\ncon x < 0;")
    assert inner_test(p, Box([-2], [-1]))
    assert not inner_test(p, Box([-1], [0]))


def test_inner_test_disks_box_inside_lens():
    p = builtin_problem("disks")
    b = Box([0.49, -0.01, 0.2, 0.2], [0.51, 0.01, 0.3, 0.3])
    out = inner_box(p, b)
    assert out is not None and out.subset(b)
    assert inner_box_ok(p, out.lo, out.hi)


def test_inner_test_rejects_box_outside_solution_set():
    p = builtin_problem("disks")
    assert not inner_test(p, Box([0.49, -0.01, 0.5, 0.2], [0.51, 0.01, 0.6, 0.3]))


def test_well_constrained_inner_test_checks_inequalities_only():
    p = parse_problem("var x in [1.9, 2.1];\ncon x^2 - 4 = 0;\ncon x - 3 < 0;")
    assert inner_test(p, p.domain)
    q = parse_problem("var x in [1.9, 2.1];\ncon x^2 - 4 = 0;\ncon x - 2 < 0;")
    assert not inner_test(q, q.domain)
    # prune certifies such boxes through Newton, never as inner boxes
    assert prune(p, p.domain).certificate is Certificate.UNIQUE_SOLUTION
    assert prune(q, q.domain).certificate is Certificate.UNDECIDED


def test_prune_unique_solution():
    p = parse_problem("var x in [1.9, 2.1];\ncon x^2 - 4 = 0;")
    out = prune(p, p.domain)
    assert out.certificate is Certificate.UNIQUE_SOLUTION
    assert unique_box_ok(p.equations, out.box.lo, out.box.hi)


def test_prune_empty_box_and_refutation():
    p = builtin_problem("disks")
    assert prune(p, Box.empty(4)).certificate is Certificate.EMPTY_PROOF
    q = parse_problem("var x in [3, 5];\ncon x^2 - 4 = 0;")
    out = prune(q, q.domain)
    assert out.certificate is Certificate.EMPTY_PROOF and out.box.is_empty


def test_prune_eco8_root_is_undecided_subset_of_domain():
    p = builtin_problem("eco8")
    out = prune(p, p.domain)
    assert out.certificate is Certificate.UNDECIDED
    assert not out.box.is_empty and out.box.subset(p.domain)


@pytest.mark.parametrize("name", ["disks", "sphere-plane(3)", "eco4"])
def test_prune_is_contracting_and_sound(name):
    p = builtin_problem(name)
    rng = random.Random(name)
    for _ in range(200):
        lo = [rng.uniform(c.lo, c.hi) for c in p.domain]
        hi = [min(a + rng.uniform(0, 0.6) * (c.hi - c.lo), c.hi)
              for a, c in zip(lo, p.domain)]
        b = Box(lo, hi)
        out = prune(p, b)
        assert out.box.subset(b)
        assert out.box.is_empty == (out.certificate is Certificate.EMPTY_PROOF)


def test_prune_keeps_constructed_sphere_plane_points():
    p = sphere_plane(3)
    rng = np.random.default_rng(4)
    u = np.array([1, -1, 0]) / np.sqrt(2)
    v = np.array([1, 1, -2]) / np.sqrt(6)
    for _ in range(300):
        t = rng.uniform(0, 2 * np.pi)
        pt = np.cos(t) * u + np.sin(t) * v
        lo = pt - rng.uniform(0, 0.3, 3)
        hi = pt + rng.uniform(0, 0.3, 3)
        out = prune(p, Box(lo, hi))
        assert out.certificate is not Certificate.EMPTY_PROOF
        assert out.box.contains(pt)
