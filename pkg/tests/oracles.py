"""Independent checkers used by the unit and acceptance tests.

Everything here works from exact rationals or plain float Newton
iterations and never calls the kernels it is used to judge.
"""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction

import numpy as np

from glbpaver.expression import (
    Add, Const, Constraint, Div, Mul, Neg, Pow, Relation, Sqrt, Sub, Var,
    enclose_decimal, eval_point, partial_deriv,
)
from glbpaver.interval import Interval

# -- random floats and intervals --------------------------------------------------


def random_float(rng: random.Random) -> float:
    kind = rng.random()
    if kind < 0.15:
        return float(rng.randint(-8, 8))
    if kind < 0.3:
        return rng.choice([0.1, 0.2, 0.3, 1 / 3, 2 / 3, 1e-3, 0.7]) * rng.choice([-1, 1])
    mag = 10.0 ** rng.uniform(-12, 12)
    return rng.uniform(-1, 1) * mag


def random_interval(rng: random.Random) -> Interval:
    a, b = random_float(rng), random_float(rng)
    if rng.random() < 0.1:
        b = a
    return Interval(min(a, b), max(a, b))


def point_in(rng: random.Random, x: Interval) -> float:
    r = rng.random()
    if r < 0.2:
        return x.lo
    if r < 0.4:
        return x.hi
    t = rng.random()
    p = x.lo + t * (x.hi - x.lo)
    return min(max(p, x.lo), x.hi)


def contains_exact(x: Interval, q: Fraction) -> bool:
    lo_ok = x.lo == -math.inf or Fraction(x.lo) <= q
    hi_ok = x.hi == math.inf or q <= Fraction(x.hi)
    return lo_ok and hi_ok


def _sqrt_contains(x: Interval, q: Fraction) -> bool:
    # lo <= sqrt(q) <= hi with lo clipped at 0
    lo = max(x.lo, 0.0)
    if x.hi < 0:
        return False
    lo_ok = Fraction(lo) ** 2 <= q
    hi_ok = x.hi == math.inf or q <= Fraction(x.hi) ** 2
    return lo_ok and hi_ok


def arithmetic_containment(trials: int, seed: int = 0) -> tuple[int, int]:
    """Random op(a, b) containment checks against exact rationals.

    Returns (checks performed, violations).
    """
    rng = random.Random(seed)
    ops = ["add", "sub", "mul", "div", "neg", "sqr", "pow", "sqrt"]
    bad = 0
    for i in range(trials):
        op = ops[i % len(ops)]
        a, b = random_interval(rng), random_interval(rng)
        x, y = Fraction(point_in(rng, a)), Fraction(point_in(rng, b))
        if op == "add":
            ok = contains_exact(a + b, x + y)
        elif op == "sub":
            ok = contains_exact(a - b, x - y)
        elif op == "mul":
            ok = contains_exact(a * b, x * y)
        elif op == "div":
            if y == 0:
                y = Fraction(b.hi) if b.hi != 0 else Fraction(b.lo)
            ok = y == 0 or contains_exact(a / b, x / y)
        elif op == "neg":
            ok = contains_exact(-a, -x)
        elif op == "sqr":
            ok = contains_exact(a.sqr(), x * x)
        elif op == "pow":
            k = rng.randint(2, 7)
            r = a ** k
            q = x ** k
            ok = contains_exact(r, q) if abs(float(q)) < 1e300 else r.hi == math.inf or r.lo == -math.inf or contains_exact(r, q)
        else:
            r = a.sqrt()
            if a.hi < 0:
                ok = r.is_empty
            else:
                q = abs(x)
                if Fraction(a.lo) > q or q > Fraction(a.hi):
                    q = Fraction(a.hi)
                ok = _sqrt_contains(r, q)
        bad += not ok
    return trials, bad


# -- random constraints with a known solution ------------------------------------


def exact_eval(e, x: list[Fraction]) -> Fraction:
    """Rational evaluation; sqrt only of perfect rational squares."""
    if isinstance(e, Var):
        return x[e.index]
    if isinstance(e, Const):
        return Fraction(e.text) if e.text else Fraction(e.lo)
    if isinstance(e, Add):
        return exact_eval(e.a, x) + exact_eval(e.b, x)
    if isinstance(e, Sub):
        return exact_eval(e.a, x) - exact_eval(e.b, x)
    if isinstance(e, Mul):
        return exact_eval(e.a, x) * exact_eval(e.b, x)
    if isinstance(e, Div):
        return exact_eval(e.a, x) / exact_eval(e.b, x)
    if isinstance(e, Neg):
        return -exact_eval(e.a, x)
    if isinstance(e, Pow):
        return exact_eval(e.a, x) ** e.k
    if isinstance(e, Sqrt):
        v = exact_eval(e.a, x)
        n, d = v.numerator, v.denominator
        rn, rd = math.isqrt(n), math.isqrt(d)
        if rn * rn != n or rd * rd != d:
            raise ValueError("not a perfect square")
        return Fraction(rn, rd)
    raise TypeError(type(e))


def random_expr(rng: random.Random, nvars: int, depth: int = 3):
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.75:
            i = rng.randrange(nvars)
            return Var(i, f"x{i + 1}")
        return Const.of(rng.choice(["0.5", "2", "3", "0.1", "-1.5", "7"]))
    kind = rng.choice(["add", "sub", "mul", "mul", "neg", "pow", "div",
                       "sqrtsq"])
    a = random_expr(rng, nvars, depth - 1)
    if kind == "neg":
        return Neg(a)
    if kind == "pow":
        return Pow(a, rng.randint(2, 4))
    if kind == "sqrtsq":
        return Sqrt(Pow(a, 2))
    b = random_expr(rng, nvars, depth - 1)
    return {"add": Add, "sub": Sub, "mul": Mul, "div": Div}[kind](a, b)


def random_solved_constraint(rng: random.Random, nvars: int):
    """(constraint, exact solution point, box containing it)."""
    while True:
        body = random_expr(rng, nvars, rng.randint(1, 4))
        point = [Fraction(rng.randint(-40, 40), rng.choice([1, 2, 4, 8, 10]))
                 for _ in range(nvars)]
        try:
            value = exact_eval(body, point)
        except (ZeroDivisionError, ValueError):
            continue
        if abs(value) > 1e12:
            continue
        break
    lo, hi = enclose_decimal(value)
    if rng.random() < 0.7:
        c = Constraint(Sub(body, Const(lo, hi)), Relation.EQ)
    else:
        slack = Fraction(rng.randint(0, 5), 4)
        lo, hi = enclose_decimal(value + slack)
        c = Constraint(Sub(body, Const(lo, hi)), Relation.LT)
    blo, bhi = [], []
    for p in point:
        f = float(p)
        w1 = rng.choice([0.0, 0.01, 0.5, 2.0, 10.0])
        w2 = rng.choice([0.0, 0.01, 0.5, 2.0, 10.0])
        blo.append(math.nextafter(f, -math.inf) - w1)
        bhi.append(math.nextafter(f, math.inf) + w2)
    return c, point, (blo, bhi)


def point_in_box_exact(point: list[Fraction], lo, hi) -> bool:
    return all(Fraction(float(a)) <= p <= Fraction(float(b))
               for p, a, b in zip(point, lo, hi))


# -- Newton polish ---------------------------------------------------------------


def newton_polish(equations, x0, active=None, iters=60):
    """Float Newton on ``equations`` over the ``active`` variables.

    Returns (point, residual max-norm).
    """
    x = np.array(x0, dtype=float)
    n = len(x)
    active = list(range(n)) if active is None else list(active)
    derivs = [[partial_deriv(f, j) for j in active] for f in equations]
    res = math.inf
    for _ in range(iters):
        F = np.array([eval_point(f, x) for f in equations])
        res = float(np.max(np.abs(F))) if len(F) else 0.0
        if res < 1e-14:
            break
        J = np.array([[eval_point(d, x) for d in row] for row in derivs])
        try:
            step = np.linalg.solve(J, F)
        except np.linalg.LinAlgError:
            break
        x[active] -= step
        if not np.all(np.isfinite(x)):
            break
    F = np.array([eval_point(f, x) for f in equations])
    res = float(np.max(np.abs(F))) if len(F) else 0.0
    return x, res


def unique_box_ok(equations, lo, hi, tol=1e-10) -> bool:
    mid = 0.5 * (np.asarray(lo) + np.asarray(hi))
    x, res = newton_polish(equations, mid)
    return res < tol and bool(np.all(lo <= x) and np.all(x <= hi))


def inner_box_ok(problem, lo, hi, samples=100, seed=0, tol=1e-10) -> bool:
    """Every sampled parameter point extends to a solution inside the box.

    All choices of dependent variables are tried; the box passes if one
    choice works for every sample. Inequalities must hold strictly.
    """
    rng = np.random.default_rng(seed)
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    eqs = list(problem.equations)
    ineqs = list(problem.inequalities)
    n, nf = problem.n, problem.n_f
    for dep in itertools.combinations(range(n), nf):
        ok = True
        for _ in range(samples):
            x = lo + rng.random(n) * (hi - lo)
            for j in dep:
                x[j] = 0.5 * (lo[j] + hi[j])
            x, res = newton_polish(eqs, x, active=dep)
            if not (res < tol and np.all(lo <= x) and np.all(x <= hi)
                    and all(eval_point(g, x) < 0 for g in ineqs)):
                ok = False
                break
        if ok:
            return True
    return False
