"""Expression trees, constraints and problems.

Expressions are immutable node trees built either with the operator
overloads below or by :mod:`glbpaver.problems`. They are evaluated directly
for reference checks and compiled to flat tapes for the solver kernels.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from . import _kernels as K
from .interval import Box, Interval


class Expr:
    """Base node. Subclasses are frozen dataclasses."""

    def __add__(self, other):
        return Add(self, as_expr(other))

    def __radd__(self, other):
        return Add(as_expr(other), self)

    def __sub__(self, other):
        return Sub(self, as_expr(other))

    def __rsub__(self, other):
        return Sub(as_expr(other), self)

    def __mul__(self, other):
        return Mul(self, as_expr(other))

    def __rmul__(self, other):
        return Mul(as_expr(other), self)

    def __truediv__(self, other):
        return Div(self, as_expr(other))

    def __rtruediv__(self, other):
        return Div(as_expr(other), self)

    def __neg__(self):
        return Neg(self)

    def __pow__(self, k: int):
        if k == 1:
            return self
        return Pow(self, k)


@dataclass(frozen=True, eq=True)
class Var(Expr):
    index: int
    name: str = ""


@dataclass(frozen=True, eq=True)
class Const(Expr):
    """Constant enclosed by [lo, hi]; degenerate for representable values."""

    lo: float
    hi: float
    text: str = ""

    @classmethod
    def of(cls, value: float | int | str | Fraction) -> Const:
        lo, hi = enclose_decimal(value)
        text = value if isinstance(value, str) else ""
        return cls(lo, hi, text)

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi


@dataclass(frozen=True, eq=True)
class Add(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True, eq=True)
class Sub(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True, eq=True)
class Mul(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True, eq=True)
class Div(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True, eq=True)
class Neg(Expr):
    a: Expr


@dataclass(frozen=True, eq=True)
class Pow(Expr):
    a: Expr
    k: int

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 2:
            raise ValueError(f"exponent must be an integer >= 2, got {self.k!r}")


@dataclass(frozen=True, eq=True)
class Sqrt(Expr):
    a: Expr


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    return Const.of(x)


def enclose_decimal(value) -> tuple[float, float]:
    """Tightest float interval around an exact decimal or rational value."""
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            raise ValueError(f"constant must be finite, got {value}")
        return value, value
    exact = Fraction(value)
    f = float(exact)
    if math.isinf(f):
        raise ValueError(f"constant {value} overflows")
    ef = Fraction(f)
    if ef == exact:
        return f, f
    if ef < exact:
        return f, math.nextafter(f, math.inf)
    return math.nextafter(f, -math.inf), f


ZERO = Const(0.0, 0.0)
ONE = Const(1.0, 1.0)


def _is_const(e: Expr, v: float) -> bool:
    return isinstance(e, Const) and e.lo == v and e.hi == v


# -- evaluation ----------------------------------------------------------------

def eval_interval(e: Expr, box: Box) -> Interval:
    """Natural interval extension of ``e`` over ``box``."""
    if isinstance(e, Var):
        return box[e.index]
    if isinstance(e, Const):
        return Interval(e.lo, e.hi)
    if isinstance(e, Add):
        return eval_interval(e.a, box) + eval_interval(e.b, box)
    if isinstance(e, Sub):
        return eval_interval(e.a, box) - eval_interval(e.b, box)
    if isinstance(e, Mul):
        return eval_interval(e.a, box) * eval_interval(e.b, box)
    if isinstance(e, Div):
        return eval_interval(e.a, box) / eval_interval(e.b, box)
    if isinstance(e, Neg):
        return -eval_interval(e.a, box)
    if isinstance(e, Pow):
        return eval_interval(e.a, box) ** e.k
    if isinstance(e, Sqrt):
        return eval_interval(e.a, box).sqrt()
    raise TypeError(f"unknown node {e!r}")


def eval_point(e: Expr, x: Sequence[float]) -> float:
    """Plain floating-point evaluation (constants at their midpoint)."""
    if isinstance(e, Var):
        return float(x[e.index])
    if isinstance(e, Const):
        return 0.5 * (e.lo + e.hi)
    if isinstance(e, Add):
        return eval_point(e.a, x) + eval_point(e.b, x)
    if isinstance(e, Sub):
        return eval_point(e.a, x) - eval_point(e.b, x)
    if isinstance(e, Mul):
        return eval_point(e.a, x) * eval_point(e.b, x)
    if isinstance(e, Div):
        return eval_point(e.a, x) / eval_point(e.b, x)
    if isinstance(e, Neg):
        return -eval_point(e.a, x)
    if isinstance(e, Pow):
        return eval_point(e.a, x) ** e.k
    if isinstance(e, Sqrt):
        return math.sqrt(eval_point(e.a, x))
    raise TypeError(f"unknown node {e!r}")


def eval_exact(e: Expr, x: Sequence[Fraction]) -> Fraction:
    """Exact rational evaluation; constants must be exactly representable."""
    if isinstance(e, Var):
        return Fraction(x[e.index])
    if isinstance(e, Const):
        if e.text:
            return Fraction(e.text)
        return Fraction(e.lo)
    if isinstance(e, Add):
        return eval_exact(e.a, x) + eval_exact(e.b, x)
    if isinstance(e, Sub):
        return eval_exact(e.a, x) - eval_exact(e.b, x)
    if isinstance(e, Mul):
        return eval_exact(e.a, x) * eval_exact(e.b, x)
    if isinstance(e, Div):
        return eval_exact(e.a, x) / eval_exact(e.b, x)
    if isinstance(e, Neg):
        return -eval_exact(e.a, x)
    if isinstance(e, Pow):
        return eval_exact(e.a, x) ** e.k
    raise TypeError(f"no exact evaluation for {type(e).__name__}")


def variables(e: Expr) -> set[int]:
    if isinstance(e, Var):
        return {e.index}
    if isinstance(e, Const):
        return set()
    out: set[int] = set()
    for child in _children(e):
        out |= variables(child)
    return out


def _children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, (Add, Sub, Mul, Div)):
        return (e.a, e.b)
    if isinstance(e, (Neg, Pow, Sqrt)):
        return (e.a,)
    return ()


# -- differentiation -------------------------------------------------------------

def _add(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return Add(a, b)


def _sub(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return Neg(b)
    return Sub(a, b)


def _mul(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    return Mul(a, b)


def partial_deriv(e: Expr, i: int) -> Expr:
    """Symbolic derivative of ``e`` with respect to variable ``i``."""
    if isinstance(e, Var):
        return ONE if e.index == i else ZERO
    if isinstance(e, Const):
        return ZERO
    if i not in variables(e):
        return ZERO
    if isinstance(e, Add):
        return _add(partial_deriv(e.a, i), partial_deriv(e.b, i))
    if isinstance(e, Sub):
        return _sub(partial_deriv(e.a, i), partial_deriv(e.b, i))
    if isinstance(e, Mul):
        return _add(_mul(partial_deriv(e.a, i), e.b),
                    _mul(e.a, partial_deriv(e.b, i)))
    if isinstance(e, Div):
        # (a'b - ab') / b^2
        num = _sub(_mul(partial_deriv(e.a, i), e.b),
                   _mul(e.a, partial_deriv(e.b, i)))
        return Div(num, Pow(e.b, 2))
    if isinstance(e, Neg):
        d = partial_deriv(e.a, i)
        return ZERO if _is_const(d, 0.0) else Neg(d)
    if isinstance(e, Pow):
        base = e.a if e.k == 2 else Pow(e.a, e.k - 1)
        return _mul(_mul(Const.of(e.k), base), partial_deriv(e.a, i))
    if isinstance(e, Sqrt):
        return Div(partial_deriv(e.a, i), Mul(Const.of(2), Sqrt(e.a)))
    raise TypeError(f"unknown node {e!r}")


def jacobian(equations: Sequence[Expr], box: Box) -> list[list[Interval]]:
    n = len(box)
    return [[eval_interval(partial_deriv(f, j), box) for j in range(n)]
            for f in equations]


# -- rendering -------------------------------------------------------------------

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}


def to_text(e: Expr, names: Sequence[str] | None = None) -> str:
    """Render in the problem-file expression syntax."""

    def name(i):
        return names[i] if names else f"x{i + 1}"

    def go(e, parent=0, right=False):
        if isinstance(e, Var):
            return name(e.index)
        if isinstance(e, Const):
            if e.text:
                s = e.text
            elif e.is_point:
                s = repr(e.lo)
            else:
                raise ValueError("interval constants have no textual form")
            return f"({s})" if s.startswith("-") and parent else s
        if isinstance(e, Sqrt):
            return f"sqrt({go(e.a)})"
        p = _PREC[type(e)]
        if isinstance(e, Neg):
            s = "-" + go(e.a, p)
        elif isinstance(e, Pow):
            s = f"{go(e.a, p + 1)}^{e.k}"
        else:
            sym = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(e)]
            s = f"{go(e.a, p)} {sym} {go(e.b, p, True)}"
        if p < parent or (right and p == parent and isinstance(e, (Add, Sub, Mul, Div))):
            return f"({s})"
        return s

    return go(e)


# -- constraints and problems -------------------------------------------------------

class Relation(enum.Enum):
    EQ = "="
    LT = "<"


@dataclass(frozen=True)
class Constraint:
    body: Expr
    relation: Relation = Relation.EQ

    def holds(self, x: Sequence[float], tol: float = 0.0) -> bool:
        v = eval_point(self.body, x)
        if self.relation is Relation.EQ:
            return abs(v) <= tol
        return v < 0.0


class Tape:
    """Flattened post-order node arrays (see :mod:`glbpaver._kernels`)."""

    def __init__(self):
        self.op: list[int] = []
        self.a1: list[int] = []
        self.a2: list[int] = []
        self.iarg: list[int] = []
        self.clo: list[float] = []
        self.chi: list[float] = []

    def _emit(self, op, a1=-1, a2=-1, iarg=0, clo=0.0, chi=0.0) -> int:
        self.op.append(op)
        self.a1.append(a1)
        self.a2.append(a2)
        self.iarg.append(iarg)
        self.clo.append(clo)
        self.chi.append(chi)
        return len(self.op) - 1

    def add(self, e: Expr) -> tuple[int, int]:
        """Append ``e``; returns its segment ``(start, end)``."""
        start = len(self.op)
        self._walk(e)
        return start, len(self.op)

    def _walk(self, e: Expr) -> int:
        if isinstance(e, Var):
            return self._emit(K.VAR, iarg=e.index)
        if isinstance(e, Const):
            return self._emit(K.CONST, clo=e.lo, chi=e.hi)
        if isinstance(e, (Add, Sub, Mul, Div)):
            a = self._walk(e.a)
            b = self._walk(e.b)
            op = {Add: K.ADD, Sub: K.SUB, Mul: K.MUL, Div: K.DIV}[type(e)]
            return self._emit(op, a, b)
        if isinstance(e, Neg):
            return self._emit(K.NEG, self._walk(e.a))
        if isinstance(e, Pow):
            return self._emit(K.POW, self._walk(e.a), iarg=e.k)
        if isinstance(e, Sqrt):
            return self._emit(K.SQRT, self._walk(e.a))
        raise TypeError(f"unknown node {e!r}")

    def arrays(self):
        if not self.op:
            # numba needs typed arrays even when there are no nodes
            self._emit(K.CONST)
        return (np.array(self.op, dtype=np.int64),
                np.array(self.a1, dtype=np.int64),
                np.array(self.a2, dtype=np.int64),
                np.array(self.iarg, dtype=np.int64),
                np.array(self.clo, dtype=np.float64),
                np.array(self.chi, dtype=np.float64))


def hc4_revise(c: Constraint, box: Box) -> Box:
    """Forward-backward projection of one constraint onto ``box``."""
    if box.is_empty:
        return box
    tape = Tape()
    start, end = tape.add(c.body)
    arrs = tape.arrays()
    lo, hi = box.lo.copy(), box.hi.copy()
    size = arrs[0].shape[0]
    rel = K.REL_EQ if c.relation is Relation.EQ else K.REL_LT
    ok = K.hc4_revise(arrs, start, end, rel, lo, hi, np.empty(size),
                      np.empty(size))
    if not ok:
        return Box.empty(len(box))
    return Box(lo, hi)


@dataclass(frozen=True, eq=False)
class Problem:
    """Numerical CSP: variables, initial box and a constraint conjunction."""

    variable_names: tuple[str, ...]
    domain: Box
    constraints: tuple[Constraint, ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "variable_names", tuple(self.variable_names))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if len(self.variable_names) != len(self.domain):
            raise ValueError("one domain component per variable is required")
        for c in self.constraints:
            bad = [i for i in variables(c.body) if not 0 <= i < self.n]
            if bad:
                raise ValueError(f"variable index {bad[0]} out of range")

    @property
    def n(self) -> int:
        return len(self.variable_names)

    @property
    def equations(self) -> tuple[Expr, ...]:
        return tuple(c.body for c in self.constraints
                     if c.relation is Relation.EQ)

    @property
    def inequalities(self) -> tuple[Expr, ...]:
        return tuple(c.body for c in self.constraints
                     if c.relation is Relation.LT)

    @property
    def n_f(self) -> int:
        return len(self.equations)

    @property
    def n_g(self) -> int:
        return len(self.inequalities)

    @property
    def kind(self) -> str:
        if self.n == self.n_f:
            return "well-constrained"
        if self.n > self.n_f:
            return "under-constrained"
        return "over-constrained"

    def with_domain(self, domain: Box) -> Problem:
        return Problem(self.variable_names, domain, self.constraints, self.name)

    def to_text(self) -> str:
        lines = []
        for nm, comp in zip(self.variable_names, self.domain):
            lines.append(f"var {nm} in [{comp.lo!r}, {comp.hi!r}];")
        for c in self.constraints:
            lines.append(f"con {to_text(c.body, self.variable_names)} "
                         f"{c.relation.value} 0;")
        return "\n".join(lines) + "\n"

    @cached_property
    def compiled(self) -> CompiledProblem:
        return CompiledProblem(self)


class CompiledProblem:
    """Kernel-ready arrays for a :class:`Problem`."""

    def __init__(self, problem: Problem):
        tape = Tape()
        starts, ends, rels = [], [], []
        eq_starts, eq_ends = [], []
        for c in problem.constraints:
            s, e = tape.add(c.body)
            starts.append(s)
            ends.append(e)
            if c.relation is Relation.EQ:
                rels.append(K.REL_EQ)
                eq_starts.append(s)
                eq_ends.append(e)
            else:
                rels.append(K.REL_LT)
        self.tape = tape.arrays()
        self.con_start = np.array(starts, dtype=np.int64)
        self.con_end = np.array(ends, dtype=np.int64)
        self.con_rel = np.array(rels, dtype=np.int64)
        self.eq_start = np.array(eq_starts, dtype=np.int64)
        self.eq_end = np.array(eq_ends, dtype=np.int64)

        dtape = Tape()
        n, eqs = problem.n, problem.equations
        droot = np.full((len(eqs), n), -1, dtype=np.int64)
        for i, f in enumerate(eqs):
            for j in range(n):
                d = partial_deriv(f, j)
                if not _is_const(d, 0.0):
                    droot[i, j] = dtape.add(d)[1] - 1
        self.dtape = dtape.arrays()
        self.droot = droot
        self.n = n
        self.n_f = len(eqs)


__all__ = [
    "Expr", "Var", "Const", "Add", "Sub", "Mul", "Div", "Neg", "Pow", "Sqrt",
    "Constraint", "Relation", "Problem", "CompiledProblem", "Tape",
    "eval_interval", "eval_point", "eval_exact", "partial_deriv", "jacobian",
    "hc4_revise", "to_text", "as_expr", "enclose_decimal", "variables",
]
