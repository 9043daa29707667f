"""Problem-file parser and builtin benchmark problems.

Problem files are line-oriented::

    # intersection of two disks
    var v1 in [-1, 1];
    var v3 in [0, 1];
    con v1^2 + v2^2 - v3 = 0;
    con v1 - 0.5 < 0;

Expressions use ``+ - * / ^`` (integer exponents), ``sqrt(...)``,
parentheses and decimal literals. Non-representable literals are enclosed
by the tightest float interval.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .expression import (
    Add, Const, Constraint, Div, Expr, Mul, Neg, Pow, Problem, Relation,
    Sqrt, Sub, Var, enclose_decimal,
)
from .interval import Box


class ProblemSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int | None = None):
        where = f"line {line}" + (f", column {column}" if column else "")
        super().__init__(f"{where}: {message}")
        self.line = line
        self.column = column


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),;=<\[\]])
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str
    text: str
    col: int


def _tokenize(text: str, line: int) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ProblemSyntaxError(f"unexpected character {text[pos]!r}",
                                     line, pos + 1)
        if m.lastgroup != "ws":
            toks.append(_Tok(m.lastgroup, m.group(), pos + 1))
        pos = m.end()
    toks.append(_Tok("end", "", pos + 1))
    return toks


class _Parser:
    def __init__(self, toks: list[_Tok], line: int, names: dict[str, int]):
        self.toks = toks
        self.i = 0
        self.line = line
        self.names = names

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str):
        raise ProblemSyntaxError(msg, self.line, self.tok.col)

    def take(self, text: str | None = None, kind: str | None = None) -> _Tok:
        t = self.tok
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            want = repr(text) if text else kind
            got = repr(t.text) if t.text else "end of line"
            self.error(f"expected {want}, got {got}")
        self.i += 1
        return t

    def peek(self, *texts: str) -> bool:
        return self.tok.kind == "op" and self.tok.text in texts

    def signed_number(self) -> str:
        sign = ""
        if self.peek("-", "+"):
            sign = self.take().text.replace("+", "")
        return sign + self.take(kind="num").text

    def expr(self) -> Expr:
        e = self.term()
        while self.peek("+", "-"):
            op = self.take().text
            rhs = self.term()
            e = Add(e, rhs) if op == "+" else Sub(e, rhs)
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek("*", "/"):
            op = self.take().text
            rhs = self.unary()
            e = Mul(e, rhs) if op == "*" else Div(e, rhs)
        return e

    def unary(self) -> Expr:
        if self.peek("-"):
            self.take()
            return Neg(self.unary())
        if self.peek("+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek("^"):
            self.take()
            t = self.take(kind="num")
            if not t.text.isdigit() or int(t.text) < 1:
                raise ProblemSyntaxError("exponent must be a positive integer",
                                         self.line, t.col)
            k = int(t.text)
            return base if k == 1 else Pow(base, k)
        return base

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.take()
            lo, hi = enclose_decimal(t.text)
            return Const(lo, hi, t.text)
        if t.kind == "name":
            self.take()
            if t.text == "sqrt":
                self.take("(")
                e = self.expr()
                self.take(")")
                return Sqrt(e)
            if t.text not in self.names:
                raise ProblemSyntaxError(f"unknown identifier {t.text!r}",
                                         self.line, t.col)
            return Var(self.names[t.text], t.text)
        if self.peek("("):
            self.take()
            e = self.expr()
            self.take(")")
            return e
        self.error("expected an expression"
                   if t.kind != "end" else "unexpected end of line")


def _is_zero(e: Expr) -> bool:
    return isinstance(e, Const) and e.lo == 0.0 and e.hi == 0.0


def parse_problem(text: str, name: str = "") -> Problem:
    names: dict[str, int] = {}
    los: list[float] = []
    his: list[float] = []
    constraints: list[Constraint] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        p = _Parser(_tokenize(line, lineno), lineno, names)
        head = p.take(kind="name").text
        if head == "var":
            t = p.take(kind="name")
            if t.text in names:
                raise ProblemSyntaxError(f"{t.text!r} is already declared",
                                         lineno, t.col)
            if t.text in ("sqrt", "var", "con", "in"):
                raise ProblemSyntaxError(f"{t.text!r} is a reserved word",
                                         lineno, t.col)
            kw = p.take(kind="name")
            if kw.text != "in":
                raise ProblemSyntaxError("expected 'in'", lineno, kw.col)
            p.take("[")
            lo_text = p.signed_number()
            p.take(",")
            hi_text = p.signed_number()
            p.take("]")
            p.take(";")
            p.take(kind="end")
            lo = enclose_decimal(lo_text)[0]
            hi = enclose_decimal(hi_text)[1]
            if lo > hi:
                raise ProblemSyntaxError(
                    f"empty domain [{lo_text}, {hi_text}] for {t.text}", lineno)
            names[t.text] = len(los)
            los.append(lo)
            his.append(hi)
        elif head == "con":
            lhs = p.expr()
            if not p.peek("=", "<"):
                p.error("expected '=' or '<'")
            rel = Relation.EQ if p.take().text == "=" else Relation.LT
            rhs = p.expr()
            p.take(";")
            p.take(kind="end")
            body = lhs if _is_zero(rhs) else Sub(lhs, rhs)
            constraints.append(Constraint(body, rel))
        else:
            raise ProblemSyntaxError(f"expected 'var' or 'con', got {head!r}",
                                     lineno, 1)
    if not names:
        raise ProblemSyntaxError("no variables declared", 1)
    return Problem(tuple(names), Box(los, his), tuple(constraints), name)


def load_problem(path: str | Path) -> Problem:
    path = Path(path)
    return parse_problem(path.read_text(), name=path.stem)


# -- builtins ----------------------------------------------------------------------

def eco(k: int = 8) -> Problem:
    """Economics modelling system with k variables.

    For j = 1..k-1:  (x_j + sum_{i=1}^{k-1-j} x_i x_{i+j}) x_k - j = 0,
    plus x_1 + ... + x_{k-1} + 1 = 0, all domains [-100, 100].
    """
    if k < 2:
        raise ValueError("eco needs k >= 2")
    x = [Var(i, f"x{i + 1}") for i in range(k)]
    cons = []
    for j in range(1, k):
        inner: Expr = x[j - 1]
        for i in range(1, k - j):
            inner = Add(inner, Mul(x[i - 1], x[i + j - 1]))
        cons.append(Constraint(Sub(Mul(inner, x[k - 1]), Const.of(j))))
    total: Expr = x[0]
    for i in range(1, k - 1):
        total = Add(total, x[i])
    cons.append(Constraint(Add(total, Const.of(1))))
    names = tuple(v.name for v in x)
    return Problem(names, Box([-100.0] * k, [100.0] * k), tuple(cons),
                   f"eco{k}")


def disks() -> Problem:
    """Two intersecting unit disks in the (v1, v2) plane."""
    v1, v2, v3, v4 = (Var(i, f"v{i + 1}") for i in range(4))
    cons = (
        Constraint(Sub(Add(Pow(v1, 2), Pow(v2, 2)), v3)),
        Constraint(Sub(Add(Pow(Sub(v1, Const.of(1)), 2), Pow(v2, 2)), v4)),
    )
    return Problem(("v1", "v2", "v3", "v4"),
                   Box([-1.0, -1.0, 0.0, 0.0], [1.0, 1.0, 1.0, 1.0]),
                   cons, "disks")


def sphere_plane(d: int = 2) -> Problem:
    """Unit sphere cut by the plane sum(x) = 0 in dimension d."""
    if d < 2:
        raise ValueError("sphere-plane needs d >= 2")
    x = [Var(i, f"x{i + 1}") for i in range(d)]
    sq: Expr = Pow(x[0], 2)
    lin: Expr = x[0]
    for v in x[1:]:
        sq = Add(sq, Pow(v, 2))
        lin = Add(lin, v)
    cons = (Constraint(Sub(sq, Const.of(1))), Constraint(lin))
    return Problem(tuple(v.name for v in x), Box([-1.0] * d, [1.0] * d),
                   cons, f"sphere-plane{d}")


_BUILTINS = {"eco": (eco, 8), "disks": (disks, None),
             "sphere-plane": (sphere_plane, 2)}
_BUILTIN_RE = re.compile(r"^(eco|disks|sphere-plane)\(?(\d+)?\)?$")


def builtin_problem(name: str, param: int | None = None) -> Problem:
    """Look up ``eco``, ``disks`` or ``sphere-plane``.

    The size may be given inline (``eco9``, ``eco(9)``, ``sphere-plane(3)``)
    or as ``param``.
    """
    m = _BUILTIN_RE.match(name.strip())
    if not m:
        raise ValueError(f"unknown builtin problem {name!r}; "
                         f"choose from {', '.join(_BUILTINS)}")
    key, inline = m.group(1), m.group(2)
    factory, default = _BUILTINS[key]
    if default is None:
        if inline or param is not None:
            raise ValueError(f"{key} takes no size parameter")
        return factory()
    size = int(inline) if inline else (param if param is not None else default)
    return factory(size)


def resolve_problem(ref: str) -> Problem:
    """``builtin:<name>`` or ``file:<path>``."""
    kind, _, rest = ref.partition(":")
    if kind == "builtin" and rest:
        return builtin_problem(rest)
    if kind == "file" and rest:
        return load_problem(rest)
    raise ValueError(f"problem must be builtin:<name> or file:<path>, got {ref!r}")
