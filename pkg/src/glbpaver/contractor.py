"""The Prune step: HC4 propagation, interval Newton and inner-box tests."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels as K
from .expression import Expr, Problem, Tape, partial_deriv
from .interval import Box

#: stop propagating once no component shrinks by more than this ratio
THETA = 0.1
MAX_HC4_ROUNDS = 100
MAX_NEWTON_SWEEPS = 10
MIN_NEWTON_GAIN = 0.01
#: relative epsilon-inflation for Newton existence proofs
INFLATION = 0.1


class Certificate(enum.Enum):
    EMPTY_PROOF = "empty"
    INNER_VERIFIED = "inner"
    UNIQUE_SOLUTION = "unique"
    UNDECIDED = "undecided"


class NewtonResult(enum.Enum):
    EMPTY = K.CERT_EMPTY
    UNIQUE = K.CERT_UNIQUE
    UNKNOWN = K.CERT_UNKNOWN


_STATUS = {
    K.ST_EMPTY: Certificate.EMPTY_PROOF,
    K.ST_INNER: Certificate.INNER_VERIFIED,
    K.ST_UNIQUE: Certificate.UNIQUE_SOLUTION,
    K.ST_UNDECIDED: Certificate.UNDECIDED,
}


@dataclass(frozen=True)
class PruneOutcome:
    box: Box
    certificate: Certificate


def hc4_fixed_point(p: Problem, b: Box, theta: float = THETA) -> Box:
    if b.is_empty:
        return b
    cp = p.compiled
    lo, hi = b.lo.copy(), b.hi.copy()
    if not K.hc4_fixed_point(cp.tape, cp.con_start, cp.con_end, cp.con_rel,
                             lo, hi, theta, MAX_HC4_ROUNDS):
        return Box.empty(len(b))
    return Box(lo, hi)


def interval_newton(equations: Sequence[Expr], b: Box,
                    active: Sequence[int] | None = None,
                    max_sweeps: int = MAX_NEWTON_SWEEPS,
                    ) -> tuple[Box, NewtonResult]:
    """Interval Newton on the square system ``equations`` over ``active``.

    Components of ``b`` outside ``active`` are treated as interval
    parameters; a UNIQUE result means that for every parameter value the
    system has exactly one solution in the active components of the
    returned box.
    """
    if active is None:
        active = range(len(b))
    active = np.array(list(active), dtype=np.int64)
    if len(active) != len(equations):
        raise ValueError("Newton needs as many equations as active variables")
    if b.is_empty:
        return b, NewtonResult.EMPTY
    tape = Tape()
    starts, ends = [], []
    for f in equations:
        s, e = tape.add(f)
        starts.append(s)
        ends.append(e)
    dtape = Tape()
    droot = np.full((len(equations), len(b)), -1, dtype=np.int64)
    for i, f in enumerate(equations):
        for j in active:
            d = partial_deriv(f, int(j))
            droot[i, j] = dtape.add(d)[1] - 1
    lo, hi = b.lo.copy(), b.hi.copy()
    cert = K.interval_newton(tape.arrays(), np.array(starts, dtype=np.int64),
                             np.array(ends, dtype=np.int64), dtape.arrays(),
                             droot, active, lo, hi, max_sweeps,
                             MIN_NEWTON_GAIN)
    result = NewtonResult(K.CERT_UNKNOWN if cert == K.CERT_REGULAR else cert)
    if result is NewtonResult.EMPTY:
        return Box.empty(len(b)), result
    return Box(lo, hi), result


def inner_test(p: Problem, b: Box) -> bool:
    return inner_box(p, b) is not None


def inner_box(p: Problem, b: Box) -> Box | None:
    """Verified inner box derived from ``b``, or None.

    For under-constrained problems the dependent components of the result
    are tightened to the Newton enclosure of the solution branch over the
    parameter components. Existence is proved inside ``b`` itself.
    """
    if b.is_empty:
        return None
    cp = p.compiled
    lo, hi = b.lo.copy(), b.hi.copy()
    if p.n_f == p.n and p.n_f > 0:
        ok = K.strict_inequalities(cp.tape, cp.con_start, cp.con_end,
                                   cp.con_rel, lo, hi)
        return b if ok else None
    ok = K.inner_test(cp.tape, cp.con_start, cp.con_end, cp.con_rel,
                      cp.eq_start, cp.eq_end, cp.dtape, cp.droot, b.lo, b.hi,
                      lo, hi, INFLATION)
    return Box(lo, hi) if ok else None


def prune_arrays(p: Problem, lo: np.ndarray, hi: np.ndarray) -> int:
    """Kernel entry on raw arrays (modified in place); returns a status code."""
    cp = p.compiled
    return K.prune(cp.tape, cp.con_start, cp.con_end, cp.con_rel, cp.eq_start,
                   cp.eq_end, cp.dtape, cp.droot, lo, hi,
                   THETA, MAX_HC4_ROUNDS, MAX_NEWTON_SWEEPS, MIN_NEWTON_GAIN,
                   INFLATION)


def prune(p: Problem, b: Box, eps: float | None = None) -> PruneOutcome:
    """Contract ``b`` and classify it.

    ``eps`` is accepted for interface symmetry; the precision test itself
    belongs to the search loop.
    """
    if eps is not None and not eps > 0:
        raise ValueError("eps must be positive")
    if b.is_empty:
        return PruneOutcome(b, Certificate.EMPTY_PROOF)
    lo, hi = b.lo.copy(), b.hi.copy()
    status = prune_arrays(p, lo, hi)
    cert = _STATUS[status]
    if cert is Certificate.EMPTY_PROOF:
        return PruneOutcome(Box.empty(len(b)), cert)
    return PruneOutcome(Box(lo, hi), cert)
