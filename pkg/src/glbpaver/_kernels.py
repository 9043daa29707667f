"""Compiled contraction kernels over flattened expression tapes.

A tape is a tuple ``(op, a1, a2, iarg, clo, chi)`` of parallel arrays, one
entry per node, with children stored before parents. Each constraint owns a
contiguous segment ``[start, end)`` whose last node is the root.

Kernels mutate the box arrays ``blo``/``bhi`` in place and report emptiness
through their return value. They release the GIL.
"""

import math

import numpy as np
from numba import njit

from ._rounding import (
    INF,
    add_down,
    add_up,
    i_add,
    i_div,
    i_div_ext,
    i_meet,
    i_meet_two,
    i_mul,
    i_neg,
    i_pow,
    i_root,
    i_scale,
    i_sqrt,
    i_sub,
    midpoint,
    width_up,
)

VAR, CONST, ADD, SUB, MUL, DIV, NEG, POW, SQRT = range(9)
REL_EQ, REL_LT = 0, 1

CERT_EMPTY, CERT_UNIQUE, CERT_UNKNOWN = 0, 1, 2
# unknown, but every preconditioned pivot excluded zero (inflation may help)
CERT_REGULAR = 3
ST_EMPTY, ST_INNER, ST_UNIQUE, ST_UNDECIDED = 0, 1, 2, 3


@njit(cache=True, nogil=True)
def forward(tape, start, end, blo, bhi, vlo, vhi):
    """Natural interval evaluation of nodes ``start..end-1``.

    Returns False as soon as a node evaluates to the empty interval.
    """
    return _eval_span(tape, start, end, blo, bhi, vlo, vhi, True)


@njit(cache=True, nogil=True)
def _eval_span(tape, start, end, blo, bhi, vlo, vhi, stop):
    op, a1, a2, ia, clo, chi = tape
    for k in range(start, end):
        o = op[k]
        if o == VAR:
            lo, hi = blo[ia[k]], bhi[ia[k]]
        elif o == CONST:
            lo, hi = clo[k], chi[k]
        elif o == ADD:
            lo, hi = i_add(vlo[a1[k]], vhi[a1[k]], vlo[a2[k]], vhi[a2[k]])
        elif o == SUB:
            lo, hi = i_sub(vlo[a1[k]], vhi[a1[k]], vlo[a2[k]], vhi[a2[k]])
        elif o == MUL:
            lo, hi = i_mul(vlo[a1[k]], vhi[a1[k]], vlo[a2[k]], vhi[a2[k]])
        elif o == DIV:
            lo, hi = i_div(vlo[a1[k]], vhi[a1[k]], vlo[a2[k]], vhi[a2[k]])
        elif o == NEG:
            lo, hi = i_neg(vlo[a1[k]], vhi[a1[k]])
        elif o == POW:
            lo, hi = i_pow(vlo[a1[k]], vhi[a1[k]], ia[k])
        else:
            lo, hi = i_sqrt(vlo[a1[k]], vhi[a1[k]])
        vlo[k] = lo
        vhi[k] = hi
        if stop and lo > hi:
            return False
    return True


@njit(cache=True, nogil=True)
def _narrow(vlo, vhi, k, lo, hi):
    nlo, nhi = i_meet(vlo[k], vhi[k], lo, hi)
    vlo[k] = nlo
    vhi[k] = nhi
    return nlo <= nhi


@njit(cache=True, nogil=True)
def backward(tape, start, end, blo, bhi, vlo, vhi):
    """Project node values down to the variables (root already narrowed)."""
    op, a1, a2, ia, clo, chi = tape
    for k in range(end - 1, start - 1, -1):
        o = op[k]
        plo, phi = vlo[k], vhi[k]
        if o == VAR:
            j = ia[k]
            lo, hi = i_meet(blo[j], bhi[j], plo, phi)
            if lo > hi:
                return False
            blo[j] = lo
            bhi[j] = hi
        elif o == CONST:
            pass
        elif o == ADD:
            x, y = a1[k], a2[k]
            lo, hi = i_sub(plo, phi, vlo[y], vhi[y])
            if not _narrow(vlo, vhi, x, lo, hi):
                return False
            lo, hi = i_sub(plo, phi, vlo[x], vhi[x])
            if not _narrow(vlo, vhi, y, lo, hi):
                return False
        elif o == SUB:
            x, y = a1[k], a2[k]
            lo, hi = i_add(plo, phi, vlo[y], vhi[y])
            if not _narrow(vlo, vhi, x, lo, hi):
                return False
            lo, hi = i_sub(vlo[x], vhi[x], plo, phi)
            if not _narrow(vlo, vhi, y, lo, hi):
                return False
        elif o == MUL:
            x, y = a1[k], a2[k]
            l1, h1, l2, h2 = i_div_ext(plo, phi, vlo[y], vhi[y])
            lo, hi = i_meet_two(vlo[x], vhi[x], l1, h1, l2, h2)
            if lo > hi:
                return False
            vlo[x] = lo
            vhi[x] = hi
            l1, h1, l2, h2 = i_div_ext(plo, phi, vlo[x], vhi[x])
            lo, hi = i_meet_two(vlo[y], vhi[y], l1, h1, l2, h2)
            if lo > hi:
                return False
            vlo[y] = lo
            vhi[y] = hi
        elif o == DIV:
            x, y = a1[k], a2[k]
            # y != 0 wherever the quotient is defined, so x = p * y
            lo, hi = i_mul(plo, phi, vlo[y], vhi[y])
            if not _narrow(vlo, vhi, x, lo, hi):
                return False
            l1, h1, l2, h2 = i_div_ext(vlo[x], vhi[x], plo, phi)
            lo, hi = i_meet_two(vlo[y], vhi[y], l1, h1, l2, h2)
            if lo > hi:
                return False
            vlo[y] = lo
            vhi[y] = hi
        elif o == NEG:
            lo, hi = i_neg(plo, phi)
            if not _narrow(vlo, vhi, a1[k], lo, hi):
                return False
        elif o == POW:
            x = a1[k]
            lo, hi = _inv_pow(vlo[x], vhi[x], plo, phi, ia[k])
            if not _narrow(vlo, vhi, x, lo, hi):
                return False
        else:
            x = a1[k]
            plo = max(plo, 0.0)
            if plo > phi:
                return False
            lo, hi = i_pow(plo, phi, 2)
            if not _narrow(vlo, vhi, x, lo, hi):
                return False
    return True


@njit(cache=True, nogil=True)
def _inv_pow(xlo, xhi, plo, phi, k):
    """Hull of {x in [xlo,xhi] : x**k in [plo,phi]}."""
    rlo, rhi = i_root(plo, phi, k)
    if rlo > rhi:
        return INF, -INF
    if k % 2 == 1:
        return i_meet(xlo, xhi, rlo, rhi)
    return i_meet_two(xlo, xhi, rlo, rhi, -rhi, -rlo)


@njit(cache=True, nogil=True)
def hc4_revise(tape, start, end, rel, blo, bhi, vlo, vhi):
    """One forward-backward projection of a constraint; False if empty."""
    if not forward(tape, start, end, blo, bhi, vlo, vhi):
        return False
    r = end - 1
    if rel == REL_EQ:
        ok = _narrow(vlo, vhi, r, 0.0, 0.0)
    else:
        ok = _narrow(vlo, vhi, r, -INF, 0.0)
    if not ok:
        return False
    return backward(tape, start, end, blo, bhi, vlo, vhi)


@njit(cache=True, nogil=True)
def _set_empty(blo, bhi):
    for j in range(blo.shape[0]):
        blo[j] = INF
        bhi[j] = -INF


@njit(cache=True, nogil=True)
def hc4_fixed_point(tape, con_start, con_end, con_rel, blo, bhi, theta,
                    max_rounds):
    """Propagate every constraint until no width shrinks by more than theta."""
    n = blo.shape[0]
    if n > 0 and blo[0] > bhi[0]:
        return False
    size = tape[0].shape[0]
    vlo = np.empty(size)
    vhi = np.empty(size)
    old = np.empty(n)
    for _ in range(max_rounds):
        for j in range(n):
            old[j] = bhi[j] - blo[j]
        for c in range(con_start.shape[0]):
            if not hc4_revise(tape, con_start[c], con_end[c], con_rel[c],
                              blo, bhi, vlo, vhi):
                _set_empty(blo, bhi)
                return False
        progress = False
        for j in range(n):
            w = bhi[j] - blo[j]
            if math.isinf(old[j]):
                if not math.isinf(w):
                    progress = True
            elif old[j] - w > theta * old[j]:
                progress = True
        if not progress:
            break
    return True


@njit(cache=True, nogil=True)
def strict_inequalities(tape, con_start, con_end, con_rel, blo, bhi):
    """True iff every g < 0 constraint has an upper bound below zero."""
    size = tape[0].shape[0]
    vlo = np.empty(size)
    vhi = np.empty(size)
    for c in range(con_start.shape[0]):
        if con_rel[c] != REL_LT:
            continue
        if not forward(tape, con_start[c], con_end[c], blo, bhi, vlo, vhi):
            return False
        if not (vhi[con_end[c] - 1] < 0.0):
            return False
    return True


@njit(cache=True, nogil=True)
def _forward_all(tape, blo, bhi, vlo, vhi):
    # derivative tapes: evaluate everything, emptiness is reported per root
    _eval_span(tape, 0, tape[0].shape[0], blo, bhi, vlo, vhi, False)


@njit(cache=True, nogil=True)
def _invert(m):
    """Gauss-Jordan inverse with partial pivoting; None-like flag on failure."""
    n = m.shape[0]
    a = m.copy()
    inv = np.eye(n)
    for c in range(n):
        p = c
        best = abs(a[c, c])
        for r in range(c + 1, n):
            if abs(a[r, c]) > best:
                best = abs(a[r, c])
                p = r
        if not (best > 1e-300) or not math.isfinite(best):
            return inv, False
        if p != c:
            for j in range(n):
                t = a[c, j]
                a[c, j] = a[p, j]
                a[p, j] = t
                t = inv[c, j]
                inv[c, j] = inv[p, j]
                inv[p, j] = t
        d = a[c, c]
        for j in range(n):
            a[c, j] /= d
            inv[c, j] /= d
        for r in range(n):
            if r != c:
                f = a[r, c]
                if f != 0.0:
                    for j in range(n):
                        a[r, j] -= f * a[c, j]
                        inv[r, j] -= f * inv[c, j]
    for i in range(n):
        for j in range(n):
            if not math.isfinite(inv[i, j]):
                return inv, False
    return inv, True


@njit(cache=True, nogil=True)
def _dot_scaled(cvec, lo_col, hi_col):
    """Interval sum_k c[k] * [lo_col[k], hi_col[k]] with outward rounding."""
    slo = 0.0
    shi = 0.0
    for k in range(cvec.shape[0]):
        plo, phi = i_scale(cvec[k], lo_col[k], hi_col[k])
        slo = add_down(slo, plo)
        shi = add_up(shi, phi)
    return slo, shi


@njit(cache=True, nogil=True)
def newton_sweep(tape, eq_start, eq_end, dtape, droot, active, blo, bhi):
    """One preconditioned interval Gauss-Seidel (Hansen-Sengupta) step.

    ``active`` lists the variables solved for; all other components of the
    box act as interval parameters. On return the active components hold
    x ∩ N(x). Returns a certificate code; CERT_REGULAR is an unknown
    outcome in which every preconditioned pivot excluded zero.
    """
    nf = active.shape[0]
    n = blo.shape[0]
    # midpoint box for the residual
    mid = np.empty(nf)
    plo = blo.copy()
    phi = bhi.copy()
    for a in range(nf):
        j = active[a]
        m = midpoint(blo[j], bhi[j])
        mid[a] = m
        plo[j] = m
        phi[j] = m
    size = tape[0].shape[0]
    vlo = np.empty(size)
    vhi = np.empty(size)
    flo = np.empty(nf)
    fhi = np.empty(nf)
    for i in range(nf):
        if not forward(tape, eq_start[i], eq_end[i], plo, phi, vlo, vhi):
            return CERT_UNKNOWN
        r = eq_end[i] - 1
        flo[i] = vlo[r]
        fhi[i] = vhi[r]
    dsize = dtape[0].shape[0]
    dvlo = np.empty(dsize)
    dvhi = np.empty(dsize)
    _forward_all(dtape, blo, bhi, dvlo, dvhi)
    jlo = np.empty((nf, nf))
    jhi = np.empty((nf, nf))
    jm = np.empty((nf, nf))
    for i in range(nf):
        for a in range(nf):
            k = droot[i, active[a]]
            if k < 0:
                lo, hi = 0.0, 0.0
            else:
                lo, hi = dvlo[k], dvhi[k]
            if not (lo <= hi):
                return CERT_UNKNOWN
            jlo[i, a] = lo
            jhi[i, a] = hi
            jm[i, a] = midpoint(lo, hi)
    for i in range(nf):
        if not (math.isfinite(flo[i]) and math.isfinite(fhi[i])):
            return CERT_UNKNOWN
    cinv, ok = _invert(jm)
    if not ok:
        return CERT_UNKNOWN
    # preconditioned system A = C J, b = C F
    alo = np.empty((nf, nf))
    ahi = np.empty((nf, nf))
    colo = np.empty(nf)
    cohi = np.empty(nf)
    for i in range(nf):
        for a in range(nf):
            for k in range(nf):
                colo[k] = jlo[k, a]
                cohi[k] = jhi[k, a]
            alo[i, a], ahi[i, a] = _dot_scaled(cinv[i], colo, cohi)
    bl = np.empty(nf)
    bh = np.empty(nf)
    for i in range(nf):
        bl[i], bh[i] = _dot_scaled(cinv[i], flo, fhi)
    unique = True
    regular = True
    for i in range(nf):
        j = active[i]
        slo, shi = bl[i], bh[i]
        for a in range(nf):
            if a == i:
                continue
            ja = active[a]
            dlo, dhi = i_sub(blo[ja], bhi[ja], mid[a], mid[a])
            tlo, thi = i_mul(alo[i, a], ahi[i, a], dlo, dhi)
            slo, shi = i_add(slo, shi, tlo, thi)
        # N_i = m_i - s / A_ii
        l1, h1, l2, h2 = i_div_ext(slo, shi, alo[i, i], ahi[i, i])
        n1lo, n1hi = i_sub(mid[i], mid[i], l1, h1)
        n2lo, n2hi = i_sub(mid[i], mid[i], l2, h2)
        if alo[i, i] <= 0.0 <= ahi[i, i]:
            regular = False
        if l2 <= h2 or not (n1lo > blo[j] and n1hi < bhi[j]):
            unique = False
        lo, hi = i_meet_two(blo[j], bhi[j], n1lo, n1hi, n2lo, n2hi)
        if lo > hi:
            _set_empty(blo, bhi)
            return CERT_EMPTY
        blo[j] = lo
        bhi[j] = hi
    if unique:
        return CERT_UNIQUE
    return CERT_REGULAR if regular else CERT_UNKNOWN


@njit(cache=True, nogil=True)
def interval_newton(tape, eq_start, eq_end, dtape, droot, active, blo, bhi,
                    max_sweeps, min_gain):
    """Iterate Newton sweeps until a certificate or negligible contraction."""
    nf = active.shape[0]
    before = np.empty(nf)
    cert = CERT_UNKNOWN
    for _ in range(max_sweeps):
        for a in range(nf):
            before[a] = bhi[active[a]] - blo[active[a]]
        cert = newton_sweep(tape, eq_start, eq_end, dtape, droot, active,
                            blo, bhi)
        if cert == CERT_EMPTY or cert == CERT_UNIQUE:
            return cert
        gain = 0.0
        for a in range(nf):
            j = active[a]
            if before[a] > 0.0 and math.isfinite(before[a]):
                gain = max(gain, (before[a] - (bhi[j] - blo[j])) / before[a])
            elif math.isinf(before[a]) and math.isfinite(bhi[j] - blo[j]):
                gain = 1.0
        if gain < min_gain:
            break
    return cert


@njit(cache=True, nogil=True)
def select_dependent(dtape, droot, blo, bhi, forbid):
    """Greedy complete pivoting on the midpoint Jacobian.

    Returns the column indices chosen as dependent variables (one per
    equation); column ``forbid`` is never chosen.
    """
    nf, n = droot.shape
    mlo = blo.copy()
    mhi = bhi.copy()
    for j in range(n):
        m = midpoint(blo[j], bhi[j])
        mlo[j] = m
        mhi[j] = m
    dsize = dtape[0].shape[0]
    dvlo = np.empty(dsize)
    dvhi = np.empty(dsize)
    _forward_all(dtape, mlo, mhi, dvlo, dvhi)
    a = np.zeros((nf, n))
    for i in range(nf):
        for j in range(n):
            k = droot[i, j]
            if k >= 0:
                v = 0.5 * dvlo[k] + 0.5 * dvhi[k]
                a[i, j] = v if math.isfinite(v) else 0.0
    used_row = np.zeros(nf, dtype=np.bool_)
    used_col = np.zeros(n, dtype=np.bool_)
    cols = np.empty(nf, dtype=np.int64)
    for step in range(nf):
        best = -1.0
        bi = -1
        bj = -1
        for i in range(nf):
            if used_row[i]:
                continue
            for j in range(n):
                if used_col[j] or j == forbid:
                    continue
                if abs(a[i, j]) > best:
                    best = abs(a[i, j])
                    bi = i
                    bj = j
        if bi < 0:
            cols[step:] = -1
            return cols
        used_row[bi] = True
        used_col[bj] = True
        cols[step] = bj
        piv = a[bi, bj]
        if piv != 0.0:
            for i in range(nf):
                if not used_row[i]:
                    f = a[i, bj] / piv
                    for jj in range(n):
                        a[i, jj] -= f * a[bi, jj]
    return cols


@njit(cache=True, nogil=True)
def inflated_newton(tape, eq_start, eq_end, dtape, droot, active, blo, bhi,
                    clip_lo, clip_hi, delta):
    """Epsilon-inflated existence test on the active components.

    The active components are inflated (never beyond ``clip``) and one
    Newton sweep is tried, up to three times. On success the box holds the
    intersection of its old value with N(inflated) and True is returned;
    otherwise the box is left untouched.
    """
    wlo = blo.copy()
    whi = bhi.copy()
    plo = np.empty(active.shape[0])
    phi = np.empty(active.shape[0])
    for _ in range(3):
        for a in range(active.shape[0]):
            j = active[a]
            w = whi[j] - wlo[j]
            d = delta * w + 1e-15 * max(abs(wlo[j]), abs(whi[j])) + 1e-300
            wlo[j] = max(wlo[j] - d, clip_lo[j])
            whi[j] = min(whi[j] + d, clip_hi[j])
        for a in range(active.shape[0]):
            plo[a] = wlo[active[a]]
            phi[a] = whi[active[a]]
        cert = newton_sweep(tape, eq_start, eq_end, dtape, droot, active,
                            wlo, whi)
        if cert == CERT_UNIQUE:
            for a in range(active.shape[0]):
                j = active[a]
                lo, hi = i_meet(blo[j], bhi[j], wlo[j], whi[j])
                if lo > hi:
                    # unreachable for sound inputs: the solution is in both
                    return False
                blo[j] = lo
                bhi[j] = hi
            return True
        if cert != CERT_REGULAR:
            return False
        # N(x) covers x in some component: inflating further cannot help
        for a in range(active.shape[0]):
            j = active[a]
            if wlo[j] == plo[a] and whi[j] == phi[a]:
                return False
    return False


@njit(cache=True, nogil=True)
def inner_test(tape, con_start, con_end, con_rel, eq_start, eq_end, dtape,
               droot, clip_lo, clip_hi, blo, bhi, delta):
    """Verify that the box is inner; may tighten dependent components.

    Dependent variables are chosen by greedy pivoting; for every value of
    the remaining (parameter) components the inflated Newton test proves a
    solution inside the returned box.
    """
    nf, n = droot.shape
    if nf > n:
        return False
    if nf == 0:
        return strict_inequalities(tape, con_start, con_end, con_rel,
                                   blo, bhi)
    if nf == n:
        # isolated solutions never fill a box
        return False
    forbid = -1
    for attempt in range(2):
        cols = select_dependent(dtape, droot, blo, bhi, forbid)
        if cols[nf - 1] < 0:
            return False
        wlo = blo.copy()
        whi = bhi.copy()
        if inflated_newton(tape, eq_start, eq_end, dtape, droot, cols,
                           wlo, whi, clip_lo, clip_hi, delta):
            if strict_inequalities(tape, con_start, con_end, con_rel,
                                   wlo, whi):
                for j in range(n):
                    blo[j] = wlo[j]
                    bhi[j] = whi[j]
                return True
        forbid = cols[0]
    return False


@njit(cache=True, nogil=True)
def prune(tape, con_start, con_end, con_rel, eq_start, eq_end, dtape, droot,
          blo, bhi, theta, max_rounds, max_sweeps, min_gain, delta):
    """HC4 fixed point, then Newton certification or inner verification.

    Inflation during verification is clipped to the incoming box, so the
    result is always a subset of it.
    """
    n = blo.shape[0]
    nf = droot.shape[0]
    olo = blo.copy()
    ohi = bhi.copy()
    if not hc4_fixed_point(tape, con_start, con_end, con_rel, blo, bhi,
                           theta, max_rounds):
        return ST_EMPTY
    if nf == n and nf > 0:
        active = np.arange(n)
        cert = interval_newton(tape, eq_start, eq_end, dtape, droot, active,
                               blo, bhi, max_sweeps, min_gain)
        if cert == CERT_EMPTY:
            return ST_EMPTY
        if cert == CERT_REGULAR:
            if inflated_newton(tape, eq_start, eq_end, dtape, droot, active,
                               blo, bhi, olo, ohi, delta):
                cert = CERT_UNIQUE
        if cert == CERT_UNIQUE and strict_inequalities(
                tape, con_start, con_end, con_rel, blo, bhi):
            return ST_UNIQUE
        return ST_UNDECIDED
    if nf < n:
        if inner_test(tape, con_start, con_end, con_rel, eq_start, eq_end,
                      dtape, droot, olo, ohi, blo, bhi, delta):
            return ST_INNER
    return ST_UNDECIDED


@njit(cache=True, nogil=True)
def box_width(lo, hi):
    w = 0.0
    for j in range(lo.shape[0]):
        w = max(w, width_up(lo[j], hi[j]))
    return w


@njit(cache=True, nogil=True)
def branch_index(lo, hi, depth):
    """Round-robin split variable, skipping unsplittable components.

    Returns -1 when no component can be bisected.
    """
    n = lo.shape[0]
    for off in range(n):
        j = (depth + off) % n
        a, b = lo[j], hi[j]
        if math.isinf(a) or math.isinf(b):
            continue
        m = midpoint(a, b)
        if a < m < b:
            return j
    return -1


# state slots of a batch queue
Q_HEAD, Q_SIZE, Q_RESULTS, Q_PRUNES, Q_BRANCHES = range(5)
TAG_PRECISE, TAG_INNER, TAG_UNIQUE = 0, 1, 2


@njit(cache=True, nogil=True)
def _store(rlo, rhi, rtag, state, lo, hi, tag):
    r = state[Q_RESULTS]
    rlo[r] = lo
    rhi[r] = hi
    rtag[r] = tag
    state[Q_RESULTS] = r + 1


@njit(cache=True, nogil=True)
def process_batch(tape, con_start, con_end, con_rel, eq_start, eq_end, dtape,
                  droot, theta, max_rounds, max_sweeps, min_gain, delta, eps,
                  qlo, qhi, qdepth, rlo, rhi, rtag, hist, state, max_prunes):
    """Run up to ``max_prunes`` branch-and-prune iterations on a ring queue.

    Stops early when the queue is empty or a buffer (queue, results, depth
    histogram) needs to grow; the caller grows it and calls again.
    Returns the number of boxes pruned.
    """
    cap, n = qlo.shape
    lo = np.empty(n)
    hi = np.empty(n)
    done = 0
    while done < max_prunes:
        head = state[Q_HEAD]
        size = state[Q_SIZE]
        if size == 0 or size + 1 > cap or state[Q_RESULTS] >= rlo.shape[0]:
            break
        d = qdepth[head]
        if d + 1 >= hist.shape[0]:
            break
        for j in range(n):
            lo[j] = qlo[head, j]
            hi[j] = qhi[head, j]
        head = (head + 1) % cap
        size -= 1
        state[Q_HEAD] = head
        state[Q_SIZE] = size
        status = prune(tape, con_start, con_end, con_rel, eq_start, eq_end,
                       dtape, droot, lo, hi, theta, max_rounds, max_sweeps,
                       min_gain, delta)
        state[Q_PRUNES] += 1
        hist[d] += 1
        done += 1
        if status == ST_EMPTY:
            continue
        if status == ST_INNER:
            _store(rlo, rhi, rtag, state, lo, hi, TAG_INNER)
            continue
        if status == ST_UNIQUE:
            _store(rlo, rhi, rtag, state, lo, hi, TAG_UNIQUE)
            continue
        if box_width(lo, hi) <= eps:
            _store(rlo, rhi, rtag, state, lo, hi, TAG_PRECISE)
            continue
        k = branch_index(lo, hi, d)
        if k < 0:
            # below float resolution
            _store(rlo, rhi, rtag, state, lo, hi, TAG_PRECISE)
            continue
        m = midpoint(lo[k], hi[k])
        t1 = (head + size) % cap
        t2 = (t1 + 1) % cap
        for j in range(n):
            qlo[t1, j] = lo[j]
            qhi[t1, j] = hi[j]
            qlo[t2, j] = lo[j]
            qhi[t2, j] = hi[j]
        qhi[t1, k] = m
        qlo[t2, k] = m
        qdepth[t1] = d + 1
        qdepth[t2] = d + 1
        state[Q_SIZE] = size + 2
        state[Q_BRANCHES] += 1
    return done
