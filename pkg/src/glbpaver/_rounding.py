"""Directed rounding and interval primitives on (lo, hi) float pairs.

Every endpoint is computed in round-to-nearest and then corrected with an
error-free transformation (TwoSum / Dekker TwoProduct). When the rounding
error is provably zero the endpoint is kept, otherwise it is moved one float
outward with ``nextafter``. Operands outside the range where the
transformations are exact fall back to unconditional one-ulp widening.

The FPU rounding mode is never touched, so everything here is thread-safe.
All functions are numba-compiled and usable both from Python and from the
solver kernels.

Empty intervals are encoded as ``(inf, -inf)``.
"""

import math

import numpy as np
from numba import njit

INF = math.inf
MAX_FLOAT = 1.7976931348623157e308
EMPTY_LO = INF
EMPTY_HI = -INF

_SPLITTER = 134217729.0  # 2**27 + 1
_TP_MAX = 2.0**995
_TP_MIN = 2.0**-900


@njit(cache=True, nogil=True)
def next_up(x):
    return np.nextafter(x, INF)


@njit(cache=True, nogil=True)
def next_down(x):
    return np.nextafter(x, -INF)


@njit(cache=True, nogil=True)
def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


@njit(cache=True, nogil=True)
def _two_prod_err(a, b, p):
    ah, al = _split(a)
    bh, bl = _split(b)
    return ((ah * bh - p) + ah * bl + al * bh) + al * bl


@njit(cache=True, nogil=True)
def _tp_safe(a, b, p):
    ap = abs(p)
    return (abs(a) < _TP_MAX and abs(b) < _TP_MAX and ap < _TP_MAX
            and ap > _TP_MIN)


# -- addition ---------------------------------------------------------------

@njit(cache=True, nogil=True)
def add_down(a, b):
    s = a + b
    if math.isinf(s):
        if math.isinf(a) or math.isinf(b):
            return s
        return MAX_FLOAT if s > 0 else s
    if abs(s) > 2.0**1020:
        return next_down(s)
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    if err < 0.0:
        return next_down(s)
    return s


@njit(cache=True, nogil=True)
def add_up(a, b):
    s = a + b
    if math.isinf(s):
        if math.isinf(a) or math.isinf(b):
            return s
        return s if s > 0 else -MAX_FLOAT
    if abs(s) > 2.0**1020:
        return next_up(s)
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    if err > 0.0:
        return next_up(s)
    return s


@njit(cache=True, nogil=True)
def sub_down(a, b):
    return add_down(a, -b)


@njit(cache=True, nogil=True)
def sub_up(a, b):
    return add_up(a, -b)


# -- multiplication (0 * inf == 0) -------------------------------------------

@njit(cache=True, nogil=True)
def _mul_down(a, b):
    if a == 0.0 or b == 0.0:
        return 0.0
    p = a * b
    if math.isinf(p):
        if math.isinf(a) or math.isinf(b):
            return p
        return MAX_FLOAT if p > 0 else p
    if not _tp_safe(a, b, p):
        return next_down(p)
    if _two_prod_err(a, b, p) < 0.0:
        return next_down(p)
    return p


@njit(cache=True, nogil=True)
def _mul_up(a, b):
    if a == 0.0 or b == 0.0:
        return 0.0
    p = a * b
    if math.isinf(p):
        if math.isinf(a) or math.isinf(b):
            return p
        return p if p > 0 else -MAX_FLOAT
    if not _tp_safe(a, b, p):
        return next_up(p)
    if _two_prod_err(a, b, p) > 0.0:
        return next_up(p)
    return p


# -- division (b != 0) ----------------------------------------------------------

@njit(cache=True, nogil=True)
def _div_err_sign(a, b, q):
    # sign of (a/b - q), computed exactly from the residual a - q*b
    p = q * b
    e = _two_prod_err(q, b, p)
    r = (a - p) - e
    if r == 0.0:
        return 0.0
    return r if b > 0 else -r


@njit(cache=True, nogil=True)
def _div_down(a, b):
    if a == 0.0:
        return 0.0
    if math.isinf(b):
        # a / +-inf is the limit 0; inf / inf never arises from the case tables
        return -INF if math.isinf(a) else 0.0
    q = a / b
    if math.isinf(q):
        if math.isinf(a):
            return q
        return MAX_FLOAT if q > 0 else q
    if q == 0.0 or not _tp_safe(q, b, q * b) or abs(a) > _TP_MAX:
        return next_down(q)
    if _div_err_sign(a, b, q) < 0.0:
        return next_down(q)
    return q


@njit(cache=True, nogil=True)
def _div_up(a, b):
    if a == 0.0:
        return 0.0
    if math.isinf(b):
        return INF if math.isinf(a) else 0.0
    q = a / b
    if math.isinf(q):
        if math.isinf(a):
            return q
        return q if q > 0 else -MAX_FLOAT
    if q == 0.0 or not _tp_safe(q, b, q * b) or abs(a) > _TP_MAX:
        return next_up(q)
    if _div_err_sign(a, b, q) > 0.0:
        return next_up(q)
    return q


# the sign of an exact product or quotient is known, so directed rounding
# never crosses zero even when the result underflows

@njit(cache=True, nogil=True)
def mul_down(a, b):
    r = _mul_down(a, b)
    if r < 0.0 and (a > 0.0) == (b > 0.0):
        return 0.0
    return r


@njit(cache=True, nogil=True)
def mul_up(a, b):
    r = _mul_up(a, b)
    if r > 0.0 and (a > 0.0) != (b > 0.0):
        return 0.0
    return r


@njit(cache=True, nogil=True)
def div_down(a, b):
    r = _div_down(a, b)
    if r < 0.0 and (a > 0.0) == (b > 0.0):
        return 0.0
    return r


@njit(cache=True, nogil=True)
def div_up(a, b):
    r = _div_up(a, b)
    if r > 0.0 and (a > 0.0) != (b > 0.0):
        return 0.0
    return r


# -- square root (a >= 0) ---------------------------------------------------------

@njit(cache=True, nogil=True)
def sqrt_down(a):
    if a <= 0.0:
        return 0.0
    if math.isinf(a):
        return MAX_FLOAT
    r = math.sqrt(a)
    p = r * r
    if not _tp_safe(r, r, p):
        return next_down(r)
    d = (a - p) - _two_prod_err(r, r, p)
    if d < 0.0:
        return next_down(r)
    return r


@njit(cache=True, nogil=True)
def sqrt_up(a):
    if a <= 0.0:
        return 0.0
    if math.isinf(a):
        return INF
    r = math.sqrt(a)
    p = r * r
    if not _tp_safe(r, r, p):
        return next_up(r)
    d = (a - p) - _two_prod_err(r, r, p)
    if d > 0.0:
        return next_up(r)
    return r


# -- nonnegative integer powers of a nonnegative base ------------------------

@njit(cache=True, nogil=True)
def powpos_down(x, k):
    r = 1.0
    b = x
    while k > 0:
        if k & 1:
            r = mul_down(r, b)
        k >>= 1
        if k:
            b = mul_down(b, b)
    return r


@njit(cache=True, nogil=True)
def powpos_up(x, k):
    r = 1.0
    b = x
    while k > 0:
        if k & 1:
            r = mul_up(r, b)
        k >>= 1
        if k:
            b = mul_up(b, b)
    return r


@njit(cache=True, nogil=True)
def root_down(a, k):
    """Largest float r >= 0 found with r**k <= a (a >= 0)."""
    if a <= 0.0:
        return 0.0
    if math.isinf(a):
        return MAX_FLOAT
    if k == 2:
        return sqrt_down(a)
    r = a ** (1.0 / k)
    r = next_down(next_down(r))
    n = 0
    while r > 0.0 and powpos_up(r, k) > a:
        r = next_down(r)
        n += 1
        if n > 64:
            r = r * 0.5
    return max(r, 0.0)


@njit(cache=True, nogil=True)
def root_up(a, k):
    """Float r with r**k >= a (a >= 0)."""
    if a <= 0.0:
        return 0.0
    if math.isinf(a):
        return INF
    if k == 2:
        return sqrt_up(a)
    r = a ** (1.0 / k)
    r = next_up(next_up(r))
    n = 0
    while powpos_down(r, k) < a:
        r = next_up(r)
        n += 1
        if n > 64:
            r = r * 2.0
    return r


# -- interval operations --------------------------------------------------------

@njit(cache=True, nogil=True)
def is_empty(lo, hi):
    return not (lo <= hi)


@njit(cache=True, nogil=True)
def i_add(alo, ahi, blo, bhi):
    if alo > ahi or blo > bhi:
        return EMPTY_LO, EMPTY_HI
    return add_down(alo, blo), add_up(ahi, bhi)


@njit(cache=True, nogil=True)
def i_sub(alo, ahi, blo, bhi):
    if alo > ahi or blo > bhi:
        return EMPTY_LO, EMPTY_HI
    return sub_down(alo, bhi), sub_up(ahi, blo)


@njit(cache=True, nogil=True)
def i_neg(alo, ahi):
    if alo > ahi:
        return EMPTY_LO, EMPTY_HI
    return -ahi, -alo


@njit(cache=True, nogil=True)
def i_mul(alo, ahi, blo, bhi):
    if alo > ahi or blo > bhi:
        return EMPTY_LO, EMPTY_HI
    if alo >= 0.0:
        if blo >= 0.0:
            return mul_down(alo, blo), mul_up(ahi, bhi)
        if bhi <= 0.0:
            return mul_down(ahi, blo), mul_up(alo, bhi)
        return mul_down(ahi, blo), mul_up(ahi, bhi)
    if ahi <= 0.0:
        if blo >= 0.0:
            return mul_down(alo, bhi), mul_up(ahi, blo)
        if bhi <= 0.0:
            return mul_down(ahi, bhi), mul_up(alo, blo)
        return mul_down(alo, bhi), mul_up(alo, blo)
    if blo >= 0.0:
        return mul_down(alo, bhi), mul_up(ahi, bhi)
    if bhi <= 0.0:
        return mul_down(ahi, blo), mul_up(alo, blo)
    lo = min(mul_down(alo, bhi), mul_down(ahi, blo))
    hi = max(mul_up(alo, blo), mul_up(ahi, bhi))
    return lo, hi


@njit(cache=True, nogil=True)
def i_scale(c, blo, bhi):
    """Point-times-interval product c * [blo, bhi]."""
    if blo > bhi:
        return EMPTY_LO, EMPTY_HI
    if c >= 0.0:
        return mul_down(c, blo), mul_up(c, bhi)
    return mul_down(c, bhi), mul_up(c, blo)


@njit(cache=True, nogil=True)
def _div_nonzero(alo, ahi, blo, bhi):
    # divisor strictly positive or strictly negative
    if blo > 0.0:
        if alo >= 0.0:
            return div_down(alo, bhi), div_up(ahi, blo)
        if ahi <= 0.0:
            return div_down(alo, blo), div_up(ahi, bhi)
        return div_down(alo, blo), div_up(ahi, blo)
    # blo <= bhi < 0: a / b == -(a / -b)
    lo, hi = _div_nonzero(alo, ahi, -bhi, -blo)
    return -hi, -lo


@njit(cache=True, nogil=True)
def i_div_ext(alo, ahi, blo, bhi):
    """Extended division as up to two intervals (lo1, hi1, lo2, hi2).

    The second piece is empty unless the divisor straddles zero and the
    dividend excludes it.
    """
    if alo > ahi or blo > bhi:
        return EMPTY_LO, EMPTY_HI, EMPTY_LO, EMPTY_HI
    if blo > 0.0 or bhi < 0.0:
        lo, hi = _div_nonzero(alo, ahi, blo, bhi)
        return lo, hi, EMPTY_LO, EMPTY_HI
    if alo <= 0.0 <= ahi:
        return -INF, INF, EMPTY_LO, EMPTY_HI
    if blo == 0.0 and bhi == 0.0:
        return EMPTY_LO, EMPTY_HI, EMPTY_LO, EMPTY_HI
    if alo > 0.0:
        if blo == 0.0:
            return div_down(alo, bhi), INF, EMPTY_LO, EMPTY_HI
        if bhi == 0.0:
            return -INF, div_up(alo, blo), EMPTY_LO, EMPTY_HI
        return -INF, div_up(alo, blo), div_down(alo, bhi), INF
    # ahi < 0
    if blo == 0.0:
        return -INF, div_up(ahi, bhi), EMPTY_LO, EMPTY_HI
    if bhi == 0.0:
        return div_down(ahi, blo), INF, EMPTY_LO, EMPTY_HI
    return -INF, div_up(ahi, bhi), div_down(ahi, blo), INF


@njit(cache=True, nogil=True)
def i_div(alo, ahi, blo, bhi):
    lo1, hi1, lo2, hi2 = i_div_ext(alo, ahi, blo, bhi)
    return i_hull(lo1, hi1, lo2, hi2)


@njit(cache=True, nogil=True)
def i_hull(alo, ahi, blo, bhi):
    if alo > ahi:
        return blo, bhi
    if blo > bhi:
        return alo, ahi
    return min(alo, blo), max(ahi, bhi)


@njit(cache=True, nogil=True)
def i_meet(alo, ahi, blo, bhi):
    lo = max(alo, blo)
    hi = min(ahi, bhi)
    if lo > hi:
        return EMPTY_LO, EMPTY_HI
    return lo, hi


@njit(cache=True, nogil=True)
def i_meet_two(xlo, xhi, lo1, hi1, lo2, hi2):
    """Hull of x intersected with each of two pieces."""
    alo, ahi = i_meet(xlo, xhi, lo1, hi1)
    blo, bhi = i_meet(xlo, xhi, lo2, hi2)
    return i_hull(alo, ahi, blo, bhi)


@njit(cache=True, nogil=True)
def i_sqr(alo, ahi):
    return i_pow(alo, ahi, 2)


@njit(cache=True, nogil=True)
def i_pow(alo, ahi, k):
    if alo > ahi:
        return EMPTY_LO, EMPTY_HI
    if k == 0:
        return 1.0, 1.0
    if k % 2 == 0:
        if alo >= 0.0:
            return powpos_down(alo, k), powpos_up(ahi, k)
        if ahi <= 0.0:
            return powpos_down(-ahi, k), powpos_up(-alo, k)
        return 0.0, powpos_up(max(-alo, ahi), k)
    lo = powpos_down(alo, k) if alo >= 0.0 else -powpos_up(-alo, k)
    hi = powpos_up(ahi, k) if ahi >= 0.0 else -powpos_down(-ahi, k)
    return lo, hi


@njit(cache=True, nogil=True)
def i_root(alo, ahi, k):
    """Inverse image of x -> x**k restricted to real roots.

    For even k this is the nonnegative branch only; callers mirror it.
    """
    if alo > ahi:
        return EMPTY_LO, EMPTY_HI
    if k % 2 == 0:
        if ahi < 0.0:
            return EMPTY_LO, EMPTY_HI
        return root_down(max(alo, 0.0), k), root_up(ahi, k)
    lo = root_down(alo, k) if alo >= 0.0 else -root_up(-alo, k)
    hi = root_up(ahi, k) if ahi >= 0.0 else -root_down(-ahi, k)
    return lo, hi


@njit(cache=True, nogil=True)
def i_sqrt(alo, ahi):
    if alo > ahi or ahi < 0.0:
        return EMPTY_LO, EMPTY_HI
    return sqrt_down(max(alo, 0.0)), sqrt_up(ahi)


@njit(cache=True, nogil=True)
def midpoint(lo, hi):
    """A finite point of [lo, hi]; exact midpoint when it is representable."""
    if lo == -INF:
        if hi >= 0.0:
            return 0.0
        return max(2.0 * hi, -MAX_FLOAT)
    if hi == INF:
        if lo <= 0.0:
            return 0.0
        return min(2.0 * lo, MAX_FLOAT)
    m = 0.5 * lo + 0.5 * hi
    if m < lo:
        m = lo
    elif m > hi:
        m = hi
    return m


@njit(cache=True, nogil=True)
def width_up(lo, hi):
    if lo > hi:
        return -1.0
    return sub_up(hi, lo)
